use std::io::{BufReader, BufWriter};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use spoofeval_core::features::{read_features, FeatureMatrix};
use spoofeval_core::gmm::{
    em_train_with_report, llr_score, read_model, score_trials, train_baseline, write_model,
    FeatureExtractor, GmmModel, TrainConfig,
};
use spoofeval_core::trialdata::{write_score_file, ScoreSet, TrialId};

use super::{list_dir, load_wav, stem};
use crate::args::{BaselineArgs, Format, GmmScoreArgs, GmmTrainArgs, TrainArgs};
use crate::error::{ctx, CliError, CliResult};
use crate::output::{json, Output};

impl From<&TrainArgs> for TrainConfig {
    fn from(a: &TrainArgs) -> Self {
        TrainConfig {
            n_components: a.components,
            max_iter: a.max_iter,
            tolerance: a.tolerance,
            variance_floor: a.variance_floor,
            seed: a.seed,
            init: a.init.into(),
        }
    }
}

fn load_features(path: &Path) -> CliResult<FeatureMatrix> {
    let f = std::fs::File::open(path).map_err(ctx(path))?;
    read_features(BufReader::new(f)).map_err(ctx(path))
}

fn load_model(path: &Path) -> CliResult<GmmModel> {
    let f = std::fs::File::open(path).map_err(ctx(path))?;
    read_model(BufReader::new(f)).map_err(ctx(path))
}

fn save_model(path: &Path, m: &GmmModel) -> CliResult<()> {
    let f = std::fs::File::create(path).map_err(ctx(path))?;
    write_model(BufWriter::new(f), m).map_err(ctx(path))
}

#[derive(Serialize)]
struct TrainSummary {
    components: usize,
    dim: usize,
    frames: usize,
    iterations: usize,
    final_mean_loglik: f64,
    seed: u64,
}

pub fn train(a: &GmmTrainArgs, out: &mut Output) -> CliResult<()> {
    let dest = out.artifact("model file")?;
    let parts = a
        .features
        .iter()
        .map(|p| load_features(p))
        .collect::<CliResult<Vec<_>>>()?;
    let frames = FeatureMatrix::vstack(&parts).map_err(CliError::data)?;
    let cfg = TrainConfig::from(&a.train);
    let (model, report) = em_train_with_report(&frames, &cfg).map_err(CliError::data)?;
    save_model(dest, &model)?;
    let s = TrainSummary {
        components: model.n_components(),
        dim: model.dim(),
        frames: frames.n_frames(),
        iterations: report.iterations.len(),
        final_mean_loglik: model.loglik(&frames).map_err(CliError::data)?
            / frames.n_frames() as f64,
        seed: cfg.seed,
    };
    out.summary(&match out.format {
        Format::Human => format!(
            "trained {} components on {} frames of dimension {} in {} EM iterations; mean log-likelihood {:.6}\n",
            s.components, s.frames, s.dim, s.iterations, s.final_mean_loglik
        ),
        Format::Kv => format!(
            "components={}\ndim={}\nframes={}\niterations={}\nfinal_mean_loglik={}\nseed={}\n",
            s.components, s.dim, s.frames, s.iterations, s.final_mean_loglik, s.seed
        ),
        Format::Structured => json(&serde_json::json!({ "summary": s, "iterations": report.iterations })),
    })
}

fn render_scores(scores: &ScoreSet, format: Format) -> String {
    match format {
        Format::Human | Format::Kv => write_score_file(scores),
        Format::Structured => json(
            &scores
                .entries()
                .iter()
                .map(|(id, s)| serde_json::json!({ "trial": id.as_str(), "score": s }))
                .collect::<Vec<_>>(),
        ),
    }
}

pub fn score(a: &GmmScoreArgs, out: &mut Output) -> CliResult<()> {
    let bona = load_model(&a.bona_model)?;
    let spoof = load_model(&a.spoof_model)?;
    let entries = a
        .features
        .par_iter()
        .map(|p| {
            let m = load_features(p)?;
            let s = llr_score(&bona, &spoof, &m).map_err(ctx(p))?;
            Ok((TrialId::new(stem(p)?).map_err(ctx(p))?, s))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let scores = ScoreSet::new(entries).map_err(CliError::data)?;
    out.report(&render_scores(&scores, out.format))
}

pub fn baseline(a: &BaselineArgs, out: &mut Output) -> CliResult<()> {
    let load_dir = |dir: &Path| -> CliResult<Vec<(String, _)>> {
        list_dir(dir, "wav")?
            .par_iter()
            .map(|p| Ok((stem(p)?, load_wav(p)?)))
            .collect()
    };
    let bona: Vec<_> = load_dir(&a.train_bona)?
        .into_iter()
        .map(|(_, s)| s)
        .collect();
    let spoof: Vec<_> = load_dir(&a.train_spoof)?
        .into_iter()
        .map(|(_, s)| s)
        .collect();
    let trials = load_dir(&a.eval)?
        .into_iter()
        .map(|(id, s)| Ok((TrialId::new(id).map_err(CliError::data)?, s)))
        .collect::<CliResult<Vec<_>>>()?;

    let rate = bona[0].sample_rate();
    let mixed = bona
        .iter()
        .chain(&spoof)
        .chain(trials.iter().map(|(_, s)| s))
        .any(|s| s.sample_rate() != rate);
    if mixed {
        return Err(CliError::Data(
            "all audio must share one sample rate".into(),
        ));
    }
    let extractor =
        FeatureExtractor::for_task(a.front_end, a.task, rate).map_err(CliError::data)?;
    let cfg = TrainConfig::from(&a.train);
    let models = train_baseline(&extractor, &bona, &spoof, &cfg).map_err(CliError::data)?;
    if let Some(dir) = &a.models_dir {
        std::fs::create_dir_all(dir).map_err(ctx(dir))?;
        save_model(&dir.join("bona.gmm"), &models.bona)?;
        save_model(&dir.join("spoof.gmm"), &models.spoof)?;
    }
    let scores = score_trials(&extractor, &models, &trials).map_err(CliError::data)?;
    out.report(&render_scores(&scores, out.format))
}
