use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use spoofeval_core::coeffs_config::CoefficientSets;
use spoofeval_core::metrics::{self, TdcfCoefficients};
use spoofeval_core::stats::{significance_matrix, SystemResult};
use spoofeval_core::trialdata::{
    align, parse_key_file, parse_score_file, AlignMode, LabeledScores, Phase, Task, TrialKey,
};

use super::{list_dir, read, stem};
use crate::args::{
    CoeffArgs, EerArgs, EvaluateArgs, Format, ScoreInput, SignificanceArgs, TdcfArgs,
};
use crate::error::{ctx, CliError, CliResult};
use crate::output::{json, Output};

fn load_keys(path: &Path, task: Option<Task>) -> CliResult<(Vec<TrialKey>, Task)> {
    let mut keys = parse_key_file(&read(path)?).map_err(ctx(path))?;
    if let Some(t) = task {
        keys.retain(|k| k.task == t);
    }
    let mut tasks: Vec<Task> = keys.iter().map(|k| k.task).collect();
    tasks.sort();
    tasks.dedup();
    match tasks[..] {
        [t] => Ok((keys, t)),
        [] => Err(CliError::Data(format!(
            "{}: no matching keys",
            path.display()
        ))),
        _ => Err(CliError::Data(format!(
            "{}: keys cover several tasks; select one with --task",
            path.display()
        ))),
    }
}

fn join(
    scores: &Path,
    keys: &[TrialKey],
    phase: Option<Phase>,
    lenient: bool,
) -> CliResult<LabeledScores> {
    let scores_set = parse_score_file(&read(scores)?).map_err(ctx(scores))?;
    let mode = if lenient {
        AlignMode::Lenient
    } else {
        AlignMode::Strict
    };
    let aligned = align(&scores_set, keys, phase, mode).map_err(ctx(scores))?;
    if aligned.extras_dropped > 0 {
        log::warn!(
            "{}: dropped {} unkeyed scores",
            scores.display(),
            aligned.extras_dropped
        );
    }
    if aligned.scores.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no trials in the selected subset",
            scores.display()
        )));
    }
    Ok(aligned.scores)
}

/// One score per line; with two fields the second is the score.
fn bare_scores(path: &Path) -> CliResult<Vec<f64>> {
    let text = String::from_utf8(read(path)?).map_err(ctx(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let fields: Vec<&str> = l.split_whitespace().collect();
            let v = match fields[..] {
                [s] | [_, s] => s.parse::<f64>().ok().filter(|v| v.is_finite()),
                _ => None,
            };
            v.ok_or_else(|| {
                CliError::Data(format!(
                    "{}: line {}: expected a finite score",
                    path.display(),
                    i + 1
                ))
            })
        })
        .collect()
}

/// Labelled scores plus the task they belong to, when known.
fn labeled(input: &ScoreInput) -> CliResult<(LabeledScores, Option<Task>)> {
    let phase = input.phase.map(Phase::from);
    match (&input.scores, &input.keys, &input.bona, &input.spoof) {
        (Some(s), Some(k), None, None) => {
            let (keys, task) = load_keys(k, input.task)?;
            Ok((join(s, &keys, phase, input.lenient)?, Some(task)))
        }
        (None, None, Some(b), Some(s)) => Ok((
            LabeledScores::from_classes(&bare_scores(b)?, &bare_scores(s)?),
            input.task,
        )),
        _ => Err(CliError::Usage(
            "give either --scores and --keys, or --bona and --spoof".into(),
        )),
    }
}

/// Coefficient phase for a key subset: progress uses the progress set,
/// everything else the evaluation set.
fn coefficient_phase(phase: Option<Phase>) -> Phase {
    match phase {
        Some(Phase::Progress) => Phase::Progress,
        _ => Phase::Evaluation,
    }
}

/// Explicit coefficients, else the (possibly overridden) table entry.
fn coefficients(
    c: &CoeffArgs,
    task: Option<Task>,
    phase: Option<Phase>,
) -> CliResult<Option<TdcfCoefficients>> {
    if let (Some(c0), Some(c1), Some(c2)) = (c.c0, c.c1, c.c2) {
        return TdcfCoefficients::new(c0, c1, c2)
            .map(Some)
            .map_err(|e| CliError::Usage(e.to_string()));
    }
    let Some(task) = task else {
        return Ok(None);
    };
    let sets = match &c.coeffs_config {
        Some(p) => {
            let text = String::from_utf8(read(p)?).map_err(ctx(p))?;
            CoefficientSets::from_toml(&text).map_err(ctx(p))?
        }
        None => CoefficientSets::default(),
    };
    Ok(sets.get(task, coefficient_phase(phase)))
}

pub fn evaluate(a: &EvaluateArgs, out: &mut Output) -> CliResult<()> {
    let phase = Phase::from(a.phase);
    let (keys, task) = load_keys(&a.keys, Some(a.task))?;
    let scores = join(&a.scores, &keys, Some(phase), a.lenient)?;
    let coeffs = coefficients(&a.coeffs, Some(task), Some(phase))?;
    let report = metrics::evaluate(&scores, coeffs.as_ref()).map_err(CliError::data)?;
    out.report(&match out.format {
        Format::Human => report.to_table(),
        Format::Kv => report.to_key_values(),
        Format::Structured => report.to_json(),
    })
}

#[derive(Serialize)]
struct EerOut {
    /// Percent.
    eer: f64,
    threshold: f64,
    n_bona: usize,
    n_spoof: usize,
}

pub fn eer(a: &EerArgs, out: &mut Output) -> CliResult<()> {
    let (scores, _) = labeled(&a.input)?;
    let e = metrics::eer(&scores.bona_scores(), &scores.spoof_scores()).map_err(CliError::data)?;
    let r = EerOut {
        eer: 100.0 * e.eer,
        threshold: e.threshold,
        n_bona: scores.n_bona(),
        n_spoof: scores.n_spoof(),
    };
    out.report(&match out.format {
        Format::Human => format!("EER {:.2} % at threshold {}\n", r.eer, r.threshold),
        Format::Kv => format!(
            "eer={}\nthreshold={}\nn_bona={}\nn_spoof={}\n",
            r.eer, r.threshold, r.n_bona, r.n_spoof
        ),
        Format::Structured => json(&r),
    })
}

#[derive(Serialize)]
struct TdcfOut {
    min_tdcf: f64,
    min_tdcf_raw: f64,
    threshold: f64,
    c0: f64,
    c1: f64,
    c2: f64,
    n_bona: usize,
    n_spoof: usize,
}

pub fn tdcf(a: &TdcfArgs, out: &mut Output) -> CliResult<()> {
    let (scores, task) = labeled(&a.input)?;
    let c = match coefficients(&a.coeffs, task, a.input.phase.map(Phase::from))? {
        Some(c) => c,
        None if task == Some(Task::Df) => {
            return Err(CliError::Usage(
                "DF has no t-DCF coefficients; pass --c0/--c1/--c2".into(),
            ))
        }
        None => return Err(CliError::Usage("pass --task or --c0/--c1/--c2".into())),
    };
    let (bona, spoof) = (scores.bona_scores(), scores.spoof_scores());
    let m = metrics::min_tdcf(&bona, &spoof, &c).map_err(CliError::data)?;
    let r = TdcfOut {
        min_tdcf: metrics::normalize_tdcf(m.value, &c).map_err(CliError::data)?,
        min_tdcf_raw: m.value,
        threshold: m.threshold,
        c0: c.c0,
        c1: c.c1,
        c2: c.c2,
        n_bona: bona.len(),
        n_spoof: spoof.len(),
    };
    out.report(&match out.format {
        Format::Human => format!(
            "min t-DCF {:.4} (normalized; raw {:.4}) at threshold {}\n",
            r.min_tdcf, r.min_tdcf_raw, r.threshold
        ),
        Format::Kv => format!(
            "min_tdcf={}\nmin_tdcf_raw={}\nthreshold={}\nc0={}\nc1={}\nc2={}\nn_bona={}\nn_spoof={}\n",
            r.min_tdcf, r.min_tdcf_raw, r.threshold, r.c0, r.c1, r.c2, r.n_bona, r.n_spoof
        ),
        Format::Structured => json(&r),
    })
}

fn results_csv(path: &Path) -> CliResult<Vec<SystemResult>> {
    let text = String::from_utf8(read(path)?).map_err(ctx(path))?;
    let bad = |line: usize| {
        CliError::Data(format!(
            "{}: line {line}: expected system_id,eer,pmiss,pfa,n_bona,n_spoof",
            path.display()
        ))
    };
    let mut systems = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("system_id")) {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let [id, eer, pmiss, pfa, nb, ns] = f[..] else {
            return Err(bad(i + 1));
        };
        let rate = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 1));
        let count = |s: &str| s.parse::<usize>().map_err(|_| bad(i + 1));
        systems.push(SystemResult {
            system_id: id.to_owned(),
            eer: rate(eer)?,
            pmiss: rate(pmiss)?,
            pfa: rate(pfa)?,
            n_bona: count(nb)?,
            n_spoof: count(ns)?,
        });
    }
    Ok(systems)
}

pub fn significance(a: &SignificanceArgs, out: &mut Output) -> CliResult<()> {
    let systems = match (&a.systems, &a.keys, &a.results) {
        (Some(dir), Some(keys), None) => {
            let (keys, _) = load_keys(keys, a.task)?;
            let phase = a.phase.map(Phase::from);
            list_dir(dir, "txt")?
                .iter()
                .map(|p| {
                    let s = join(p, &keys, phase, false)?;
                    SystemResult::from_scores(stem(p)?, &s.bona_scores(), &s.spoof_scores())
                        .map_err(ctx(p))
                })
                .collect::<CliResult<Vec<_>>>()?
        }
        (None, None, Some(csv)) => results_csv(csv)?,
        _ => {
            return Err(CliError::Usage(
                "give either --systems and --keys, or --results".into(),
            ))
        }
    };
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(CliError::Usage(format!(
            "--alpha must lie in (0, 1), got {}",
            a.alpha
        )));
    }
    let m = significance_matrix(&systems, a.alpha).map_err(CliError::data)?;
    out.report(&match out.format {
        Format::Human => {
            let mut s = m.to_text();
            writeln!(
                s,
                "■ = significant at alpha {} (Holm-Bonferroni over all pairs)",
                m.alpha
            )
            .unwrap();
            for &(i, j) in &m.degenerate {
                writeln!(
                    s,
                    "note: {} vs {}: zero variance, counted as p = 0",
                    m.system_ids[i], m.system_ids[j]
                )
                .unwrap();
            }
            s
        }
        Format::Kv => m.to_csv(),
        Format::Structured => json(&serde_json::json!({
            "alpha": m.alpha,
            "systems": systems,
            "pvalues": m.pvalues,
            "significant": m.significant,
            "degenerate": m.degenerate,
        })),
    })
}
