use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{em_train, llr_score, GmmError, GmmModel, TrainConfig};
use crate::features::{
    AudioSignal, CqccConfig, CqccExtractor, FeatureError, FeatureMatrix, LfccConfig, LfccExtractor,
};
use crate::trialdata::{ScoreSet, Task, TrialId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontEnd {
    Cqcc,
    Lfcc,
}

impl FrontEnd {
    pub fn as_str(self) -> &'static str {
        match self {
            FrontEnd::Cqcc => "cqcc",
            FrontEnd::Lfcc => "lfcc",
        }
    }
}

impl fmt::Display for FrontEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FrontEnd {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cqcc" => Ok(FrontEnd::Cqcc),
            "lfcc" => Ok(FrontEnd::Lfcc),
            _ => Err(format!("unknown front-end {s:?} (expected cqcc or lfcc)")),
        }
    }
}

/// A configured front-end bound to one sample rate.
pub enum FeatureExtractor {
    Lfcc(LfccExtractor),
    Cqcc(CqccExtractor),
}

impl FeatureExtractor {
    /// Default configuration with the task's maximum frequency.
    pub fn for_task(
        front_end: FrontEnd,
        task: Task,
        sample_rate: u32,
    ) -> Result<Self, FeatureError> {
        let fmax = task.baseline_fmax();
        Ok(match front_end {
            FrontEnd::Lfcc => Self::Lfcc(LfccExtractor::new(
                LfccConfig::with_fmax(fmax),
                sample_rate,
            )?),
            FrontEnd::Cqcc => Self::Cqcc(CqccExtractor::new(
                CqccConfig::with_fmax(fmax),
                sample_rate,
            )?),
        })
    }

    pub fn extract(&self, signal: &AudioSignal) -> Result<FeatureMatrix, FeatureError> {
        match self {
            Self::Lfcc(e) => e.extract(signal),
            Self::Cqcc(e) => e.extract(signal),
        }
    }

    /// Extracts every signal in parallel, preserving order.
    pub fn extract_all(&self, signals: &[AudioSignal]) -> Result<Vec<FeatureMatrix>, FeatureError> {
        signals.par_iter().map(|s| self.extract(s)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineModels {
    pub bona: GmmModel,
    pub spoof: GmmModel,
}

fn pooled(
    extractor: &FeatureExtractor,
    signals: &[AudioSignal],
) -> Result<FeatureMatrix, GmmError> {
    if signals.is_empty() {
        return Err(GmmError::BadConfig("training set is empty".into()));
    }
    let feats = extractor.extract_all(signals)?;
    Ok(FeatureMatrix::vstack(&feats)?)
}

/// Trains the bonafide and spoof models on pooled frames of each class.
pub fn train_baseline(
    extractor: &FeatureExtractor,
    train_bona: &[AudioSignal],
    train_spoof: &[AudioSignal],
    cfg: &TrainConfig,
) -> Result<BaselineModels, GmmError> {
    let bona = em_train(&pooled(extractor, train_bona)?, cfg)?;
    let spoof = em_train(&pooled(extractor, train_spoof)?, cfg)?;
    Ok(BaselineModels { bona, spoof })
}

/// One LLR score per trial, in input order.
pub fn score_trials(
    extractor: &FeatureExtractor,
    models: &BaselineModels,
    trials: &[(TrialId, AudioSignal)],
) -> Result<ScoreSet, GmmError> {
    let scores = trials
        .par_iter()
        .map(|(id, signal)| {
            let feats = extractor.extract(signal)?;
            Ok((id.clone(), llr_score(&models.bona, &models.spoof, &feats)?))
        })
        .collect::<Result<Vec<_>, GmmError>>()?;
    ScoreSet::new(scores).map_err(|e| GmmError::BadConfig(e.to_string()))
}

/// Feature extraction with the task's maximum frequency, two-class GMM
/// training and LLR scoring of every trial. No data augmentation.
pub fn baseline_pipeline(
    train_bona: &[AudioSignal],
    train_spoof: &[AudioSignal],
    trials: &[(TrialId, AudioSignal)],
    front_end: FrontEnd,
    task: Task,
    cfg: &TrainConfig,
) -> Result<ScoreSet, GmmError> {
    let rate = train_bona
        .first()
        .map(AudioSignal::sample_rate)
        .ok_or_else(|| GmmError::BadConfig("bonafide training set is empty".into()))?;
    let all_rates = train_bona
        .iter()
        .chain(train_spoof)
        .chain(trials.iter().map(|(_, s)| s));
    if let Some(s) = all_rates.into_iter().find(|s| s.sample_rate() != rate) {
        return Err(GmmError::BadConfig(format!(
            "mixed sample rates: {rate} Hz and {} Hz",
            s.sample_rate()
        )));
    }
    let extractor = FeatureExtractor::for_task(front_end, task, rate)?;
    let models = train_baseline(&extractor, train_bona, train_spoof, cfg)?;
    score_trials(&extractor, &models, trials)
}
