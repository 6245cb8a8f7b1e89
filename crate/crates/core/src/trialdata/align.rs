use std::collections::{HashMap, HashSet};

use super::{LabeledScores, LabeledTrial, Phase, ScoreSet, TrialDataError, TrialKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlignMode {
    /// Scores without a key are an error.
    #[default]
    Strict,
    /// Scores without a key are dropped and counted.
    Lenient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aligned {
    pub scores: LabeledScores,
    /// Unkeyed score entries dropped in lenient mode.
    pub extras_dropped: usize,
}

/// Joins scores to the keys of the requested phase (all phases when
/// `phase` is `None`). Output records follow key order.
///
/// Scores for trials keyed under another phase are ignored; only scores
/// whose trial is absent from the key table count as extras.
pub fn align(
    scores: &ScoreSet,
    keys: &[TrialKey],
    phase: Option<Phase>,
    mode: AlignMode,
) -> Result<Aligned, TrialDataError> {
    let by_id: HashMap<&str, f64> = scores
        .entries()
        .iter()
        .map(|(id, s)| (id.as_str(), *s))
        .collect();

    let mut missing = Vec::new();
    let mut records = Vec::new();
    for key in keys.iter().filter(|k| phase.is_none_or(|p| k.phase == p)) {
        match by_id.get(key.trial.as_str()) {
            Some(&score) => records.push(LabeledTrial {
                trial: key.trial.clone(),
                score,
                label: key.label,
                condition: key.condition.clone(),
                phase: key.phase,
            }),
            None => missing.push(key.trial.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(TrialDataError::MissingTrial(missing));
    }

    let keyed: HashSet<&str> = keys.iter().map(|k| k.trial.as_str()).collect();
    let extras: Vec<String> = scores
        .entries()
        .iter()
        .filter(|(id, _)| !keyed.contains(id.as_str()))
        .map(|(id, _)| id.to_string())
        .collect();
    if mode == AlignMode::Strict && !extras.is_empty() {
        return Err(TrialDataError::ExtraTrial(extras));
    }

    Ok(Aligned {
        scores: LabeledScores::from_records(records),
        extras_dropped: extras.len(),
    })
}
