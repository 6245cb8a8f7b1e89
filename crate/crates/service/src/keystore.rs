use std::collections::BTreeMap;
use std::path::Path;

use spoofeval_core::coeffs_config::CoefficientSets;
use spoofeval_core::metrics::{eer, min_tdcf, normalize_tdcf, MetricsError, TdcfCoefficients};
use spoofeval_core::trialdata::{
    align, parse_key_file, AlignMode, Phase, ScoreSet, Task, TrialDataError, TrialKey,
};

use crate::platform::SubmissionResults;

#[derive(Debug, thiserror::Error)]
pub enum KeyStoreError {
    #[error("cannot read key file {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("key file {path}: {source}")]
    Parse {
        path: String,
        source: TrialDataError,
    },
    #[error("trial {0} is keyed in more than one key file")]
    Duplicate(String),
}

#[derive(Debug, thiserror::Error)]
pub enum ScoringError {
    #[error(transparent)]
    Alignment(#[from] TrialDataError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("no coefficient set for {task} {phase}")]
    NoCoefficients { task: Task, phase: Phase },
}

/// Answer keys and coefficient sets held privately by the service.
///
/// Only aggregate metrics ever leave this type; there is no accessor for
/// labels or per-trial outcomes.
pub struct EvalContext {
    keys: BTreeMap<Task, Vec<TrialKey>>,
    coefficients: CoefficientSets,
}

impl std::fmt::Debug for EvalContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EvalContext")
            .field(
                "trials",
                &self
                    .keys
                    .iter()
                    .map(|(t, k)| (t, k.len()))
                    .collect::<Vec<_>>(),
            )
            .finish_non_exhaustive()
    }
}

/// Loads one key file (trials of any task) with the given coefficients.
pub fn load_key_store(
    path: &Path,
    coefficients: CoefficientSets,
) -> Result<EvalContext, KeyStoreError> {
    let mut ctx = EvalContext::new(coefficients);
    ctx.add_key_file(path)?;
    Ok(ctx)
}

impl EvalContext {
    pub fn new(coefficients: CoefficientSets) -> Self {
        Self {
            keys: BTreeMap::new(),
            coefficients,
        }
    }

    pub fn add_key_file(&mut self, path: &Path) -> Result<(), KeyStoreError> {
        let shown = path.display().to_string();
        let bytes = std::fs::read(path).map_err(|source| KeyStoreError::Read {
            path: shown.clone(),
            source,
        })?;
        let keys = parse_key_file(&bytes).map_err(|source| KeyStoreError::Parse {
            path: shown,
            source,
        })?;
        self.add_keys(keys)
    }

    pub fn add_keys(&mut self, keys: Vec<TrialKey>) -> Result<(), KeyStoreError> {
        let mut seen: std::collections::HashSet<String> = self
            .keys
            .values()
            .flatten()
            .map(|k| k.trial.as_str().to_owned())
            .collect();
        for k in &keys {
            if !seen.insert(k.trial.as_str().to_owned()) {
                return Err(KeyStoreError::Duplicate(k.trial.to_string()));
            }
        }
        for k in keys {
            self.keys.entry(k.task).or_default().push(k);
        }
        Ok(())
    }

    pub fn n_trials(&self, task: Task, subset: Phase) -> usize {
        self.keys
            .get(&task)
            .map_or(0, |k| k.iter().filter(|k| k.phase == subset).count())
    }

    fn coefficients_for(&self, task: Task, phase: Phase) -> Result<TdcfCoefficients, ScoringError> {
        self.coefficients
            .get(task, phase)
            .ok_or(ScoringError::NoCoefficients { task, phase })
    }

    /// Strictly aligns `scores` to the `subset` trials of `task` and computes
    /// the pooled metrics with the `coefficient_phase` set. DF is scored by
    /// EER only.
    pub fn score(
        &self,
        task: Task,
        subset: Phase,
        coefficient_phase: Phase,
        scores: &ScoreSet,
    ) -> Result<SubmissionResults, ScoringError> {
        let keys = self.keys.get(&task).map(Vec::as_slice).unwrap_or(&[]);
        let aligned = align(scores, keys, Some(subset), AlignMode::Strict)?.scores;
        let (bona, spoof) = (aligned.bona_scores(), aligned.spoof_scores());
        let eer = eer(&bona, &spoof)?.eer;
        let min_tdcf = if task.uses_tdcf() {
            let c = self.coefficients_for(task, coefficient_phase)?;
            Some(normalize_tdcf(min_tdcf(&bona, &spoof, &c)?.value, &c)?)
        } else {
            None
        };
        Ok(SubmissionResults {
            min_tdcf,
            eer: 100.0 * eer,
            n_trials: aligned.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use spoofeval_core::trialdata::{parse_key_file, parse_score_file};

    fn ctx() -> EvalContext {
        let keys = parse_key_file(
            b"p1 LA LA-C1 - bonafide progress\n\
              p2 LA LA-C1 A07 spoof progress\n\
              e1 LA LA-C2 - bonafide evaluation\n\
              e2 LA LA-C2 A08 spoof evaluation\n\
              e3 LA LA-C2 A08 spoof evaluation\n\
              h1 LA LA-C3 A09 spoof hidden\n",
        )
        .unwrap();
        let mut c = EvalContext::new(CoefficientSets::default());
        c.add_keys(keys).unwrap();
        c
    }

    #[test]
    fn phases_score_disjoint_subsets() {
        let c = ctx();
        // e3 is misranked; it only matters in the evaluation subset.
        let s = parse_score_file(b"p1 1\np2 0\ne1 1\ne2 0\ne3 2\nh1 0\n").unwrap();
        let prog = c
            .score(Task::La, Phase::Progress, Phase::Progress, &s)
            .unwrap();
        assert_eq!(prog.n_trials, 2);
        assert_eq!(prog.min_tdcf, Some(0.1588));
        assert_eq!(prog.eer, 0.0);
        let eval = c
            .score(Task::La, Phase::Evaluation, Phase::Evaluation, &s)
            .unwrap();
        assert_eq!(eval.n_trials, 3);
        assert!(eval.eer > 0.0);
    }

    #[test]
    fn strict_alignment() {
        let c = ctx();
        let missing = parse_score_file(b"p1 1\n").unwrap();
        assert!(matches!(
            c.score(Task::La, Phase::Progress, Phase::Progress, &missing),
            Err(ScoringError::Alignment(TrialDataError::MissingTrial(_)))
        ));
        let extra = parse_score_file(b"p1 1\np2 0\nzz 3\n").unwrap();
        assert!(matches!(
            c.score(Task::La, Phase::Progress, Phase::Progress, &extra),
            Err(ScoringError::Alignment(TrialDataError::ExtraTrial(_)))
        ));
    }

    #[test]
    fn duplicate_trials_across_files() {
        let mut c = ctx();
        let again = parse_key_file(b"p1 LA LA-C1 - bonafide progress\n").unwrap();
        assert!(matches!(
            c.add_keys(again),
            Err(KeyStoreError::Duplicate(_))
        ));
    }
}
