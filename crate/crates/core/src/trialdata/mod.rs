//! Trial lists, answer keys and score files.
//!
//! Score files carry one `<trial_id> <score>` pair per line, key files one
//! `<trial_id> <task> <condition> <attack|-> <bonafide|spoof> <phase>`
//! record per line. Higher scores always mean "more bonafide".

mod align;
mod key_file;
mod score_file;
mod taxonomy;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use align::{align, AlignMode, Aligned};
pub use key_file::{parse_key_file, parse_key_file_with, write_key_file};
pub use score_file::{parse_score_file, write_score_file};
pub use taxonomy::Taxonomy;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum TrialDataError {
    #[error("input is not valid UTF-8")]
    NotUtf8,
    #[error("line {0}: wrong number of fields")]
    MalformedLine(usize),
    #[error("line {0}: score is not a finite number")]
    NonFiniteScore(usize),
    #[error("duplicate trial id {0}")]
    DuplicateTrial(String),
    #[error("invalid trial id {0:?}")]
    InvalidTrialId(String),
    #[error("line {line}: unknown task {value:?}")]
    UnknownTask { line: usize, value: String },
    #[error("line {line}: condition {value:?} is not part of the {task} taxonomy")]
    UnknownCondition {
        line: usize,
        task: Task,
        value: String,
    },
    #[error("line {line}: unknown label {value:?}")]
    UnknownLabel { line: usize, value: String },
    #[error("line {line}: unknown phase {value:?}")]
    UnknownPhase { line: usize, value: String },
    #[error("{} keyed trial(s) have no score, first: {}", .0.len(), .0.first().map(String::as_str).unwrap_or(""))]
    MissingTrial(Vec<String>),
    #[error("{} scored trial(s) have no key, first: {}", .0.len(), .0.first().map(String::as_str).unwrap_or(""))]
    ExtraTrial(Vec<String>),
}

/// Non-empty, whitespace-free trial token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TrialId(String);

impl TrialId {
    pub fn new(value: impl Into<String>) -> Result<Self, TrialDataError> {
        let value = value.into();
        if value.is_empty() || value.chars().any(char::is_whitespace) {
            return Err(TrialDataError::InvalidTrialId(value));
        }
        Ok(Self(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for TrialId {
    type Error = TrialDataError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<TrialId> for String {
    fn from(id: TrialId) -> Self {
        id.0
    }
}

impl fmt::Display for TrialId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Bonafide,
    Spoof,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Bonafide => "bonafide",
            Label::Spoof => "spoof",
        }
    }
}

impl FromStr for Label {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bonafide" => Ok(Label::Bonafide),
            "spoof" => Ok(Label::Spoof),
            _ => Err(()),
        }
    }
}

/// Challenge task: logical access, physical access or deepfake.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "LA")]
    La,
    #[serde(rename = "PA")]
    Pa,
    #[serde(rename = "DF")]
    Df,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::La, Task::Pa, Task::Df];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::La => "LA",
            Task::Pa => "PA",
            Task::Df => "DF",
        }
    }

    /// Whether the task is ranked by min t-DCF (LA, PA) rather than EER (DF).
    pub fn uses_tdcf(self) -> bool {
        !matches!(self, Task::Df)
    }

    /// Upper analysis frequency of the classical GMM baselines.
    pub fn baseline_fmax(self) -> f64 {
        match self {
            Task::La | Task::Df => 4000.0,
            Task::Pa => 8000.0,
        }
    }
}

impl FromStr for Task {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "LA" | "la" => Ok(Task::La),
            "PA" | "pa" => Ok(Task::Pa),
            "DF" | "df" => Ok(Task::Df),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Trial subset a key belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Progress,
    Evaluation,
    Hidden,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Progress => "progress",
            Phase::Evaluation => "evaluation",
            Phase::Hidden => "hidden",
        }
    }
}

impl FromStr for Phase {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "progress" => Ok(Phase::Progress),
            "evaluation" => Ok(Phase::Evaluation),
            "hidden" => Ok(Phase::Hidden),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row of an answer key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialKey {
    pub trial: TrialId,
    pub task: Task,
    pub condition: String,
    pub attack: Option<String>,
    pub label: Label,
    pub phase: Phase,
}

/// Scores of one system, in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreSet {
    entries: Vec<(TrialId, f64)>,
}

impl ScoreSet {
    /// Builds a score set, enforcing unique ids and finite scores.
    pub fn new(entries: Vec<(TrialId, f64)>) -> Result<Self, TrialDataError> {
        let mut seen = std::collections::HashSet::with_capacity(entries.len());
        for (i, (id, score)) in entries.iter().enumerate() {
            if !score.is_finite() {
                return Err(TrialDataError::NonFiniteScore(i + 1));
            }
            if !seen.insert(id.as_str()) {
                return Err(TrialDataError::DuplicateTrial(id.to_string()));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(TrialId, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A scored trial joined with its key.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTrial {
    pub trial: TrialId,
    pub score: f64,
    pub label: Label,
    pub condition: String,
    pub phase: Phase,
}

/// Scores aligned to their keys; the input to every metric.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledScores {
    records: Vec<LabeledTrial>,
}

impl LabeledScores {
    pub fn from_records(records: Vec<LabeledTrial>) -> Self {
        Self { records }
    }

    /// Builds an unconditioned set from two score lists. Trial ids are
    /// synthesized (`b<i>`, `s<i>`) and the condition is `pooled`.
    pub fn from_classes(bona: &[f64], spoof: &[f64]) -> Self {
        let mk = |prefix: &str, i: usize, score: f64, label| LabeledTrial {
            trial: TrialId(format!("{prefix}{i}")),
            score,
            label,
            condition: "pooled".to_string(),
            phase: Phase::Evaluation,
        };
        let records = bona
            .iter()
            .enumerate()
            .map(|(i, &s)| mk("b", i, s, Label::Bonafide))
            .chain(
                spoof
                    .iter()
                    .enumerate()
                    .map(|(i, &s)| mk("s", i, s, Label::Spoof)),
            )
            .collect();
        Self { records }
    }

    pub fn records(&self) -> &[LabeledTrial] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn scores_of(&self, label: Label) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.label == label)
            .map(|r| r.score)
            .collect()
    }

    pub fn bona_scores(&self) -> Vec<f64> {
        self.scores_of(Label::Bonafide)
    }

    pub fn spoof_scores(&self) -> Vec<f64> {
        self.scores_of(Label::Spoof)
    }

    pub fn n_bona(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.label == Label::Bonafide)
            .count()
    }

    pub fn n_spoof(&self) -> usize {
        self.len() - self.n_bona()
    }

    /// Splits the set by condition tag. Record order is preserved within
    /// each partition.
    pub fn partition_by_condition(&self) -> BTreeMap<String, LabeledScores> {
        let mut parts: BTreeMap<String, LabeledScores> = BTreeMap::new();
        for r in &self.records {
            parts
                .entry(r.condition.clone())
                .or_default()
                .records
                .push(r.clone());
        }
        parts
    }
}
