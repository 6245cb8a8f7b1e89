use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::tdcf::min_tdcf_on;
use super::{normalize_tdcf, DetCurve, MetricsError, TdcfCoefficients};
use crate::trialdata::LabeledScores;

/// Metrics of one condition. `skipped` is set when a class is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition: String,
    pub n_bona: usize,
    pub n_spoof: usize,
    /// Normalized minimum t-DCF.
    pub min_tdcf: Option<f64>,
    /// EER as a fraction in [0, 1].
    pub eer: Option<f64>,
    pub skipped: Option<String>,
}

/// Pooled and per-condition results. Serialized EERs are in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Normalized minimum t-DCF; absent when no coefficients were given.
    pub pooled_min_tdcf: Option<f64>,
    pub pooled_eer: f64,
    pub n_bona: usize,
    pub n_spoof: usize,
    pub per_condition: Vec<ConditionResult>,
}

struct Scored {
    min_tdcf: Option<f64>,
    eer: f64,
}

fn score(
    labeled: &LabeledScores,
    coeffs: Option<&TdcfCoefficients>,
) -> Result<Scored, MetricsError> {
    let det = DetCurve::new(&labeled.bona_scores(), &labeled.spoof_scores())?;
    let min_tdcf = coeffs
        .map(|c| normalize_tdcf(min_tdcf_on(&det, c).value, c))
        .transpose()?;
    Ok(Scored {
        min_tdcf,
        eer: det.eer().eer,
    })
}

/// Pooled metrics over every trial plus one entry per condition tag.
/// min t-DCF is only computed when coefficients are supplied.
pub fn evaluate(
    labeled: &LabeledScores,
    coeffs: Option<&TdcfCoefficients>,
) -> Result<EvalReport, MetricsError> {
    if let Some(c) = coeffs {
        c.validate()?;
    }
    let pooled = score(labeled, coeffs)?;
    let per_condition = labeled
        .partition_by_condition()
        .into_iter()
        .map(|(condition, part)| {
            let (n_bona, n_spoof) = (part.n_bona(), part.n_spoof());
            match score(&part, coeffs) {
                Ok(s) => Ok(ConditionResult {
                    condition,
                    n_bona,
                    n_spoof,
                    min_tdcf: s.min_tdcf,
                    eer: Some(s.eer),
                    skipped: None,
                }),
                Err(MetricsError::EmptyClass { .. }) => Ok(ConditionResult {
                    condition,
                    n_bona,
                    n_spoof,
                    min_tdcf: None,
                    eer: None,
                    skipped: Some(if n_bona == 0 {
                        "no bonafide trials".into()
                    } else {
                        "no spoof trials".into()
                    }),
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(EvalReport {
        pooled_min_tdcf: pooled.min_tdcf,
        pooled_eer: pooled.eer,
        n_bona: labeled.n_bona(),
        n_spoof: labeled.n_spoof(),
        per_condition,
    })
}

fn fmt_tdcf(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

fn fmt_eer(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{:.2}", v * 100.0))
}

#[derive(Serialize, Deserialize)]
struct StructuredCondition {
    condition: String,
    n_bona: usize,
    n_spoof: usize,
    min_tdcf: Option<f64>,
    eer: Option<f64>,
    skipped: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct StructuredReport {
    pooled_min_tdcf: Option<f64>,
    pooled_eer: f64,
    n_bona: usize,
    n_spoof: usize,
    conditions: Vec<StructuredCondition>,
}

impl EvalReport {
    /// Aligned table, t-DCF to 4 decimals and EER in percent to 2.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let width = self
            .per_condition
            .iter()
            .map(|c| c.condition.len())
            .max()
            .unwrap_or(0)
            .max("condition".len());
        writeln!(
            out,
            "{:<width$}  {:>8}  {:>8}  {:>8}  {:>7}",
            "condition", "n_bona", "n_spoof", "min_tdcf", "eer(%)"
        )
        .unwrap();
        let mut row =
            |name: &str, nb: usize, ns: usize, t: Option<f64>, e: Option<f64>, note: &str| {
                writeln!(
                    out,
                    "{name:<width$}  {nb:>8}  {ns:>8}  {:>8}  {:>7}{note}",
                    fmt_tdcf(t),
                    fmt_eer(e)
                )
                .unwrap();
            };
        row(
            "pooled",
            self.n_bona,
            self.n_spoof,
            self.pooled_min_tdcf,
            Some(self.pooled_eer),
            "",
        );
        for c in &self.per_condition {
            let note = c
                .skipped
                .as_deref()
                .map(|r| format!("  skipped: {r}"))
                .unwrap_or_default();
            row(&c.condition, c.n_bona, c.n_spoof, c.min_tdcf, c.eer, &note);
        }
        out
    }

    /// Flat `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        writeln!(out, "pooled_min_tdcf={}", fmt_tdcf(self.pooled_min_tdcf)).unwrap();
        writeln!(out, "pooled_eer={}", fmt_eer(Some(self.pooled_eer))).unwrap();
        writeln!(out, "n_bona={}", self.n_bona).unwrap();
        writeln!(out, "n_spoof={}", self.n_spoof).unwrap();
        for c in &self.per_condition {
            let p = &c.condition;
            writeln!(out, "{p}.n_bona={}", c.n_bona).unwrap();
            writeln!(out, "{p}.n_spoof={}", c.n_spoof).unwrap();
            writeln!(out, "{p}.min_tdcf={}", fmt_tdcf(c.min_tdcf)).unwrap();
            writeln!(out, "{p}.eer={}", fmt_eer(c.eer)).unwrap();
            if let Some(r) = &c.skipped {
                writeln!(out, "{p}.skipped={r}").unwrap();
            }
        }
        out
    }

    /// Structured JSON document at full precision (EER in percent).
    pub fn to_json(&self) -> String {
        let doc = StructuredReport {
            pooled_min_tdcf: self.pooled_min_tdcf,
            pooled_eer: self.pooled_eer * 100.0,
            n_bona: self.n_bona,
            n_spoof: self.n_spoof,
            conditions: self
                .per_condition
                .iter()
                .map(|c| StructuredCondition {
                    condition: c.condition.clone(),
                    n_bona: c.n_bona,
                    n_spoof: c.n_spoof,
                    min_tdcf: c.min_tdcf,
                    eer: c.eer.map(|e| e * 100.0),
                    skipped: c.skipped.clone(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }
}
