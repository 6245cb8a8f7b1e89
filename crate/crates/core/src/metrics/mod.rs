//! Detection error trade-off analysis, EER and the tandem detection cost
//! function.
//!
//! All metrics use the accept-if-`score >= threshold` convention: a trial
//! scoring exactly at the threshold counts as accepted (bonafide).

mod asv;
mod det;
mod report;
mod tdcf;

pub use asv::{asv_operating_point, AsvOperatingPoint};
pub use det::{rate_at_or_above, rate_below, DetCurve, Eer};
pub use report::{evaluate, ConditionResult, EvalReport};
pub use tdcf::{min_tdcf, normalize_tdcf, MinTdcf, TdcfCoefficients};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("both classes need at least one score (bonafide: {n_bona}, spoof: {n_spoof})")]
    EmptyClass { n_bona: usize, n_spoof: usize },
    #[error("scores must be finite")]
    NonFiniteScore,
    #[error("invalid t-DCF coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("t-DCF normalizer c0 + min(c1, c2) is zero")]
    ZeroNormalizer,
}

/// EER of bonafide vs spoof scores.
pub fn eer(bona: &[f64], spoof: &[f64]) -> Result<Eer, MetricsError> {
    Ok(DetCurve::new(bona, spoof)?.eer())
}

/// DET curve of a labeled score set.
pub fn det_points(labeled: &crate::trialdata::LabeledScores) -> Result<DetCurve, MetricsError> {
    DetCurve::new(&labeled.bona_scores(), &labeled.spoof_scores())
}
