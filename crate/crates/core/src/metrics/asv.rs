use serde::Serialize;

use super::det::{rate_at_or_above, rate_below};
use super::{DetCurve, MetricsError};

/// ASV error rates at its target/non-target EER threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsvOperatingPoint {
    pub threshold: f64,
    pub pmiss_asv: f64,
    pub pfa_asv: f64,
    /// `None` when no spoofed ASV scores were supplied.
    pub pfa_spoof_asv: Option<f64>,
    pub eer_tar_non: f64,
}

/// Places the ASV threshold at the target vs non-target EER and measures
/// the empirical rates of all three trial populations there.
pub fn asv_operating_point(
    tar: &[f64],
    non: &[f64],
    spoof: &[f64],
) -> Result<AsvOperatingPoint, MetricsError> {
    let eer = DetCurve::new(tar, non)?.eer();
    if spoof.iter().any(|s| !s.is_finite()) {
        return Err(MetricsError::NonFiniteScore);
    }
    let threshold = eer.threshold;
    Ok(AsvOperatingPoint {
        threshold,
        pmiss_asv: rate_below(tar, threshold),
        pfa_asv: rate_at_or_above(non, threshold),
        pfa_spoof_asv: (!spoof.is_empty()).then(|| rate_at_or_above(spoof, threshold)),
        eer_tar_non: eer.eer,
    })
}
