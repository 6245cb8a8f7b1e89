use serde::{Deserialize, Serialize};

use super::{DetCurve, MetricsError};
use crate::trialdata::{Phase, Task};

/// Cost weights of the simplified tandem detection cost function
/// `min_tau { c0 + c1 * Pmiss(tau) + c2 * Pfa(tau) }`.
///
/// `c0` is the ASV floor: the cost left over with an error-free
/// countermeasure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdcfCoefficients {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<Phase>,
}

impl TdcfCoefficients {
    pub const LA_PROGRESS: Self = Self::builtin(0.1588, 2.1007, 0.8412, Task::La, Phase::Progress);
    pub const LA_EVALUATION: Self =
        Self::builtin(0.1847, 2.0173, 0.8153, Task::La, Phase::Evaluation);
    pub const PA_PROGRESS: Self = Self::builtin(0.1363, 1.6345, 0.8637, Task::Pa, Phase::Progress);
    pub const PA_EVALUATION: Self =
        Self::builtin(0.1291, 1.6800, 0.8709, Task::Pa, Phase::Evaluation);

    pub const DEFAULTS: [Self; 4] = [
        Self::LA_PROGRESS,
        Self::LA_EVALUATION,
        Self::PA_PROGRESS,
        Self::PA_EVALUATION,
    ];

    const fn builtin(c0: f64, c1: f64, c2: f64, task: Task, phase: Phase) -> Self {
        Self {
            c0,
            c1,
            c2,
            task: Some(task),
            phase: Some(phase),
        }
    }

    /// Custom coefficients, not tied to a task or phase.
    pub fn new(c0: f64, c1: f64, c2: f64) -> Result<Self, MetricsError> {
        let c = Self {
            c0,
            c1,
            c2,
            task: None,
            phase: None,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        let all = [self.c0, self.c1, self.c2];
        if all.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(MetricsError::InvalidCoefficients(
                "coefficients must be finite and non-negative".into(),
            ));
        }
        if all.iter().all(|&c| c == 0.0) {
            return Err(MetricsError::InvalidCoefficients(
                "coefficients must not all be zero".into(),
            ));
        }
        Ok(())
    }

    /// Built-in set for a task and phase. DF has no t-DCF, and hidden
    /// trials have no published coefficients.
    pub fn default_for(task: Task, phase: Phase) -> Option<Self> {
        Self::DEFAULTS
            .into_iter()
            .find(|c| c.task == Some(task) && c.phase == Some(phase))
    }

    /// Cost of a countermeasure that accepts or rejects everything,
    /// whichever is cheaper.
    pub fn normalizer(&self) -> f64 {
        self.c0 + self.c1.min(self.c2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinTdcf {
    pub value: f64,
    pub threshold: f64,
}

/// Minimum t-DCF over all empirical operating points.
pub fn min_tdcf(
    bona: &[f64],
    spoof: &[f64],
    coeffs: &TdcfCoefficients,
) -> Result<MinTdcf, MetricsError> {
    coeffs.validate()?;
    let det = DetCurve::new(bona, spoof)?;
    Ok(min_tdcf_on(&det, coeffs))
}

pub(crate) fn min_tdcf_on(det: &DetCurve, coeffs: &TdcfCoefficients) -> MinTdcf {
    let (i, value) = det.argmin_cost(coeffs.c0, coeffs.c1, coeffs.c2);
    MinTdcf {
        value,
        threshold: det.threshold_at(i),
    }
}

/// Divides by the non-informative countermeasure cost `c0 + min(c1, c2)`.
pub fn normalize_tdcf(value: f64, coeffs: &TdcfCoefficients) -> Result<f64, MetricsError> {
    let n = coeffs.normalizer();
    if n == 0.0 {
        return Err(MetricsError::ZeroNormalizer);
    }
    Ok(value / n)
}
