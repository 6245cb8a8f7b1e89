//! Pairwise significance of EER differences between systems.
//!
//! Each pair of systems is compared with a two-sided z-test on the half
//! total error rate, `HTER = (Pmiss + Pfa) / 2`, treating the two systems
//! as independent:
//!
//! ```text
//! var(HTER) = [Pmiss (1 - Pmiss) / n_bona + Pfa (1 - Pfa) / n_spoof] / 4
//! Z = |HTER_a - HTER_b| / sqrt(var_a + var_b)
//! ```
//!
//! The p-values of all pairs are then corrected jointly with the
//! Holm-Bonferroni step-down procedure.

mod normal;

use std::fmt::Write as _;

use serde::Serialize;

pub use normal::{erfc, normal_cdf, two_sided_p};

use crate::metrics::{self, MetricsError};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("system {0}: rates must lie in [0, 1] and counts be positive")]
    InvalidSystem(String),
    #[error("zero variance for both systems with different HTERs ({a} vs {b})")]
    DegenerateVariance { a: String, b: String },
    #[error("need at least two systems, got {0}")]
    TooFewSystems(usize),
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// A system's error rates at its EER operating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemResult {
    pub system_id: String,
    pub eer: f64,
    pub pmiss: f64,
    pub pfa: f64,
    pub n_bona: usize,
    pub n_spoof: usize,
}

impl SystemResult {
    /// Rates at the interpolated EER point, where Pmiss = Pfa = EER.
    pub fn from_scores(
        system_id: impl Into<String>,
        bona: &[f64],
        spoof: &[f64],
    ) -> Result<Self, StatsError> {
        let eer = metrics::eer(bona, spoof)?.eer;
        Ok(Self {
            system_id: system_id.into(),
            eer,
            pmiss: eer,
            pfa: eer,
            n_bona: bona.len(),
            n_spoof: spoof.len(),
        })
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        let rate_ok = |r: f64| (0.0..=1.0).contains(&r);
        if rate_ok(self.eer)
            && rate_ok(self.pmiss)
            && rate_ok(self.pfa)
            && self.n_bona > 0
            && self.n_spoof > 0
        {
            Ok(())
        } else {
            Err(StatsError::InvalidSystem(self.system_id.clone()))
        }
    }

    pub fn hter(&self) -> f64 {
        0.5 * (self.pmiss + self.pfa)
    }

    pub fn hter_variance(&self) -> f64 {
        let bona = self.pmiss * (1.0 - self.pmiss) / self.n_bona as f64;
        let spoof = self.pfa * (1.0 - self.pfa) / self.n_spoof as f64;
        0.25 * (bona + spoof)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZTest {
    pub z: f64,
    pub pvalue: f64,
}

/// Two-sided HTER z-test between two independent systems.
pub fn hter_z_test(a: &SystemResult, b: &SystemResult) -> Result<ZTest, StatsError> {
    a.validate()?;
    b.validate()?;
    let diff = (a.hter() - b.hter()).abs();
    if diff == 0.0 {
        return Ok(ZTest {
            z: 0.0,
            pvalue: 1.0,
        });
    }
    let var = a.hter_variance() + b.hter_variance();
    if var == 0.0 {
        return Err(StatsError::DegenerateVariance {
            a: a.system_id.clone(),
            b: b.system_id.clone(),
        });
    }
    let z = diff / var.sqrt();
    Ok(ZTest {
        z,
        pvalue: two_sided_p(z),
    })
}

/// Holm-Bonferroni step-down: with p-values sorted ascending, reject the
/// k-th smallest (1-based) while `p < alpha / (m - k + 1)` and stop at
/// the first failure. Flags are returned in input order.
pub fn holm_bonferroni(pvalues: &[f64], alpha: f64) -> Vec<bool> {
    let m = pvalues.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| pvalues[i].total_cmp(&pvalues[j]));
    let mut reject = vec![false; m];
    for (k, &i) in order.iter().enumerate() {
        if pvalues[i] < alpha / (m - k) as f64 {
            reject[i] = true;
        } else {
            break;
        }
    }
    reject
}

/// Symmetric pairwise significance matrix over a set of systems.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceMatrix {
    pub system_ids: Vec<String>,
    pub significant: Vec<Vec<bool>>,
    pub pvalues: Vec<Vec<f64>>,
    pub alpha: f64,
    /// Pairs whose test was degenerate (both variances zero, HTERs
    /// differ); their p-value is 0 by convention.
    pub degenerate: Vec<(usize, usize)>,
}

pub const DEFAULT_ALPHA: f64 = 0.05;

pub fn significance_matrix(
    systems: &[SystemResult],
    alpha: f64,
) -> Result<SignificanceMatrix, StatsError> {
    if systems.len() < 2 {
        return Err(StatsError::TooFewSystems(systems.len()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidAlpha(alpha));
    }
    let n = systems.len();
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    let mut flat_p = Vec::with_capacity(pairs.capacity());
    let mut degenerate = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = match hter_z_test(&systems[i], &systems[j]) {
                Ok(t) => t.pvalue,
                Err(StatsError::DegenerateVariance { .. }) => {
                    degenerate.push((i, j));
                    0.0
                }
                Err(e) => return Err(e),
            };
            pairs.push((i, j));
            flat_p.push(p);
        }
    }
    let reject = holm_bonferroni(&flat_p, alpha);

    let mut significant = vec![vec![false; n]; n];
    let mut pvalues = vec![vec![1.0; n]; n];
    for ((&(i, j), &p), &r) in pairs.iter().zip(&flat_p).zip(&reject) {
        pvalues[i][j] = p;
        pvalues[j][i] = p;
        significant[i][j] = r;
        significant[j][i] = r;
    }
    Ok(SignificanceMatrix {
        system_ids: systems.iter().map(|s| s.system_id.clone()).collect(),
        significant,
        pvalues,
        alpha,
        degenerate,
    })
}

impl SignificanceMatrix {
    /// Grid with `■` for significant pairs and `·` otherwise.
    pub fn to_text(&self) -> String {
        let width = self
            .system_ids
            .iter()
            .map(|s| s.chars().count())
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        write!(out, "{:width$}", "").unwrap();
        for id in &self.system_ids {
            write!(out, " {id}").unwrap();
        }
        out.push('\n');
        for (i, id) in self.system_ids.iter().enumerate() {
            write!(out, "{id:<width$}").unwrap();
            for (j, col) in self.system_ids.iter().enumerate() {
                let cell = if self.significant[i][j] { '■' } else { '·' };
                let w = col.chars().count();
                write!(out, " {cell:^w$}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// `sys_a,sys_b,p,significant` rows for every unordered pair.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sys_a,sys_b,p,significant\n");
        let n = self.system_ids.len();
        for i in 0..n {
            for j in i + 1..n {
                writeln!(
                    out,
                    "{},{},{},{}",
                    self.system_ids[i],
                    self.system_ids[j],
                    self.pvalues[i][j],
                    self.significant[i][j]
                )
                .unwrap();
            }
        }
        out
    }
}
