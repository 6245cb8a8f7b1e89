//! Diagonal-covariance Gaussian mixture models, EM training and
//! two-class log-likelihood-ratio scoring.

mod baseline;
mod model_file;
mod train;

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::features::{FeatureError, FeatureMatrix};

pub use baseline::{
    baseline_pipeline, score_trials, train_baseline, BaselineModels, FeatureExtractor, FrontEnd,
};
pub use model_file::{read_model, write_model, MODEL_MAGIC};
pub use train::{
    em_train, em_train_with_report, InitMethod, IterationRecord, TrainConfig, TrainReport,
};

#[derive(Debug, thiserror::Error)]
pub enum GmmError {
    #[error("need at least {needed} frames, got {got}")]
    TooFewFrames { needed: usize, got: usize },
    #[error("dimension mismatch: model has {expected}, frames have {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("invalid model: {0}")]
    BadModel(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Frames are processed in this many fixed chunks, merged in order, so
/// sums do not depend on the thread count.
pub(crate) const REDUCTION_CHUNKS: usize = 64;

pub(crate) fn chunk_len(n: usize) -> usize {
    n.div_ceil(REDUCTION_CHUNKS).max(1)
}

/// Mixture of `K` diagonal Gaussians in `D` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmModel {
    dim: usize,
    weights: Vec<f64>,
    means: Vec<f64>,
    variances: Vec<f64>,
    /// `log w_k - (D log 2pi + sum_d log var_kd) / 2`
    log_consts: Vec<f64>,
    inv_variances: Vec<f64>,
}

impl GmmModel {
    /// `means` and `variances` are `K x D` row-major.
    pub fn new(
        weights: Vec<f64>,
        means: Vec<f64>,
        variances: Vec<f64>,
        dim: usize,
    ) -> Result<Self, GmmError> {
        let k = weights.len();
        if k == 0 || dim == 0 {
            return Err(GmmError::BadModel("empty model".into()));
        }
        if means.len() != k * dim || variances.len() != k * dim {
            return Err(GmmError::BadModel(format!(
                "expected {k} x {dim} means and variances"
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(GmmError::BadModel("weights must be positive".into()));
        }
        if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
            return Err(GmmError::BadModel("weights must sum to 1".into()));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(GmmError::BadModel("means must be finite".into()));
        }
        if variances.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(GmmError::BadModel("variances must be positive".into()));
        }
        Ok(Self::from_parts(weights, means, variances, dim))
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn from_parts(
        weights: Vec<f64>,
        means: Vec<f64>,
        variances: Vec<f64>,
        dim: usize,
    ) -> Self {
        let base = dim as f64 * (2.0 * PI).ln();
        let log_consts = weights
            .iter()
            .zip(variances.chunks_exact(dim))
            .map(|(w, v)| w.ln() - 0.5 * (base + v.iter().map(|x| x.ln()).sum::<f64>()))
            .collect();
        let inv_variances = variances.iter().map(|v| 1.0 / v).collect();
        Self {
            dim,
            weights,
            means,
            variances,
            log_consts,
            inv_variances,
        }
    }

    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn mean(&self, k: usize) -> &[f64] {
        &self.means[k * self.dim..(k + 1) * self.dim]
    }

    pub fn variance(&self, k: usize) -> &[f64] {
        &self.variances[k * self.dim..(k + 1) * self.dim]
    }

    /// Per-component joint log densities `log w_k + log N(x; mu_k, var_k)`.
    pub(crate) fn component_log_densities(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim;
        for (k, o) in out.iter_mut().enumerate() {
            let mu = &self.means[k * d..(k + 1) * d];
            let iv = &self.inv_variances[k * d..(k + 1) * d];
            let q: f64 = x
                .iter()
                .zip(mu)
                .zip(iv)
                .map(|((xi, m), i)| (xi - m) * (xi - m) * i)
                .sum();
            *o = self.log_consts[k] - 0.5 * q;
        }
    }

    /// `log sum_k w_k N(x; mu_k, var_k)` for one frame.
    pub fn frame_log_likelihood(&self, x: &[f64]) -> f64 {
        let mut buf = vec![0.0; self.n_components()];
        self.component_log_densities(x, &mut buf);
        log_sum_exp(&buf)
    }

    fn check_dim(&self, frames: &FeatureMatrix) -> Result<(), GmmError> {
        if frames.dim() != self.dim {
            return Err(GmmError::DimMismatch {
                expected: self.dim,
                got: frames.dim(),
            });
        }
        Ok(())
    }

    /// Sum of frame log-likelihoods.
    pub(crate) fn total_log_likelihood(&self, frames: &FeatureMatrix) -> f64 {
        let d = self.dim;
        let per_chunk: Vec<f64> = frames
            .values()
            .par_chunks(chunk_len(frames.n_frames()) * d)
            .map(|chunk| {
                let mut buf = vec![0.0; self.n_components()];
                chunk
                    .chunks_exact(d)
                    .map(|x| {
                        self.component_log_densities(x, &mut buf);
                        log_sum_exp(&buf)
                    })
                    .sum::<f64>()
            })
            .collect();
        per_chunk.iter().sum()
    }

    /// Mean per-frame log-likelihood.
    pub fn loglik(&self, frames: &FeatureMatrix) -> Result<f64, GmmError> {
        self.check_dim(frames)?;
        if frames.n_frames() == 0 {
            return Err(GmmError::TooFewFrames { needed: 1, got: 0 });
        }
        Ok(self.total_log_likelihood(frames) / frames.n_frames() as f64)
    }
}

pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Mean per-frame log-likelihood of `frames` under `model`.
pub fn loglik(model: &GmmModel, frames: &FeatureMatrix) -> Result<f64, GmmError> {
    model.loglik(frames)
}

/// `loglik(bona) - loglik(spoof)`; higher means more bonafide.
pub fn llr_score(
    bona: &GmmModel,
    spoof: &GmmModel,
    frames: &FeatureMatrix,
) -> Result<f64, GmmError> {
    if bona.dim() != spoof.dim() {
        return Err(GmmError::DimMismatch {
            expected: bona.dim(),
            got: spoof.dim(),
        });
    }
    Ok(bona.loglik(frames)? - spoof.loglik(frames)?)
}
