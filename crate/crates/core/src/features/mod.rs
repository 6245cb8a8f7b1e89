//! Acoustic front-ends for the GMM baselines and telephony channel
//! simulation.
//!
//! Both front-ends emit 19 static cepstra plus an energy term (c0), with
//! delta and delta-delta coefficients appended: 60 dimensions per frame.

mod audio_io;
mod companding;
mod cqcc;
mod cqt;
mod dct;
mod deltas;
mod featfile;
mod framing;
mod lfcc;
mod spline;

pub use audio_io::{read_raw_pcm16, read_wav, write_wav};
pub use companding::{
    alaw_decode, alaw_encode, alaw_roundtrip, mulaw_decode, mulaw_encode, mulaw_roundtrip,
    narrowband_lowpass, NARROWBAND_CUTOFF_HZ, NARROWBAND_TAPS,
};
pub use cqcc::{cqcc, uniform_bin_count, CqccExtractor};
pub use cqt::{cqt, CqccConfig, CqtMatrix};
pub use dct::dct2_ortho;
pub use deltas::{append_dynamics, deltas};
pub use featfile::{read_features, write_features, FEATURE_MAGIC};
pub use framing::{frame, frame_count, window, WindowKind};
pub use lfcc::{lfcc, LfccConfig, LfccExtractor};

/// Floor applied to powers before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("signal too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("sample {index} out of range [-1, 1]: {value}")]
    ClippedInput { index: usize, value: f64 },
    #[error("invalid audio: {0}")]
    BadAudio(String),
    #[error("invalid feature file: {0}")]
    BadFeatureFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Mono audio with samples nominally in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioSignal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, FeatureError> {
        if samples.is_empty() {
            return Err(FeatureError::BadAudio("empty signal".into()));
        }
        if sample_rate == 0 {
            return Err(FeatureError::BadAudio(
                "sample rate must be positive".into(),
            ));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(FeatureError::BadAudio(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    /// Number of samples spanned by `ms` milliseconds, rounded.
    pub fn ms_to_samples(&self, ms: f64) -> usize {
        (ms * f64::from(self.sample_rate) / 1000.0).round() as usize
    }
}

/// Frames x dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_frames: usize,
    dim: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(n_frames: usize, dim: usize, values: Vec<f64>) -> Result<Self, FeatureError> {
        if values.len() != n_frames * dim {
            return Err(FeatureError::BadConfig(format!(
                "{} values do not fill {n_frames} x {dim}",
                values.len()
            )));
        }
        Ok(Self {
            n_frames,
            dim,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, FeatureError> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(FeatureError::BadConfig("ragged rows".into()));
        }
        Self::new(rows.len(), dim, rows.concat())
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        (0..self.n_frames).map(move |t| self.row(t))
    }

    /// Concatenates columns of matrices with equal frame counts.
    pub fn hstack(parts: &[&FeatureMatrix]) -> Result<Self, FeatureError> {
        let n = parts.first().map_or(0, |m| m.n_frames);
        if parts.iter().any(|m| m.n_frames != n) {
            return Err(FeatureError::BadConfig("frame counts differ".into()));
        }
        let dim: usize = parts.iter().map(|m| m.dim).sum();
        let mut values = Vec::with_capacity(n * dim);
        for t in 0..n {
            for m in parts {
                values.extend_from_slice(m.row(t));
            }
        }
        Self::new(n, dim, values)
    }

    /// Stacks frames of several matrices with the same dimension.
    pub fn vstack<'a>(
        parts: impl IntoIterator<Item = &'a FeatureMatrix>,
    ) -> Result<Self, FeatureError> {
        let mut dim = None;
        let mut n = 0;
        let mut values = Vec::new();
        for m in parts {
            if *dim.get_or_insert(m.dim) != m.dim {
                return Err(FeatureError::BadConfig("feature dimensions differ".into()));
            }
            n += m.n_frames;
            values.extend_from_slice(&m.values);
        }
        Self::new(n, dim.unwrap_or(0), values)
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}
