use rayon::prelude::*;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::framing::{window, WindowKind};
use super::{AudioSignal, FeatureError};

/// Constant-Q front-end settings shared by the transform and the cepstra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CqccConfig {
    pub bins_per_octave: usize,
    pub n_octaves: usize,
    pub resampling_period: usize,
    pub fmax: f64,
    /// Static cepstra excluding c0.
    pub n_ceps: usize,
    pub hop_ms: f64,
    pub delta_width: usize,
}

impl Default for CqccConfig {
    fn default() -> Self {
        Self {
            bins_per_octave: 12,
            n_octaves: 9,
            resampling_period: 16,
            fmax: 4000.0,
            n_ceps: 19,
            hop_ms: 10.0,
            delta_width: 2,
        }
    }
}

impl CqccConfig {
    pub fn with_fmax(fmax: f64) -> Self {
        Self {
            fmax,
            ..Self::default()
        }
    }

    pub fn fmin(&self) -> f64 {
        self.fmax / 2f64.powi(self.n_octaves as i32)
    }

    pub fn n_bins(&self) -> usize {
        self.bins_per_octave * self.n_octaves
    }

    /// Constant quality factor `1 / (2^(1/B) - 1)`.
    pub fn q(&self) -> f64 {
        1.0 / (2f64.powf(1.0 / self.bins_per_octave as f64) - 1.0)
    }

    /// Centre frequency of bin `k`: `fmin * 2^(k/B)`.
    pub fn bin_frequency(&self, k: usize) -> f64 {
        self.fmin() * 2f64.powf(k as f64 / self.bins_per_octave as f64)
    }

    pub fn dim(&self) -> usize {
        3 * (self.n_ceps + 1)
    }

    pub(crate) fn hop_samples(&self, sample_rate: u32) -> usize {
        (self.hop_ms * f64::from(sample_rate) / 1000.0).round() as usize
    }

    pub(crate) fn validate(&self, sample_rate: u32) -> Result<(), FeatureError> {
        let bad = |m: String| Err(FeatureError::BadConfig(m));
        let nyquist = f64::from(sample_rate) / 2.0;
        if self.bins_per_octave == 0 || self.n_octaves == 0 || self.resampling_period == 0 {
            return bad("bins per octave, octaves and resampling period must be positive".into());
        }
        if !(self.fmax > 0.0 && self.fmax <= nyquist) {
            return bad(format!("fmax {} must lie in (0, {nyquist}]", self.fmax));
        }
        if self.hop_samples(sample_rate) == 0 {
            return bad("hop must be at least one sample".into());
        }
        if self.n_ceps + 1 > super::cqcc::uniform_bin_count(self) {
            return bad("more cepstra than resampled bins".into());
        }
        Ok(())
    }
}

/// Complex constant-Q coefficients, frames x bins.
#[derive(Debug, Clone, PartialEq)]
pub struct CqtMatrix {
    n_frames: usize,
    n_bins: usize,
    values: Vec<Complex<f64>>,
    frequencies: Vec<f64>,
}

impl CqtMatrix {
    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn frame(&self, t: usize) -> &[Complex<f64>] {
        &self.values[t * self.n_bins..(t + 1) * self.n_bins]
    }

    pub fn get(&self, t: usize, k: usize) -> Complex<f64> {
        self.values[t * self.n_bins + k]
    }

    pub fn values(&self) -> &[Complex<f64>] {
        &self.values
    }
}

/// One per-bin analysis kernel: Hann-weighted complex exponential,
/// normalised by the window sum so a unit sinusoid at the bin centre
/// projects to magnitude 1/2.
#[derive(Debug, Clone)]
struct Kernel {
    half: usize,
    taps: Vec<Complex<f64>>,
}

impl Kernel {
    fn new(freq: f64, q: f64, sample_rate: f64) -> Self {
        let len = (q * sample_rate / freq).ceil() as usize;
        let w = window(WindowKind::Hann, len);
        let norm: f64 = w.iter().sum();
        let half = len / 2;
        let taps = w
            .iter()
            .enumerate()
            .map(|(j, wj)| {
                let n = j as f64 - half as f64;
                let phase = -2.0 * std::f64::consts::PI * freq * n / sample_rate;
                Complex::from_polar(wj / norm, phase)
            })
            .collect();
        Self { half, taps }
    }

    /// Projection of `x` onto the kernel centred at sample `centre`;
    /// samples outside the signal count as zero.
    fn project(&self, x: &[f64], centre: usize) -> Complex<f64> {
        let first = centre as isize - self.half as isize;
        let j0 = (-first).max(0) as usize;
        let j1 = ((x.len() as isize - first).max(0) as usize).min(self.taps.len());
        if j0 >= j1 {
            return Complex::new(0.0, 0.0);
        }
        let s0 = (first + j0 as isize) as usize;
        self.taps[j0..j1]
            .iter()
            .zip(&x[s0..s0 + (j1 - j0)])
            .fold(Complex::new(0.0, 0.0), |acc, (k, v)| acc + k * v)
    }
}

/// Precomputed kernels for one configuration and sample rate.
#[derive(Debug, Clone)]
pub(crate) struct CqtKernels {
    sample_rate: u32,
    hop: usize,
    frequencies: Vec<f64>,
    kernels: Vec<Kernel>,
}

impl CqtKernels {
    pub(crate) fn new(cfg: &CqccConfig, sample_rate: u32) -> Result<Self, FeatureError> {
        cfg.validate(sample_rate)?;
        let sr = f64::from(sample_rate);
        let q = cfg.q();
        let frequencies: Vec<f64> = (0..cfg.n_bins()).map(|k| cfg.bin_frequency(k)).collect();
        let kernels = frequencies.iter().map(|&f| Kernel::new(f, q, sr)).collect();
        Ok(Self {
            sample_rate,
            hop: cfg.hop_samples(sample_rate),
            frequencies,
            kernels,
        })
    }

    /// Frames are centred at `t * hop`; `T = 1 + floor((N - 1) / hop)`.
    pub(crate) fn transform(&self, signal: &AudioSignal) -> Result<CqtMatrix, FeatureError> {
        if signal.sample_rate() != self.sample_rate {
            return Err(FeatureError::BadConfig(format!(
                "transform built for {} Hz, signal is {} Hz",
                self.sample_rate,
                signal.sample_rate()
            )));
        }
        let x = signal.samples();
        if x.len() < self.hop {
            return Err(FeatureError::TooShort {
                needed: self.hop,
                got: x.len(),
            });
        }
        let n_frames = 1 + (x.len() - 1) / self.hop;
        let n_bins = self.kernels.len();
        let mut values = vec![Complex::new(0.0, 0.0); n_frames * n_bins];
        values
            .par_chunks_mut(n_bins)
            .enumerate()
            .for_each(|(t, row)| {
                for (v, k) in row.iter_mut().zip(&self.kernels) {
                    *v = k.project(x, t * self.hop);
                }
            });
        Ok(CqtMatrix {
            n_frames,
            n_bins,
            values,
            frequencies: self.frequencies.clone(),
        })
    }
}

/// Constant-Q transform with direct per-bin Hann kernels.
///
/// Kernels longer than the signal are applied to the zero-padded signal,
/// so low bins of short inputs see only the available samples. Only
/// inputs shorter than one hop are rejected.
pub fn cqt(signal: &AudioSignal, cfg: &CqccConfig) -> Result<CqtMatrix, FeatureError> {
    CqtKernels::new(cfg, signal.sample_rate())?.transform(signal)
}
