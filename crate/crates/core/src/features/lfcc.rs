use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::dct::DctTable;
use super::deltas::append_dynamics;
use super::framing::{frame_count, window, WindowKind};
use super::{AudioSignal, FeatureError, FeatureMatrix, LOG_FLOOR};

/// Linear-frequency cepstral coefficient front-end.
///
/// Defaults follow the GMM baseline: 30 ms Hamming windows every 15 ms,
/// 1024-point FFT, 70 linearly spaced triangular filters up to 4 kHz,
/// 19 cepstra plus c0 and both dynamic orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LfccConfig {
    pub window_ms: f64,
    pub shift_ms: f64,
    pub fft_size: usize,
    pub n_filters: usize,
    /// Static cepstra excluding c0.
    pub n_ceps: usize,
    pub fmax: f64,
    pub window: WindowKind,
    pub delta_width: usize,
    /// Pre-emphasis coefficient; off by default.
    pub pre_emphasis: Option<f64>,
}

impl Default for LfccConfig {
    fn default() -> Self {
        Self {
            window_ms: 30.0,
            shift_ms: 15.0,
            fft_size: 1024,
            n_filters: 70,
            n_ceps: 19,
            fmax: 4000.0,
            window: WindowKind::Hamming,
            delta_width: 2,
            pre_emphasis: None,
        }
    }
}

impl LfccConfig {
    pub fn with_fmax(fmax: f64) -> Self {
        Self {
            fmax,
            ..Self::default()
        }
    }

    /// Output dimension: `3 * (n_ceps + 1)`.
    pub fn dim(&self) -> usize {
        3 * (self.n_ceps + 1)
    }

    fn validate(&self, sample_rate: u32) -> Result<(usize, usize), FeatureError> {
        let bad = |m: String| Err(FeatureError::BadConfig(m));
        let sr = f64::from(sample_rate);
        if !(self.fmax > 0.0 && self.fmax <= sr / 2.0) {
            return bad(format!("fmax {} must lie in (0, {}]", self.fmax, sr / 2.0));
        }
        if self.n_filters < self.n_ceps + 1 {
            return bad(format!(
                "{} filters cannot yield {} cepstra",
                self.n_filters,
                self.n_ceps + 1
            ));
        }
        let win = (self.window_ms * sr / 1000.0).round() as usize;
        let shift = (self.shift_ms * sr / 1000.0).round() as usize;
        if win == 0 || shift == 0 {
            return bad("window and shift must be at least one sample".into());
        }
        if win > self.fft_size {
            return bad(format!(
                "window of {win} samples exceeds FFT size {}",
                self.fft_size
            ));
        }
        Ok((win, shift))
    }
}

/// Triangular filter `m` as a run of weights starting at FFT bin `start`.
#[derive(Debug, Clone)]
struct Filter {
    start: usize,
    weights: Vec<f64>,
}

fn linear_filterbank(n_filters: usize, fft_size: usize, sr: f64, fmax: f64) -> Vec<Filter> {
    let n_bins = fft_size / 2 + 1;
    let edges: Vec<f64> = (0..n_filters + 2)
        .map(|i| fmax * i as f64 / (n_filters + 1) as f64)
        .collect();
    let bin_hz = sr / fft_size as f64;
    (0..n_filters)
        .map(|m| {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            let weight = |k: usize| {
                let f = k as f64 * bin_hz;
                if f <= lo || f >= hi {
                    0.0
                } else if f <= mid {
                    (f - lo) / (mid - lo)
                } else {
                    (hi - f) / (hi - mid)
                }
            };
            let start = (lo / bin_hz).floor() as usize;
            let end = ((hi / bin_hz).ceil() as usize + 1).min(n_bins);
            Filter {
                start,
                weights: (start..end).map(weight).collect(),
            }
        })
        .collect()
}

/// Reusable LFCC extractor for one configuration and sample rate.
pub struct LfccExtractor {
    cfg: LfccConfig,
    sample_rate: u32,
    win: usize,
    shift: usize,
    window: Vec<f64>,
    filters: Vec<Filter>,
    dct: DctTable,
    fft: Arc<dyn Fft<f64>>,
}

impl LfccExtractor {
    pub fn new(cfg: LfccConfig, sample_rate: u32) -> Result<Self, FeatureError> {
        let (win, shift) = cfg.validate(sample_rate)?;
        let filters = linear_filterbank(
            cfg.n_filters,
            cfg.fft_size,
            f64::from(sample_rate),
            cfg.fmax,
        );
        Ok(Self {
            window: window(cfg.window, win),
            dct: DctTable::new(cfg.n_filters, cfg.n_ceps + 1),
            fft: FftPlanner::new().plan_fft_forward(cfg.fft_size),
            filters,
            win,
            shift,
            sample_rate,
            cfg,
        })
    }

    pub fn config(&self) -> &LfccConfig {
        &self.cfg
    }

    /// Static coefficients only (c0..c_n), one row per frame.
    pub fn statics(&self, signal: &AudioSignal) -> Result<FeatureMatrix, FeatureError> {
        if signal.sample_rate() != self.sample_rate {
            return Err(FeatureError::BadConfig(format!(
                "extractor built for {} Hz, signal is {} Hz",
                self.sample_rate,
                signal.sample_rate()
            )));
        }
        let emphasized;
        let x = match self.cfg.pre_emphasis {
            Some(a) => {
                let s = signal.samples();
                emphasized = std::iter::once(s[0])
                    .chain(s.windows(2).map(|w| w[1] - a * w[0]))
                    .collect::<Vec<_>>();
                &emphasized[..]
            }
            None => signal.samples(),
        };
        let n_frames = frame_count(x.len(), self.win, self.shift)?;
        let n_out = self.cfg.n_ceps + 1;
        let mut values = Vec::with_capacity(n_frames * n_out);
        let mut buf = vec![Complex::new(0.0, 0.0); self.cfg.fft_size];
        let mut log_energies = vec![0.0; self.filters.len()];
        let mut ceps = vec![0.0; n_out];
        for t in 0..n_frames {
            let frame = &x[t * self.shift..t * self.shift + self.win];
            buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
            for ((b, s), w) in buf.iter_mut().zip(frame).zip(&self.window) {
                b.re = s * w;
            }
            self.fft.process(&mut buf);
            for (e, f) in log_energies.iter_mut().zip(&self.filters) {
                let energy: f64 = f
                    .weights
                    .iter()
                    .zip(&buf[f.start..])
                    .map(|(w, c)| w * c.norm_sqr())
                    .sum();
                *e = energy.max(LOG_FLOOR).ln();
            }
            self.dct.apply(&log_energies, &mut ceps);
            values.extend_from_slice(&ceps);
        }
        FeatureMatrix::new(n_frames, n_out, values)
    }

    /// Static coefficients with deltas and delta-deltas appended.
    pub fn extract(&self, signal: &AudioSignal) -> Result<FeatureMatrix, FeatureError> {
        Ok(append_dynamics(
            &self.statics(signal)?,
            self.cfg.delta_width,
        ))
    }
}

pub fn lfcc(signal: &AudioSignal, cfg: &LfccConfig) -> Result<FeatureMatrix, FeatureError> {
    LfccExtractor::new(cfg.clone(), signal.sample_rate())?.extract(signal)
}
