use super::cqt::{CqccConfig, CqtKernels, CqtMatrix};
use super::dct::DctTable;
use super::deltas::append_dynamics;
use super::spline::resampling_matrix;
use super::{AudioSignal, FeatureError, FeatureMatrix, LOG_FLOOR};

/// Number of points on the linear frequency grid.
///
/// The grid starts at `fmin` with spacing `fmin / period`, which samples the
/// first octave `period` times, and runs up to the highest bin centre:
/// `floor(period * (2^((B*O - 1)/B) - 1)) + 1`. 7717 for the defaults.
pub fn uniform_bin_count(cfg: &CqccConfig) -> usize {
    let top = (cfg.n_bins() as f64 - 1.0) / cfg.bins_per_octave as f64;
    (cfg.resampling_period as f64 * (2f64.powf(top) - 1.0)).floor() as usize + 1
}

/// Reusable CQCC extractor.
///
/// Spline resampling and the truncated DCT are both linear in the log
/// power, so they are folded into one `(n_ceps + 1) x bins` projection.
pub struct CqccExtractor {
    cfg: CqccConfig,
    kernels: CqtKernels,
    projection: Vec<f64>,
}

impl CqccExtractor {
    pub fn new(cfg: CqccConfig, sample_rate: u32) -> Result<Self, FeatureError> {
        let kernels = CqtKernels::new(&cfg, sample_rate)?;
        let n_bins = cfg.n_bins();
        let knots: Vec<f64> = (0..n_bins).map(|k| cfg.bin_frequency(k)).collect();
        let step = cfg.fmin() / cfg.resampling_period as f64;
        let grid: Vec<f64> = (0..uniform_bin_count(&cfg))
            .map(|i| cfg.fmin() + i as f64 * step)
            .collect();
        let spline = resampling_matrix(&knots, &grid);
        let n_out = cfg.n_ceps + 1;
        let dct = DctTable::new(grid.len(), n_out);
        let mut projection = vec![0.0; n_out * n_bins];
        let mut column = vec![0.0; grid.len()];
        let mut coeffs = vec![0.0; n_out];
        for j in 0..n_bins {
            for (c, row) in column.iter_mut().zip(spline.chunks_exact(n_bins)) {
                *c = row[j];
            }
            dct.apply(&column, &mut coeffs);
            for (i, c) in coeffs.iter().enumerate() {
                projection[i * n_bins + j] = *c;
            }
        }
        Ok(Self {
            cfg,
            kernels,
            projection,
        })
    }

    pub fn config(&self) -> &CqccConfig {
        &self.cfg
    }

    pub fn transform(&self, signal: &AudioSignal) -> Result<CqtMatrix, FeatureError> {
        self.kernels.transform(signal)
    }

    /// Static coefficients only (c0..c_n).
    pub fn statics(&self, signal: &AudioSignal) -> Result<FeatureMatrix, FeatureError> {
        let spec = self.transform(signal)?;
        let n_bins = spec.n_bins();
        let n_out = self.cfg.n_ceps + 1;
        let mut values = Vec::with_capacity(spec.n_frames() * n_out);
        let mut logp = vec![0.0; n_bins];
        for t in 0..spec.n_frames() {
            for (l, c) in logp.iter_mut().zip(spec.frame(t)) {
                *l = c.norm_sqr().max(LOG_FLOOR).ln();
            }
            values.extend(
                self.projection
                    .chunks_exact(n_bins)
                    .map(|row| row.iter().zip(&logp).map(|(a, b)| a * b).sum::<f64>()),
            );
        }
        FeatureMatrix::new(spec.n_frames(), n_out, values)
    }

    pub fn extract(&self, signal: &AudioSignal) -> Result<FeatureMatrix, FeatureError> {
        Ok(append_dynamics(
            &self.statics(signal)?,
            self.cfg.delta_width,
        ))
    }
}

pub fn cqcc(signal: &AudioSignal, cfg: &CqccConfig) -> Result<FeatureMatrix, FeatureError> {
    CqccExtractor::new(cfg.clone(), signal.sample_rate())?.extract(signal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_grid_size() {
        // 16 * (2^(107/12) - 1) = 7716.9...
        assert_eq!(uniform_bin_count(&CqccConfig::default()), 7717);
        assert_eq!(uniform_bin_count(&CqccConfig::with_fmax(8000.0)), 7717);
    }

    #[test]
    fn silence_is_constant() {
        let s = AudioSignal::new(vec![0.0; 16000], 16000).unwrap();
        let f = cqcc(&s, &CqccConfig::default()).unwrap();
        assert_eq!((f.n_frames(), f.dim()), (100, 60));
        assert!(f.all_finite());
        let first = f.row(0)[..20].to_vec();
        for row in f.rows() {
            assert_eq!(&row[..20], &first[..]);
            assert!(row[20..].iter().all(|&v| v == 0.0));
        }
        // Log floor spread evenly over the grid lands entirely in c0.
        let c0 = LOG_FLOOR.ln() * 7717f64.sqrt();
        assert!((first[0] - c0).abs() < 1e-6 * c0.abs());
        assert!(first[1..].iter().all(|v| v.abs() < 1e-6));
    }
}
