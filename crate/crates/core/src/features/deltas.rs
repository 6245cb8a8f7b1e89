use super::FeatureMatrix;

/// Regression deltas over `+-width` frames with edge replication:
/// `d_t = sum_w w (x_{t+w} - x_{t-w}) / (2 sum_w w^2)`.
pub fn deltas(features: &FeatureMatrix, width: usize) -> FeatureMatrix {
    let (n, dim) = (features.n_frames(), features.dim());
    if width == 0 || n == 0 {
        return FeatureMatrix::new(n, dim, vec![0.0; n * dim]).expect("shape");
    }
    let denom = 2.0 * (1..=width).map(|w| (w * w) as f64).sum::<f64>();
    let last = n - 1;
    let mut values = vec![0.0; n * dim];
    for t in 0..n {
        let out = &mut values[t * dim..(t + 1) * dim];
        for w in 1..=width {
            let ahead = features.row((t + w).min(last));
            let behind = features.row(t.saturating_sub(w));
            for ((o, a), b) in out.iter_mut().zip(ahead).zip(behind) {
                *o += w as f64 * (a - b);
            }
        }
        for o in out.iter_mut() {
            *o /= denom;
        }
    }
    FeatureMatrix::new(n, dim, values).expect("shape")
}

/// `[x, delta(x), delta(delta(x))]` column-wise.
pub fn append_dynamics(features: &FeatureMatrix, width: usize) -> FeatureMatrix {
    let d1 = deltas(features, width);
    let d2 = deltas(&d1, width);
    FeatureMatrix::hstack(&[features, &d1, &d2]).expect("equal frame counts")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_sequence_has_zero_deltas() {
        let m = FeatureMatrix::new(10, 3, vec![4.25; 30]).unwrap();
        assert!(deltas(&m, 2).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ramp_has_unit_slope_inside() {
        let m = FeatureMatrix::new(12, 1, (0..12).map(f64::from).collect()).unwrap();
        let d = deltas(&m, 2);
        for t in 2..10 {
            assert_eq!(d.row(t)[0], 1.0);
        }
        // Replicated edges flatten the slope.
        assert!(d.row(0)[0] < 1.0);
    }

    #[test]
    fn dynamics_triple_the_dimension() {
        let m = FeatureMatrix::new(5, 20, vec![0.0; 100]).unwrap();
        assert_eq!(append_dynamics(&m, 2).dim(), 60);
    }

    /// Direct evaluation of the regression formula for one frame.
    fn oracle(rows: &[Vec<f64>], t: usize, width: usize) -> Vec<f64> {
        let n = rows.len() as isize;
        let clamp = |i: isize| i.clamp(0, n - 1) as usize;
        let norm: f64 = 2.0 * (1..=width).map(|w| (w * w) as f64).sum::<f64>();
        (0..rows[0].len())
            .map(|d| {
                (1..=width)
                    .map(|w| {
                        let wi = w as isize;
                        w as f64
                            * (rows[clamp(t as isize + wi)][d] - rows[clamp(t as isize - wi)][d])
                    })
                    .sum::<f64>()
                    / norm
            })
            .collect()
    }

    proptest! {
        #[test]
        fn matches_direct_formula(
            rows in (1usize..30, 1usize..6).prop_flat_map(|(n, d)| {
                proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, d), n)
            }),
            width in 1usize..4,
        ) {
            let m = FeatureMatrix::from_rows(&rows).unwrap();
            let got = deltas(&m, width);
            for t in 0..rows.len() {
                for (g, w) in got.row(t).iter().zip(oracle(&rows, t, width)) {
                    prop_assert!((g - w).abs() < 1e-12);
                }
            }
        }
    }
}
