use std::f64::consts::PI;

/// First `n_out` coefficients of the orthonormal DCT-II of `x`.
pub fn dct2_ortho(x: &[f64], n_out: usize) -> Vec<f64> {
    let table = DctTable::new(x.len(), n_out);
    let mut out = vec![0.0; n_out];
    table.apply(x, &mut out);
    out
}

/// Precomputed orthonormal DCT-II basis rows.
#[derive(Debug, Clone)]
pub(crate) struct DctTable {
    n_in: usize,
    basis: Vec<f64>,
}

impl DctTable {
    pub(crate) fn new(n_in: usize, n_out: usize) -> Self {
        let n = n_in as f64;
        let mut basis = Vec::with_capacity(n_in * n_out);
        for k in 0..n_out {
            let scale = if k == 0 {
                (1.0 / n).sqrt()
            } else {
                (2.0 / n).sqrt()
            };
            basis.extend(
                (0..n_in).map(|i| scale * (PI * k as f64 * (2 * i + 1) as f64 / (2.0 * n)).cos()),
            );
        }
        Self { n_in, basis }
    }

    pub(crate) fn apply(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_in);
        for (o, row) in out.iter_mut().zip(self.basis.chunks_exact(self.n_in)) {
            *o = row.iter().zip(x).map(|(b, v)| b * v).sum();
        }
    }
}
