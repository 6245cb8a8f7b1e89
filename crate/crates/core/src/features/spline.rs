/// Natural cubic spline through strictly increasing knots.
#[derive(Debug, Clone)]
pub(crate) struct NaturalSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots; zero at both ends.
    m: Vec<f64>,
}

impl NaturalSpline {
    pub(crate) fn new(x: &[f64], y: &[f64]) -> Self {
        assert_eq!(x.len(), y.len());
        assert!(x.len() >= 2, "spline needs two knots");
        assert!(x.windows(2).all(|w| w[0] < w[1]), "knots must increase");
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior equations.
            let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
            let mut diag = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            for i in 1..n - 1 {
                diag[i] = 2.0 * (h[i - 1] + h[i]);
                rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
            }
            for i in 2..n - 1 {
                let f = h[i - 1] / diag[i - 1];
                diag[i] -= f * h[i - 1];
                rhs[i] -= f * rhs[i - 1];
            }
            m[n - 2] = rhs[n - 2] / diag[n - 2];
            for i in (1..n - 2).rev() {
                m[i] = (rhs[i] - h[i] * m[i + 1]) / diag[i];
            }
        }
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        }
    }

    /// Value at `q`; outside the knot range the end cubic is extended.
    pub(crate) fn eval(&self, q: f64) -> f64 {
        let n = self.x.len();
        let i = self.x.partition_point(|&v| v <= q).clamp(1, n - 1) - 1;
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - q) / h;
        let b = (q - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Linear map from knot values to spline values at `queries`, as a
/// `queries.len() x knots.len()` row-major matrix.
pub(crate) fn resampling_matrix(knots: &[f64], queries: &[f64]) -> Vec<f64> {
    let n = knots.len();
    let mut out = vec![0.0; queries.len() * n];
    let mut unit = vec![0.0; n];
    for j in 0..n {
        unit[j] = 1.0;
        let s = NaturalSpline::new(knots, &unit);
        for (r, &q) in queries.iter().enumerate() {
            out[r * n + j] = s.eval(q);
        }
        unit[j] = 0.0;
    }
    out
}
