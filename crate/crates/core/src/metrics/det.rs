use super::MetricsError;

/// Empirical miss / false-alarm operating points as the threshold sweeps.
///
/// Index 0 is the accept-everything endpoint at `-inf` and the last index
/// the reject-everything endpoint at `+inf`; between them there is one
/// point per distinct score. A trial is accepted as bonafide when its
/// score is `>= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetCurve {
    thresholds: Vec<f64>,
    misses: Vec<usize>,
    false_alarms: Vec<usize>,
    n_bona: usize,
    n_spoof: usize,
}

/// EER value and the interpolated threshold where it is reached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eer {
    pub eer: f64,
    pub threshold: f64,
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

impl DetCurve {
    pub fn new(bona: &[f64], spoof: &[f64]) -> Result<Self, MetricsError> {
        if bona.is_empty() || spoof.is_empty() {
            return Err(MetricsError::EmptyClass {
                n_bona: bona.len(),
                n_spoof: spoof.len(),
            });
        }
        if bona.iter().chain(spoof).any(|s| !s.is_finite()) {
            return Err(MetricsError::NonFiniteScore);
        }
        let bona = sorted(bona);
        let spoof = sorted(spoof);
        let (nb, ns) = (bona.len(), spoof.len());

        let mut thresholds = Vec::with_capacity(nb + ns + 2);
        let mut misses = Vec::with_capacity(nb + ns + 2);
        let mut false_alarms = Vec::with_capacity(nb + ns + 2);
        thresholds.push(f64::NEG_INFINITY);
        misses.push(0);
        false_alarms.push(ns);

        // Walk the merged score list; at each distinct value `t`, `ib`
        // bonafide and `is` spoof scores lie strictly below it.
        let (mut ib, mut is) = (0, 0);
        while ib < nb || is < ns {
            let t = match (bona.get(ib), spoof.get(is)) {
                (Some(&b), Some(&s)) => b.min(s),
                (Some(&b), None) => b,
                (None, Some(&s)) => s,
                (None, None) => unreachable!(),
            };
            thresholds.push(t);
            misses.push(ib);
            false_alarms.push(ns - is);
            while ib < nb && bona[ib] == t {
                ib += 1;
            }
            while is < ns && spoof[is] == t {
                is += 1;
            }
        }

        thresholds.push(f64::INFINITY);
        misses.push(nb);
        false_alarms.push(0);

        Ok(Self {
            thresholds,
            misses,
            false_alarms,
            n_bona: nb,
            n_spoof: ns,
        })
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn n_bona(&self) -> usize {
        self.n_bona
    }

    pub fn n_spoof(&self) -> usize {
        self.n_spoof
    }

    pub fn pmiss_at(&self, i: usize) -> f64 {
        self.misses[i] as f64 / self.n_bona as f64
    }

    pub fn pfa_at(&self, i: usize) -> f64 {
        self.false_alarms[i] as f64 / self.n_spoof as f64
    }

    pub fn pmiss(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.pmiss_at(i)).collect()
    }

    pub fn pfa(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.pfa_at(i)).collect()
    }

    /// Sign of `pmiss - pfa` at point `i`, computed on integer counts.
    fn balance(&self, i: usize) -> std::cmp::Ordering {
        let lhs = self.misses[i] as u128 * self.n_spoof as u128;
        let rhs = self.false_alarms[i] as u128 * self.n_bona as u128;
        lhs.cmp(&rhs)
    }

    /// Equal error rate on the piecewise-linear interpolation between
    /// adjacent operating points.
    pub fn eer(&self) -> Eer {
        use std::cmp::Ordering::*;
        // Point 0 always has pmiss = 0 < pfa = 1 and the last point the
        // reverse, so a crossing exists at some index >= 1.
        let i = (1..self.len())
            .find(|&i| self.balance(i) != Less)
            .expect("DET endpoints bracket the crossing");
        if self.balance(i) == Equal {
            return Eer {
                eer: self.pmiss_at(i),
                threshold: self.thresholds[i],
            };
        }
        let (m0, f0) = (self.pmiss_at(i - 1), self.pfa_at(i - 1));
        let (m1, f1) = (self.pmiss_at(i), self.pfa_at(i));
        let (d0, d1) = (m0 - f0, m1 - f1);
        let t = -d0 / (d1 - d0);
        let eer = m0 + t * (m1 - m0);
        let (lo, hi) = (self.thresholds[i - 1], self.thresholds[i]);
        let threshold = if hi.is_finite() {
            lo + t * (hi - lo)
        } else {
            lo
        };
        Eer { eer, threshold }
    }

    /// Index of the point minimizing `c0 + c1 * pmiss + c2 * pfa`, with the
    /// smallest threshold winning ties. The `-inf` endpoint duplicates the
    /// point at the lowest score and is never reported.
    pub(crate) fn argmin_cost(&self, c0: f64, c1: f64, c2: f64) -> (usize, f64) {
        let mut best = (1, f64::INFINITY);
        for i in 1..self.len() {
            let cost = c0 + c1 * self.pmiss_at(i) + c2 * self.pfa_at(i);
            if cost < best.1 {
                best = (i, cost);
            }
        }
        best
    }

    pub(crate) fn threshold_at(&self, i: usize) -> f64 {
        self.thresholds[i]
    }
}

/// Fraction of `scores` strictly below `threshold`.
pub fn rate_below(scores: &[f64], threshold: f64) -> f64 {
    scores.iter().filter(|&&s| s < threshold).count() as f64 / scores.len() as f64
}

/// Fraction of `scores` at or above `threshold`.
pub fn rate_at_or_above(scores: &[f64], threshold: f64) -> f64 {
    scores.iter().filter(|&&s| s >= threshold).count() as f64 / scores.len() as f64
}
