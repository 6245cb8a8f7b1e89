use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{chunk_len, log_sum_exp, GmmError, GmmModel};
use crate::features::FeatureMatrix;

/// Lower bound on any variance, for dimensions that are constant in the
/// training data.
const ABSOLUTE_VARIANCE_FLOOR: f64 = 1e-10;
/// Components with less total responsibility than this are re-seeded.
const MIN_OCCUPANCY: f64 = 1.0;
/// Mean offset along the principal axis, in standard deviations, applied
/// when splitting.
const SPLIT_OFFSET: f64 = 0.2;
/// Power iterations used to find each split axis.
const POWER_ITERATIONS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMethod {
    /// Start from the global Gaussian and split until `K` components.
    #[default]
    Split,
    /// `K` distinct random frames as means, global variance, equal weights.
    RandomFrames,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub n_components: usize,
    /// EM iterations per splitting stage.
    pub max_iter: usize,
    /// Stop when the relative mean log-likelihood gain falls below this.
    pub tolerance: f64,
    /// Variance floor as a fraction of the global per-dimension variance.
    pub variance_floor: f64,
    pub seed: u64,
    pub init: InitMethod,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_components: 512,
            max_iter: 100,
            tolerance: 1e-5,
            variance_floor: 1e-3,
            seed: 0,
            init: InitMethod::Split,
        }
    }
}

impl TrainConfig {
    pub fn with_components(n_components: usize) -> Self {
        Self {
            n_components,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), GmmError> {
        let bad = |m: &str| Err(GmmError::BadConfig(m.into()));
        if self.n_components == 0 {
            return bad("K must be at least 1");
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return bad("tolerance must be positive");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1");
        }
        if !(self.variance_floor >= 0.0 && self.variance_floor.is_finite()) {
            return bad("variance floor must be non-negative");
        }
        Ok(())
    }
}

/// One EM iteration: the mean log-likelihood of the parameters entering
/// the iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub components: usize,
    pub mean_loglik: f64,
    /// Components re-seeded in this iteration's M-step; the next
    /// likelihood is not comparable with this one.
    pub reseeded: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub iterations: Vec<IterationRecord>,
}

impl TrainReport {
    /// Largest drop in mean log-likelihood between consecutive iterations of
    /// the same stage, ignoring steps that follow a re-seed.
    pub fn max_decrease(&self) -> f64 {
        self.iterations
            .windows(2)
            .filter(|w| w[0].components == w[1].components && w[0].reseeded == 0)
            .map(|w| w[0].mean_loglik - w[1].mean_loglik)
            .fold(0.0, f64::max)
    }
}

/// Sufficient statistics about a fixed shift (the global mean).
struct Accum {
    loglik: f64,
    occupancy: Vec<f64>,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl Accum {
    fn zeros(k: usize, d: usize) -> Self {
        Self {
            loglik: 0.0,
            occupancy: vec![0.0; k],
            first: vec![0.0; k * d],
            second: vec![0.0; k * d],
        }
    }

    fn merge(&mut self, other: &Accum) {
        self.loglik += other.loglik;
        for (a, b) in self.occupancy.iter_mut().zip(&other.occupancy) {
            *a += b;
        }
        for (a, b) in self.first.iter_mut().zip(&other.first) {
            *a += b;
        }
        for (a, b) in self.second.iter_mut().zip(&other.second) {
            *a += b;
        }
    }
}

fn e_step(model: &GmmModel, frames: &FeatureMatrix, shift: &[f64]) -> Accum {
    let (k, d) = (model.n_components(), model.dim());
    let partials: Vec<Accum> = frames
        .values()
        .par_chunks(chunk_len(frames.n_frames()) * d)
        .map(|chunk| {
            let mut acc = Accum::zeros(k, d);
            let mut post = vec![0.0; k];
            let mut centred = vec![0.0; d];
            for x in chunk.chunks_exact(d) {
                model.component_log_densities(x, &mut post);
                let lse = log_sum_exp(&post);
                acc.loglik += lse;
                for (c, (xi, s)) in centred.iter_mut().zip(x.iter().zip(shift)) {
                    *c = xi - s;
                }
                for (j, p) in post.iter().enumerate() {
                    let g = (p - lse).exp();
                    if g == 0.0 {
                        continue;
                    }
                    acc.occupancy[j] += g;
                    let f = &mut acc.first[j * d..(j + 1) * d];
                    let s = &mut acc.second[j * d..(j + 1) * d];
                    for ((fi, si), c) in f.iter_mut().zip(s.iter_mut()).zip(&centred) {
                        *fi += g * c;
                        *si += g * c * c;
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = Accum::zeros(k, d);
    for p in &partials {
        total.merge(p);
    }
    total
}

fn normalised(v: Vec<f64>) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > 0.0 && norm.is_finite()).then(|| v.into_iter().map(|x| x / norm).collect())
}

/// For each listed component `j` with axis `v_j`: its occupancy and
/// `sum_t gamma_tj ((x_t - mu_j) . v_j) (x_t - mu_j)`.
fn covariance_products(
    model: &GmmModel,
    frames: &FeatureMatrix,
    comps: &[usize],
    axes: &[Vec<f64>],
) -> (Vec<f64>, Vec<f64>) {
    let (k, d, m) = (model.n_components(), model.dim(), comps.len());
    let partials: Vec<(Vec<f64>, Vec<f64>)> = frames
        .values()
        .par_chunks(chunk_len(frames.n_frames()) * d)
        .map(|chunk| {
            let mut occ = vec![0.0; m];
            let mut prod = vec![0.0; m * d];
            let mut post = vec![0.0; k];
            for x in chunk.chunks_exact(d) {
                model.component_log_densities(x, &mut post);
                let lse = log_sum_exp(&post);
                for (c, &j) in comps.iter().enumerate() {
                    let g = (post[j] - lse).exp();
                    if g == 0.0 {
                        continue;
                    }
                    let mu = model.mean(j);
                    let proj: f64 = x
                        .iter()
                        .zip(mu)
                        .zip(&axes[c])
                        .map(|((xi, mi), vi)| (xi - mi) * vi)
                        .sum();
                    occ[c] += g;
                    for ((p, xi), mi) in prod[c * d..(c + 1) * d].iter_mut().zip(x).zip(mu) {
                        *p += g * proj * (xi - mi);
                    }
                }
            }
            (occ, prod)
        })
        .collect();
    let mut occ = vec![0.0; m];
    let mut prod = vec![0.0; m * d];
    for (o, p) in &partials {
        occ.iter_mut().zip(o).for_each(|(a, b)| *a += b);
        prod.iter_mut().zip(p).for_each(|(a, b)| *a += b);
    }
    (occ, prod)
}

struct Trainer<'a> {
    frames: &'a FeatureMatrix,
    cfg: &'a TrainConfig,
    global_mean: Vec<f64>,
    global_var: Vec<f64>,
    floor: Vec<f64>,
    rng: ChaCha8Rng,
    report: TrainReport,
}

impl<'a> Trainer<'a> {
    fn new(frames: &'a FeatureMatrix, cfg: &'a TrainConfig) -> Self {
        let (n, d) = (frames.n_frames() as f64, frames.dim());
        let mut mean = vec![0.0; d];
        for x in frames.rows() {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for x in frames.rows() {
            for ((s, v), m) in var.iter_mut().zip(x).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        var.iter_mut().for_each(|s| *s /= n);
        let floor = var
            .iter()
            .map(|v| (cfg.variance_floor * v).max(ABSOLUTE_VARIANCE_FLOOR))
            .collect();
        Self {
            frames,
            cfg,
            global_mean: mean,
            global_var: var,
            floor,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            report: TrainReport::default(),
        }
    }

    fn floored_global_var(&self) -> Vec<f64> {
        self.global_var
            .iter()
            .zip(&self.floor)
            .map(|(v, f)| v.max(*f))
            .collect()
    }

    /// M-step from accumulated statistics, re-seeding starved components.
    fn m_step(&mut self, acc: &Accum, d: usize) -> (GmmModel, usize) {
        let k = acc.occupancy.len();
        let n = self.frames.n_frames() as f64;
        let mut weights = vec![0.0; k];
        let mut means = vec![0.0; k * d];
        let mut vars = vec![0.0; k * d];
        let mut reseeded = 0;
        for j in 0..k {
            let occ = acc.occupancy[j];
            let mu = &mut means[j * d..(j + 1) * d];
            let var = &mut vars[j * d..(j + 1) * d];
            if occ < MIN_OCCUPANCY {
                reseeded += 1;
                let t = self.rng.gen_range(0..self.frames.n_frames());
                mu.copy_from_slice(self.frames.row(t));
                for ((v, g), f) in var.iter_mut().zip(&self.global_var).zip(&self.floor) {
                    *v = g.max(*f);
                }
                weights[j] = 1.0 / k as f64;
                continue;
            }
            weights[j] = occ / n;
            let f = &acc.first[j * d..(j + 1) * d];
            let s = &acc.second[j * d..(j + 1) * d];
            for i in 0..d {
                let m = f[i] / occ;
                mu[i] = self.global_mean[i] + m;
                var[i] = (s[i] / occ - m * m).max(self.floor[i]);
            }
        }
        if reseeded > 0 {
            log::warn!(
                "re-seeded {reseeded} of {k} components with occupancy below {MIN_OCCUPANCY}"
            );
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        (GmmModel::from_parts(weights, means, vars, d), reseeded)
    }

    fn run_em(&mut self, mut model: GmmModel) -> GmmModel {
        let n = self.frames.n_frames() as f64;
        let d = model.dim();
        let shift = self.global_mean.clone();
        let mut previous: Option<(f64, usize)> = None;
        for _ in 0..self.cfg.max_iter {
            let acc = e_step(&model, self.frames, &shift);
            let ll = acc.loglik / n;
            if let Some((prev, 0)) = previous {
                if (ll - prev) / prev.abs().max(f64::MIN_POSITIVE) < self.cfg.tolerance {
                    self.report.iterations.push(IterationRecord {
                        components: model.n_components(),
                        mean_loglik: ll,
                        reseeded: 0,
                    });
                    break;
                }
            }
            let (next, reseeded) = self.m_step(&acc, d);
            self.report.iterations.push(IterationRecord {
                components: model.n_components(),
                mean_loglik: ll,
                reseeded,
            });
            previous = Some((ll, reseeded));
            model = next;
        }
        model
    }

    fn global_model(&self) -> GmmModel {
        GmmModel::from_parts(
            vec![1.0],
            self.global_mean.clone(),
            self.floored_global_var(),
            self.global_mean.len(),
        )
    }

    /// Leading eigenvector of each listed component's responsibility-weighted
    /// covariance, scaled by the square root of its eigenvalue. Found by
    /// power iteration from a seeded random start.
    fn principal_axes(&mut self, model: &GmmModel, comps: &[usize]) -> Vec<Vec<f64>> {
        let d = model.dim();
        let mut axes: Vec<Vec<f64>> = comps
            .iter()
            .map(|_| {
                let v: Vec<f64> = (0..d).map(|_| self.rng.gen::<f64>() - 0.5).collect();
                normalised(v).unwrap_or_else(|| vec![1.0 / (d as f64).sqrt(); d])
            })
            .collect();
        let mut eig = vec![0.0; comps.len()];
        for _ in 0..POWER_ITERATIONS {
            let (occ, prod) = covariance_products(model, self.frames, comps, &axes);
            for (c, v) in axes.iter_mut().enumerate() {
                if occ[c] <= 0.0 {
                    continue;
                }
                let w: Vec<f64> = prod[c * d..(c + 1) * d]
                    .iter()
                    .map(|x| x / occ[c])
                    .collect();
                eig[c] = w.iter().zip(v.iter()).map(|(a, b)| a * b).sum::<f64>();
                if let Some(u) = normalised(w) {
                    *v = u;
                }
            }
        }
        axes.into_iter()
            .zip(eig)
            .zip(comps)
            .map(|((v, lambda), &j)| {
                if lambda > 0.0 {
                    v.iter().map(|x| x * lambda.sqrt()).collect()
                } else {
                    model.variance(j).iter().map(|x| x.sqrt()).collect()
                }
            })
            .collect()
    }

    /// Splits the heaviest components into pairs at `mu -+ 0.2 a`, with `a`
    /// the scaled principal axis of the component's data.
    fn split(&mut self, model: &GmmModel, target: usize) -> GmmModel {
        let (k, d) = (model.n_components(), model.dim());
        let n_split = (target - k).min(k);
        let mut order: Vec<usize> = (0..k).collect();
        // Heaviest first; index breaks ties so the order is total.
        order.sort_by(|&a, &b| {
            model.weights()[b]
                .total_cmp(&model.weights()[a])
                .then(a.cmp(&b))
        });
        let chosen = &order[..n_split];
        let axes = self.principal_axes(model, chosen);
        let mut weights = model.weights().to_vec();
        let mut means = model.means().to_vec();
        let mut vars = model.variances().to_vec();
        for (&j, axis) in chosen.iter().zip(&axes) {
            weights[j] /= 2.0;
            weights.push(weights[j]);
            let (mu, var) = (model.mean(j), model.variance(j));
            for i in 0..d {
                means[j * d + i] = mu[i] - SPLIT_OFFSET * axis[i];
            }
            means.extend(mu.iter().zip(axis).map(|(m, a)| m + SPLIT_OFFSET * a));
            vars.extend_from_slice(var);
        }
        GmmModel::from_parts(weights, means, vars, d)
    }

    fn train(mut self) -> (GmmModel, TrainReport) {
        let k = self.cfg.n_components;
        let model = match self.cfg.init {
            InitMethod::Split => {
                let mut model = self.run_em(self.global_model());
                while model.n_components() < k {
                    model = self.split(&model, k);
                    model = self.run_em(model);
                }
                model
            }
            InitMethod::RandomFrames => {
                let mut picks =
                    rand::seq::index::sample(&mut self.rng, self.frames.n_frames(), k).into_vec();
                picks.sort_unstable();
                let means: Vec<f64> = picks
                    .iter()
                    .flat_map(|&t| self.frames.row(t).to_vec())
                    .collect();
                let var = self.floored_global_var();
                let vars: Vec<f64> = (0..k).flat_map(|_| var.clone()).collect();
                let init =
                    GmmModel::from_parts(vec![1.0 / k as f64; k], means, vars, self.frames.dim());
                self.run_em(init)
            }
        };
        (model, self.report)
    }
}

/// EM training of a diagonal GMM on pooled frames.
///
/// Deterministic for a given configuration and seed, independent of the
/// number of worker threads.
pub fn em_train(frames: &FeatureMatrix, cfg: &TrainConfig) -> Result<GmmModel, GmmError> {
    em_train_with_report(frames, cfg).map(|(m, _)| m)
}

pub fn em_train_with_report(
    frames: &FeatureMatrix,
    cfg: &TrainConfig,
) -> Result<(GmmModel, TrainReport), GmmError> {
    cfg.validate()?;
    if frames.n_frames() < cfg.n_components {
        return Err(GmmError::TooFewFrames {
            needed: cfg.n_components,
            got: frames.n_frames(),
        });
    }
    if frames.dim() == 0 {
        return Err(GmmError::BadConfig("frames have no dimensions".into()));
    }
    if !frames.all_finite() {
        return Err(GmmError::BadConfig(
            "frames contain non-finite values".into(),
        ));
    }
    Ok(Trainer::new(frames, cfg).train())
}
