//! Acceptance gate. Runs every criterion and prints one line each; exits
//! non-zero if any required criterion fails.
//!
//! Criterion 11 needs official score files and keys, converted to this
//! toolkit's key and score formats, under `$SPOOFEVAL_OFFICIAL_DIR`:
//! `LA/keys.txt`, `LA/scores.txt` (B03), `DF/...` (B04), `PA/...` (B01).

use std::f64::consts::PI;
use std::path::Path;
use std::sync::{Arc, Barrier};
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spoofeval_core::features::{
    deltas, AudioSignal, CqccConfig, CqccExtractor, FeatureMatrix, LfccConfig, LfccExtractor,
    LOG_FLOOR,
};
use spoofeval_core::gmm::{
    baseline_pipeline, em_train, em_train_with_report, write_model, FrontEnd, GmmModel, TrainConfig,
};
use spoofeval_core::metrics::{eer, min_tdcf, normalize_tdcf, DetCurve, TdcfCoefficients};
use spoofeval_core::stats::{holm_bonferroni, hter_z_test, significance_matrix, SystemResult};
use spoofeval_core::trialdata::{Task, TrialId};
use spoofeval_service::{ManualClock, PhaseName, Platform, PlatformConfig, SubmitError};

enum Verdict {
    Pass(String),
    Skip(String),
}

type Outcome = Result<Verdict, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))?;
    Ok(t)
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("ASV-floor identity", asv_floor),
        ("normalization identity", normalization),
        ("EER / min t-DCF oracle equivalence", oracle_equivalence),
        ("monotone-transform invariance", monotone_invariance),
        ("worked fixture", worked_fixture),
        ("significance suite", significance),
        ("feature shapes and invariants", features),
        ("GMM suite", gmm_suite),
        ("synthetic baseline end-to-end", synthetic_baseline),
        ("service suite", service_suite),
        ("conditional reproduction", reproduction),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let t = start.elapsed();
        let (tag, detail) = match outcome {
            Ok(Verdict::Pass(d)) => ("PASS", d),
            Ok(Verdict::Skip(d)) => ("SKIP", d),
            Err(e) => {
                failed += 1;
                ("FAIL", e)
            }
        };
        println!("criterion {:>2} {tag} {name} [{t:.2?}] {detail}", i + 1);
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion(s) failed");
        std::process::exit(1);
    }
    println!("acceptance: all required criteria passed");
}

// ---------------------------------------------------------------- metrics

fn asv_floor() -> Outcome {
    let start = Instant::now();
    let bona = [3.0, 2.5, 2.0, 1.0];
    let spoof = [0.5, -1.0, -2.0];
    for c in TdcfCoefficients::DEFAULTS {
        let v = min_tdcf(&bona, &spoof, &c)
            .map_err(|e| e.to_string())?
            .value;
        ensure(v == c.c0, || {
            format!("{:?}/{:?}: {v} != {}", c.task, c.phase, c.c0)
        })?;
    }
    let t = within(start, Duration::from_secs(1))?;
    Ok(Verdict::Pass(format!(
        "min t-DCF == C0 for 4 sets in {t:.2?}"
    )))
}

fn normalization() -> Outcome {
    let bona = [0.5; 7];
    let spoof = [0.5; 11];
    for c in TdcfCoefficients::DEFAULTS {
        let raw = min_tdcf(&bona, &spoof, &c)
            .map_err(|e| e.to_string())?
            .value;
        let n = normalize_tdcf(raw, &c).map_err(|e| e.to_string())?;
        ensure((n - 1.0).abs() <= 1e-12, || {
            format!("{:?}/{:?}: {n}", c.task, c.phase)
        })?;
    }
    Ok(Verdict::Pass(
        "constant scores normalize to 1 for 4 sets".into(),
    ))
}

/// `(pmiss, pfa)` at `-inf`, every midpoint between adjacent distinct
/// scores, and `+inf`; a trial is accepted when its score exceeds the
/// threshold.
fn oracle_points(bona: &[f64], spoof: &[f64]) -> Vec<(f64, f64)> {
    let mut all: Vec<f64> = bona.iter().chain(spoof).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    let mut thresholds = vec![f64::NEG_INFINITY];
    thresholds.extend(all.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    thresholds.push(f64::INFINITY);
    thresholds
        .iter()
        .map(|&t| {
            let miss = bona.iter().filter(|&&b| b < t).count();
            let fa = spoof.iter().filter(|&&s| s > t).count();
            (
                miss as f64 / bona.len() as f64,
                fa as f64 / spoof.len() as f64,
            )
        })
        .collect()
}

fn oracle_eer(points: &[(f64, f64)]) -> f64 {
    let i = points.iter().position(|(m, f)| m >= f).unwrap();
    let (m1, f1) = points[i];
    if m1 == f1 {
        return m1;
    }
    let (m0, f0) = points[i - 1];
    let a = (f0 - m0) / ((m1 - m0) - (f1 - f0));
    m0 + a * (m1 - m0)
}

fn oracle_min_cost(points: &[(f64, f64)], c: &TdcfCoefficients) -> f64 {
    points
        .iter()
        .map(|(m, f)| c.c0 + c.c1 * m + c.c2 * f)
        .fold(f64::INFINITY, f64::min)
}

fn random_scores(rng: &mut ChaCha8Rng, n: usize, shift: f64, mode: u32) -> Vec<f64> {
    (0..n)
        .map(|_| match mode {
            0 => rng.gen_range(-3.0..3.0) + shift,
            1 => (rng.gen_range(0..12) as f64 + shift).round(),
            _ => {
                if rng.gen_bool(0.5) {
                    rng.gen_range(-3.0..3.0) + shift
                } else {
                    f64::from(rng.gen_range(-3..4))
                }
            }
        })
        .collect()
}

fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let mode = rng.gen_range(0..3);
    let shift = rng.gen_range(0.0..3.0);
    let nb = rng.gen_range(1..=200);
    let ns = rng.gen_range(1..=200);
    (
        random_scores(rng, nb, shift, mode),
        random_scores(rng, ns, 0.0, mode),
    )
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for n in 0..1000 {
        let (bona, spoof) = random_instance(&mut rng);
        let points = oracle_points(&bona, &spoof);
        let got = eer(&bona, &spoof).map_err(|e| e.to_string())?.eer;
        let want = oracle_eer(&points);
        worst = worst.max((got - want).abs());
        ensure((got - want).abs() <= 1e-12, || {
            format!("instance {n}: eer {got} vs oracle {want}")
        })?;
        let custom = TdcfCoefficients::new(
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.0..3.0),
        )
        .map_err(|e| e.to_string())?;
        for c in TdcfCoefficients::DEFAULTS.iter().chain([&custom]) {
            let got = min_tdcf(&bona, &spoof, c).map_err(|e| e.to_string())?.value;
            let want = oracle_min_cost(&points, c);
            ensure(got.to_bits() == want.to_bits(), || {
                format!("instance {n}: min t-DCF {got} vs oracle {want}")
            })?;
        }
    }
    let t = within(start, Duration::from_secs(30))?;
    Ok(Verdict::Pass(format!(
        "1000 instances, max EER deviation {worst:.1e}, in {t:.2?}"
    )))
}

fn random_transform(rng: &mut ChaCha8Rng) -> Box<dyn Fn(f64) -> f64> {
    let a = rng.gen_range(0.1..10.0);
    let b = rng.gen_range(-5.0..5.0);
    let k = rng.gen_range(0.1..1.0);
    match rng.gen_range(0..6) {
        0 => Box::new(move |x| a * x + b),
        1 => Box::new(move |x| (k * x).exp()),
        2 => Box::new(move |x| x * x * x + a * x),
        3 => Box::new(move |x| (k * x).atan() + b),
        4 => Box::new(move |x| 1.0 / (1.0 + (-k * x).exp())),
        _ => Box::new(move |x| ((k * x).exp() * a).ln_1p() - b),
    }
}

fn strictly_increasing_on(f: &dyn Fn(f64) -> f64, sorted_distinct: &[f64]) -> bool {
    sorted_distinct.windows(2).all(|w| f(w[0]) < f(w[1]))
}

fn monotone_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut applied = 0;
    while applied < 100 {
        let (bona, spoof) = random_instance(&mut rng);
        let mut distinct: Vec<f64> = bona.iter().chain(&spoof).copied().collect();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        let f = random_transform(&mut rng);
        if !strictly_increasing_on(&*f, &distinct) {
            // Rounding can merge close values; draw another transform.
            continue;
        }
        applied += 1;
        let tb: Vec<f64> = bona.iter().map(|&x| f(x)).collect();
        let ts: Vec<f64> = spoof.iter().map(|&x| f(x)).collect();
        let (d0, d1) = (
            DetCurve::new(&bona, &spoof).map_err(|e| e.to_string())?,
            DetCurve::new(&tb, &ts).map_err(|e| e.to_string())?,
        );
        ensure(d0.pmiss() == d1.pmiss() && d0.pfa() == d1.pfa(), || {
            format!("transform {applied}: operating points differ")
        })?;
        let (e0, e1) = (d0.eer().eer, d1.eer().eer);
        ensure((e0 - e1).abs() <= 1e-12, || {
            format!("transform {applied}: eer {e0} vs {e1}")
        })?;
        for c in TdcfCoefficients::DEFAULTS {
            let v0 = min_tdcf(&bona, &spoof, &c)
                .map_err(|e| e.to_string())?
                .value;
            let v1 = min_tdcf(&tb, &ts, &c).map_err(|e| e.to_string())?.value;
            ensure(v0.to_bits() == v1.to_bits(), || {
                format!("transform {applied}: min t-DCF {v0} vs {v1}")
            })?;
        }
    }
    Ok(Verdict::Pass("100 transforms".into()))
}

fn worked_fixture() -> Outcome {
    let bona = [0.9, 0.8, 0.7, 0.6];
    let spoof = [0.75, 0.3, 0.2, 0.1];
    let e = eer(&bona, &spoof).map_err(|e| e.to_string())?.eer;
    ensure((e - 0.25).abs() <= 1e-12, || format!("EER {e}"))?;
    let c = TdcfCoefficients::LA_EVALUATION;
    let want = 0.1847 + 0.8153 * 0.25;
    let raw = min_tdcf(&bona, &spoof, &c)
        .map_err(|e| e.to_string())?
        .value;
    let norm = normalize_tdcf(raw, &c).map_err(|e| e.to_string())?;
    ensure((raw - want).abs() <= 1e-12, || {
        format!("min t-DCF {raw} vs {want}")
    })?;
    ensure((norm - want).abs() <= 1e-12, || {
        format!("normalized {norm} vs {want}")
    })?;
    Ok(Verdict::Pass(format!("EER {e}, min t-DCF {raw}")))
}

// ------------------------------------------------------------ significance

/// Two-sided p-value with the normal CDF integrated by composite Simpson.
fn oracle_p(z: f64) -> f64 {
    let n = 20_000;
    let h = z / n as f64;
    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    let mut s = phi(0.0) + phi(z);
    for i in 1..n {
        s += phi(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 - 2.0 * s * h / 3.0
}

fn random_system(rng: &mut ChaCha8Rng, id: usize) -> SystemResult {
    SystemResult {
        system_id: format!("S{id}"),
        eer: 0.0,
        pmiss: rng.gen_range(0.01..0.5),
        pfa: rng.gen_range(0.01..0.5),
        n_bona: rng.gen_range(50..5000),
        n_spoof: rng.gen_range(50..5000),
    }
}

fn significance() -> Outcome {
    ensure(
        holm_bonferroni(&[0.01, 0.02, 0.04], 0.05) == [true, true, true],
        || "[0.01, 0.02, 0.04] should all reject".into(),
    )?;
    ensure(
        holm_bonferroni(&[0.01, 0.03, 0.04], 0.05) == [true, false, false],
        || "[0.01, 0.03, 0.04] should reject the first only".into(),
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (a, b) = (random_system(&mut rng, 0), random_system(&mut rng, 1));
        let var = |s: &SystemResult| {
            0.25 * (s.pmiss * (1.0 - s.pmiss) / s.n_bona as f64
                + s.pfa * (1.0 - s.pfa) / s.n_spoof as f64)
        };
        let diff = 0.5 * ((a.pmiss + a.pfa) - (b.pmiss + b.pfa));
        let z = diff.abs() / (var(&a) + var(&b)).sqrt();
        let got = hter_z_test(&a, &b).map_err(|e| e.to_string())?.pvalue;
        let want = oracle_p(z);
        worst = worst.max((got - want).abs());
        ensure((got - want).abs() <= 1e-6, || {
            format!("z = {z}: p {got} vs oracle {want}")
        })?;
    }

    let alphas = [0.001, 0.01, 0.05, 0.1, 0.2];
    for set in 0..100 {
        let n = rng.gen_range(2..=8);
        let systems: Vec<_> = (0..n).map(|i| random_system(&mut rng, i)).collect();
        let mut previous: Option<Vec<Vec<bool>>> = None;
        for &alpha in &alphas {
            let m = significance_matrix(&systems, alpha).map_err(|e| e.to_string())?;
            for i in 0..n {
                ensure(!m.significant[i][i], || {
                    format!("set {set}: diagonal marked significant")
                })?;
                for j in 0..n {
                    ensure(
                        m.significant[i][j] == m.significant[j][i]
                            && m.pvalues[i][j] == m.pvalues[j][i],
                        || format!("set {set}: asymmetric at ({i}, {j})"),
                    )?;
                    if let Some(prev) = &previous {
                        ensure(!prev[i][j] || m.significant[i][j], || {
                            format!("set {set}: ({i}, {j}) lost significance at alpha {alpha}")
                        })?;
                    }
                }
            }
            previous = Some(m.significant);
        }
    }
    Ok(Verdict::Pass(format!(
        "Holm fixtures exact, 200 z-tests (max p deviation {worst:.1e}), 100 sets"
    )))
}

// ---------------------------------------------------------------- features

fn chirp(n: usize, phase: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = i as f64 / 16000.0;
            0.4 * (2.0 * PI * (200.0 + 1500.0 * t) * t + phase).sin()
                + 0.1 * (2.0 * PI * 3100.0 * t).cos()
        })
        .collect()
}

fn shifted_match(a: &FeatureMatrix, b: &FeatureMatrix, margin: usize) -> Result<f64, String> {
    let n = a.n_frames().min(b.n_frames() - 1);
    let mut worst: f64 = 0.0;
    for t in margin..n - margin {
        for (x, y) in a.row(t).iter().zip(b.row(t + 1)) {
            worst = worst.max((x - y).abs());
        }
    }
    ensure(worst <= 1e-9, || {
        format!("shifted features differ by {worst:e}")
    })?;
    Ok(worst)
}

fn silence_is_floored(f: &FeatureMatrix, n_grid: usize, name: &str) -> Result<(), String> {
    ensure(f.all_finite(), || {
        format!("{name}: non-finite features on silence")
    })?;
    let c0 = LOG_FLOOR.ln() * (n_grid as f64).sqrt();
    for row in f.rows() {
        ensure((row[0] - c0).abs() <= 1e-6 * c0.abs(), || {
            format!("{name}: c0 {} vs floor {c0}", row[0])
        })?;
        ensure(row[1..20].iter().all(|v| v.abs() < 1e-6), || {
            format!("{name}: non-flat floored cepstrum")
        })?;
        ensure(row[20..].iter().all(|&v| v == 0.0), || {
            format!("{name}: non-zero dynamics on silence")
        })?;
    }
    Ok(())
}

fn features() -> Outcome {
    let start = Instant::now();
    let lfcc = LfccExtractor::new(LfccConfig::default(), 16000).map_err(|e| e.to_string())?;
    let cqcc = CqccExtractor::new(CqccConfig::default(), 16000).map_err(|e| e.to_string())?;
    let sig = |x: Vec<f64>| AudioSignal::new(x, 16000).map_err(|e| e.to_string());

    let one_second = sig(chirp(16000, 0.0))?;
    let l = lfcc.extract(&one_second).map_err(|e| e.to_string())?;
    let c = cqcc.extract(&one_second).map_err(|e| e.to_string())?;
    ensure((l.n_frames(), l.dim()) == (65, 60), || {
        format!("LFCC {}x{}", l.n_frames(), l.dim())
    })?;
    ensure((c.n_frames(), c.dim()) == (100, 60), || {
        format!("CQCC {}x{}", c.n_frames(), c.dim())
    })?;

    let silence = sig(vec![0.0; 16000])?;
    silence_is_floored(
        &lfcc.extract(&silence).map_err(|e| e.to_string())?,
        70,
        "LFCC",
    )?;
    silence_is_floored(
        &cqcc.extract(&silence).map_err(|e| e.to_string())?,
        7717,
        "CQCC",
    )?;

    let constant = FeatureMatrix::from_rows(&vec![vec![-7.25, 0.5, 3e5, 0.0]; 23])
        .map_err(|e| e.to_string())?;
    let d = deltas(&constant, 2);
    ensure(d.values().iter().all(|&v| v == 0.0), || {
        "delta of constant input is not 0".into()
    })?;
    ensure(deltas(&d, 2).values().iter().all(|&v| v == 0.0), || {
        "delta-delta of constant input is not 0".into()
    })?;

    let x = chirp(16000, 0.3);
    let mut delayed = chirp(240, 1.1);
    delayed.extend_from_slice(&x);
    let a = lfcc.extract(&sig(x.clone())?).map_err(|e| e.to_string())?;
    let b = lfcc.extract(&sig(delayed)?).map_err(|e| e.to_string())?;
    let wl = shifted_match(&a, &b, 4)?;
    let mut delayed = vec![0.0; 160];
    delayed.extend_from_slice(&x);
    let a = cqcc.extract(&sig(x)?).map_err(|e| e.to_string())?;
    let b = cqcc.extract(&sig(delayed)?).map_err(|e| e.to_string())?;
    let wc = shifted_match(&a, &b, 4)?;

    let t = within(start, Duration::from_secs(10))?;
    Ok(Verdict::Pass(format!(
        "LFCC 65x60, CQCC 100x60, shift error {:.1e} in {t:.2?}",
        wl.max(wc)
    )))
}

// --------------------------------------------------------------------- GMM

fn clustered(rng: &mut ChaCha8Rng, n: usize, d: usize, k: usize) -> FeatureMatrix {
    let centres: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..d).map(|_| rng.gen_range(-4.0..4.0)).collect())
        .collect();
    let scales: Vec<f64> = (0..d).map(|_| rng.gen_range(0.2..1.5)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let c = &centres[rng.gen_range(0..k)];
            c.iter()
                .zip(&scales)
                .map(|(m, s)| {
                    // Irwin-Hall approximation of a normal draw.
                    let u: f64 = (0..12).map(|_| rng.gen::<f64>()).sum::<f64>() - 6.0;
                    m + s * u
                })
                .collect()
        })
        .collect();
    FeatureMatrix::from_rows(&rows).unwrap()
}

fn brute_force_loglik(m: &GmmModel, x: &FeatureMatrix) -> f64 {
    let mut total = 0.0;
    for row in x.rows() {
        let mut p = 0.0;
        for k in 0..m.n_components() {
            let mut dens = m.weights()[k];
            for ((xi, mu), v) in row.iter().zip(m.mean(k)).zip(m.variance(k)) {
                dens *= (-(xi - mu) * (xi - mu) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt();
            }
            p += dens;
        }
        total += p.ln();
    }
    total / x.n_frames() as f64
}

fn model_bytes(m: &GmmModel) -> Vec<u8> {
    let mut buf = Vec::new();
    write_model(&mut buf, m).unwrap();
    buf
}

fn gmm_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let err = |e: spoofeval_core::gmm::GmmError| e.to_string();

    // K = 1: the ML estimate is the sample mean and population variance.
    let x = clustered(&mut rng, 700, 3, 1);
    let m = em_train(&x, &TrainConfig::with_components(1)).map_err(err)?;
    let n = x.n_frames() as f64;
    for d in 0..x.dim() {
        let mean = x.rows().map(|r| r[d]).sum::<f64>() / n;
        let var = x.rows().map(|r| (r[d] - mean).powi(2)).sum::<f64>() / n;
        ensure((m.weights()[0] - 1.0).abs() <= 1e-12, || {
            format!("K=1 weight {}", m.weights()[0])
        })?;
        ensure((m.mean(0)[d] - mean).abs() <= 1e-12, || {
            format!("K=1 mean {} vs {mean}", m.mean(0)[d])
        })?;
        ensure((m.variance(0)[d] - var).abs() <= 1e-12, || {
            format!("K=1 var {} vs {var}", m.variance(0)[d])
        })?;
    }

    let mut worst_drop: f64 = 0.0;
    for run in 0..50 {
        let d = rng.gen_range(1..=4);
        let k = [2, 3, 4, 8][rng.gen_range(0..4)];
        let (n, clusters) = (rng.gen_range(200..600), rng.gen_range(1..=4));
        let x = clustered(&mut rng, n, d, clusters);
        let cfg = TrainConfig {
            seed: rng.gen(),
            tolerance: 1e-9,
            ..TrainConfig::with_components(k)
        };
        let (_, report) = em_train_with_report(&x, &cfg).map_err(err)?;
        let drop = report.max_decrease();
        worst_drop = worst_drop.max(drop);
        ensure(drop <= 1e-8, || {
            format!("run {run}: log-likelihood fell by {drop:e}")
        })?;
    }

    let mut worst_ll: f64 = 0.0;
    for _ in 0..50 {
        let d = rng.gen_range(1..=4);
        let k = rng.gen_range(1..=8);
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let model = GmmModel::new(
            raw.iter().map(|w| w / total).collect(),
            (0..k * d).map(|_| rng.gen_range(-3.0..3.0)).collect(),
            (0..k * d).map(|_| rng.gen_range(0.2..3.0)).collect(),
            d,
        )
        .map_err(err)?;
        let x = clustered(&mut rng, 300, d, 2);
        let got = model.loglik(&x).map_err(err)?;
        let want = brute_force_loglik(&model, &x);
        worst_ll = worst_ll.max((got - want).abs());
        ensure((got - want).abs() <= 1e-9, || {
            format!("loglik {got} vs brute force {want}")
        })?;
    }

    let x = clustered(&mut rng, 3000, 4, 5);
    let cfg = TrainConfig {
        seed: 42,
        ..TrainConfig::with_components(8)
    };
    let train_in = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| em_train(&x, &cfg)).map(|m| model_bytes(&m))
    };
    let reference = train_in(1).map_err(err)?;
    for threads in [1, 2, 4, 8] {
        ensure(train_in(threads).map_err(err)? == reference, || {
            format!("model bytes differ with {threads} threads")
        })?;
    }
    Ok(Verdict::Pass(format!(
        "K=1 exact, 50 EM runs (max drop {worst_drop:.1e}), loglik deviation {worst_ll:.1e}, bytes stable over 1-8 threads"
    )))
}

// ---------------------------------------------------------------- baseline

fn tone_utterance(rng: &mut ChaCha8Rng, band: (f64, f64)) -> AudioSignal {
    let n = 8000;
    let tones: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(band.0..band.1),
                rng.gen_range(0.1..0.3),
                rng.gen_range(0.0..2.0 * PI),
            )
        })
        .collect();
    let x = (0..n)
        .map(|i| {
            let t = i as f64 / 16000.0;
            let s: f64 = tones
                .iter()
                .map(|(f, a, p)| a * (2.0 * PI * f * t + p).sin())
                .sum();
            s + rng.gen_range(-0.005..0.005)
        })
        .collect();
    AudioSignal::new(x, 16000).unwrap()
}

fn synthetic_baseline() -> Outcome {
    let start = Instant::now();
    let bona_band = (250.0, 900.0);
    let spoof_band = (2000.0, 3500.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let train_bona: Vec<_> = (0..50)
        .map(|_| tone_utterance(&mut rng, bona_band))
        .collect();
    let train_spoof: Vec<_> = (0..50)
        .map(|_| tone_utterance(&mut rng, spoof_band))
        .collect();
    let mut trials = Vec::new();
    for i in 0..50 {
        trials.push((
            TrialId::new(format!("b{i}")).unwrap(),
            tone_utterance(&mut rng, bona_band),
        ));
        trials.push((
            TrialId::new(format!("s{i}")).unwrap(),
            tone_utterance(&mut rng, spoof_band),
        ));
    }
    let cfg = TrainConfig {
        seed: 1,
        ..TrainConfig::with_components(16)
    };
    let mut report = Vec::new();
    for fe in [FrontEnd::Cqcc, FrontEnd::Lfcc] {
        let scores = baseline_pipeline(&train_bona, &train_spoof, &trials, fe, Task::La, &cfg)
            .map_err(|e| format!("{fe}: {e}"))?;
        let (mut b, mut s) = (Vec::new(), Vec::new());
        for (id, v) in scores.entries() {
            if id.as_str().starts_with('b') {
                &mut b
            } else {
                &mut s
            }
            .push(*v);
        }
        let e = eer(&b, &s).map_err(|e| e.to_string())?.eer;
        ensure(e == 0.0, || format!("{fe}: test EER {e}"))?;
        report.push(format!("{fe} EER 0"));
    }
    let t = within(start, Duration::from_secs(300))?;
    Ok(Verdict::Pass(format!(
        "{} on 100 test trials, K=16, in {t:.2?}",
        report.join(", ")
    )))
}

// ----------------------------------------------------------------- service

const KEYS: &str = "\
p1 LA LA-C1 - bonafide progress
p2 LA LA-C1 - bonafide progress
p3 LA LA-C2 A07 spoof progress
p4 LA LA-C2 A08 spoof progress
e1 LA LA-C3 - bonafide evaluation
e2 LA LA-C3 A09 spoof evaluation
";

fn service_config(data: &Path, keys: &Path) -> String {
    let mut teams = String::new();
    for t in ["alpha", "beta", "gamma"] {
        teams += &format!("[[teams]]\nname = \"{t}\"\ntoken = \"tok-{t}\"\nleaderboard = true\n\n");
    }
    format!(
        r#"alias_salt = "acceptance"

[server]
data_dir = {data:?}

{teams}
[tasks.LA]
key_file = {keys:?}

[[tasks.LA.phases]]
name = "progress"
start = "2021-07-28T00:00:00Z"
end = "2021-08-10T00:00:00Z"

[[tasks.LA.phases]]
name = "evaluation"
start = "2021-08-10T00:00:00Z"
end = "2021-08-12T00:00:00Z"
"#,
        data = data.display().to_string(),
        keys = keys.display().to_string(),
    )
}

/// Progress scores with one spoof trial at `s`: separable below 0.5.
fn progress_file(s: f64) -> String {
    format!("p1 0.9\np2 0.5\np3 {s}\np4 0.1\n")
}

fn at(s: &str) -> DateTime<Utc> {
    s.parse().unwrap()
}

fn service_suite() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let keys = dir.path().join("keys.txt");
    std::fs::write(&keys, KEYS).map_err(|e| e.to_string())?;
    let config = PlatformConfig::from_toml(&service_config(&dir.path().join("data"), &keys))
        .map_err(|e| e.to_string())?;
    let clock = Arc::new(ManualClock::new(at("2021-08-01T00:00:00Z")));
    let open = || Platform::open(config.clone(), clock.clone()).map_err(|e| e.to_string());

    let p = open()?;
    for (i, when) in ["00:00:00", "08:00:00", "16:00:00"].iter().enumerate() {
        clock.set(at(&format!("2021-08-01T{when}Z")));
        p.submit(
            "tok-alpha",
            Task::La,
            progress_file(0.7 - 0.1 * i as f64).as_bytes(),
        )
        .map_err(|e| format!("progress submission {}: {e}", i + 1))?;
    }
    clock.set(at("2021-08-01T23:59:59Z"));
    let fourth = p.submit("tok-alpha", Task::La, progress_file(0.2).as_bytes());
    ensure(
        matches!(fourth, Err(SubmitError::QuotaExceeded { .. })),
        || format!("4th same-day progress submission: {fourth:?}"),
    )?;

    // Burst from another team on a later day.
    clock.set(at("2021-08-03T09:00:00Z"));
    let p = Arc::new(p);
    let barrier = Arc::new(Barrier::new(10));
    let handles: Vec<_> = (0..10)
        .map(|i| {
            let (p, barrier) = (p.clone(), barrier.clone());
            std::thread::spawn(move || {
                barrier.wait();
                p.submit(
                    "tok-beta",
                    Task::La,
                    progress_file(0.8 - 0.05 * i as f64).as_bytes(),
                )
            })
        })
        .collect();
    let admitted = handles
        .into_iter()
        .map(|h| h.join().unwrap())
        .filter(|r| r.is_ok())
        .count();
    ensure(admitted == 3, || {
        format!("burst of 10 admitted {admitted}, quota is 3")
    })?;

    for (day, s) in [("05", 0.6), ("06", 0.3), ("07", 0.8)] {
        clock.set(at(&format!("2021-08-{day}T12:00:00Z")));
        p.submit("tok-gamma", Task::La, progress_file(s).as_bytes())
            .map_err(|e| e.to_string())?;
    }

    clock.set(at("2021-08-10T10:00:00Z"));
    p.submit("tok-alpha", Task::La, b"e1 1\ne2 0\n")
        .map_err(|e| format!("evaluation: {e}"))?;
    clock.set(at("2021-08-11T10:00:00Z"));
    let second = p.submit("tok-alpha", Task::La, b"e1 1\ne2 0\n");
    ensure(
        matches!(second, Err(SubmitError::QuotaExceeded { .. })),
        || format!("2nd evaluation submission: {second:?}"),
    )?;

    let board = p.leaderboard(Task::La, PhaseName::Progress);
    let eval_board = p.leaderboard(Task::La, PhaseName::Evaluation);
    let series = p.best_over_time(Task::La, PhaseName::Progress);
    let records = p.records();
    ensure(board.len() == 3, || {
        format!("leaderboard has {} teams", board.len())
    })?;
    drop(p);

    // Simulated crash: a half-written record at the end of the log.
    let log = config
        .server
        .data_dir
        .join(spoofeval_service::store::LOG_FILE);
    let mut text = std::fs::read_to_string(&log).map_err(|e| e.to_string())?;
    text.push_str("{\"id\":999,\"team\":\"be");
    std::fs::write(&log, text).map_err(|e| e.to_string())?;
    let replayed = open()?;
    ensure(replayed.records() == records, || {
        "replayed records differ".into()
    })?;
    ensure(
        replayed.leaderboard(Task::La, PhaseName::Progress) == board,
        || "replayed progress leaderboard differs".into(),
    )?;
    ensure(
        replayed.leaderboard(Task::La, PhaseName::Evaluation) == eval_board,
        || "replayed evaluation leaderboard differs".into(),
    )?;
    let replayed_series = replayed.best_over_time(Task::La, PhaseName::Progress);
    ensure(replayed_series == series, || {
        "replayed progress series differs".into()
    })?;

    ensure(series.points.len() >= 3, || {
        format!("series has {} points", series.points.len())
    })?;
    ensure(
        series.points.windows(2).all(|w| w[1].best <= w[0].best),
        || {
            format!(
                "progress series increases: {:?}",
                series.points.iter().map(|p| p.best).collect::<Vec<_>>()
            )
        },
    )?;
    Ok(Verdict::Pass(format!(
        "quotas enforced, burst admitted 3/10, replay identical over {} records, {}-day series non-increasing",
        records.len(),
        series.points.len()
    )))
}

// ------------------------------------------------------------ reproduction

struct Published {
    task: &'static str,
    system: &'static str,
    min_tdcf: Option<f64>,
    eer: Option<f64>,
}

const PUBLISHED: [Published; 3] = [
    Published {
        task: "LA",
        system: "B03",
        min_tdcf: Some(0.3445),
        eer: Some(9.26),
    },
    Published {
        task: "DF",
        system: "B04",
        min_tdcf: None,
        eer: Some(22.38),
    },
    Published {
        task: "PA",
        system: "B01",
        min_tdcf: Some(0.9434),
        eer: None,
    },
];

fn reproduction() -> Outcome {
    let Some(root) = std::env::var_os("SPOOFEVAL_OFFICIAL_DIR") else {
        return Ok(Verdict::Skip("set SPOOFEVAL_OFFICIAL_DIR to run".into()));
    };
    let root = Path::new(&root);
    let mut checked = Vec::new();
    for p in &PUBLISHED {
        let keys = root.join(p.task).join("keys.txt");
        let scores = root.join(p.task).join("scores.txt");
        if !keys.is_file() || !scores.is_file() {
            continue;
        }
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let argv = [
            "spoofeval",
            "evaluate",
            "--task",
            p.task,
            "--phase",
            "evaluation",
            "--keys",
            keys.to_str().unwrap(),
            "--scores",
            scores.to_str().unwrap(),
            "--format",
            "structured",
        ];
        let code = spoofeval_cli::run_with(argv, &mut out, &mut err);
        ensure(code == 0, || {
            format!(
                "{} evaluate exited {code}: {}",
                p.task,
                String::from_utf8_lossy(&err)
            )
        })?;
        let doc: serde_json::Value = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
        if let Some(want) = p.min_tdcf {
            let got = doc["pooled_min_tdcf"].as_f64().ok_or("missing min t-DCF")?;
            ensure((got - want).abs() <= 0.0005, || {
                format!("{} {} min t-DCF {got:.4} vs {want}", p.task, p.system)
            })?;
        }
        if let Some(want) = p.eer {
            let got = doc["pooled_eer"].as_f64().ok_or("missing EER")?;
            ensure((got - want).abs() <= 0.05, || {
                format!("{} {} EER {got:.2}% vs {want}%", p.task, p.system)
            })?;
        }
        checked.push(format!("{} {}", p.task, p.system));
    }
    if checked.is_empty() {
        return Ok(Verdict::Skip(format!(
            "no <TASK>/keys.txt + scores.txt under {}",
            root.display()
        )));
    }
    Ok(Verdict::Pass(format!("reproduced {}", checked.join(", "))))
}
