//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Every tolerance is a named constant below.

#![allow(clippy::needless_range_loop)]

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;

use conepr::design::{design_ensemble, validate_ensemble, DesignOptions, MeasurementEnsemble};
use conepr::detect::{default_zero_tol, detect, CountingOracle, ExactOracle, MeasurementOracle};
use conepr::feasibility::{detectability_check, FeasibilityConfig};
use conepr::harness::synthetic::{cone_member, planted_union, random_overlap_cone, subspace_cone};
use conepr::harness::{
    build_reference_union, grid, run_noiseless, run_noisy, stability_curves, ExperimentConfig, Mode, DEFAULT_GAMMAS,
    REFERENCE_DELTA,
};
use conepr::linalg::{norm2, Isometry};
use conepr::recover::{recover, recover_signal};
use conepr::rng::{derive_seed, seeded};
use conepr::spectral::{circulant_rows, dft};
use conepr::stability::{chi2_cdf, gaussian_cdf, monte_carlo_stability, success_probability_at};

// Criterion 1
const EXACT_DB: f64 = -100.0;
const EXACT_SIZES: [usize; 7] = [8, 16, 50, 64, 100, 128, 256];
const EXACT_TRIALS: usize = 100;
const EXACT_SECONDS: f64 = 10.0;
// Criterion 2
const BUDGET_CONES: [usize; 3] = [2, 3, 5];
const BUDGET_TARGETS: usize = 10;
// Criterion 3
const DETECT_UNIONS: usize = 50;
const DETECT_TARGETS: usize = 1000;
const SUBSPACE_PAIRS: usize = 20;
// Criterion 4
const DIAG_TOL: f64 = 1e-12;
const DFT_REL_TOL: f64 = 1e-12;
const DFT_VECTORS: usize = 100;
// Criterion 5
const EQUIV_TOL: f64 = 1e-10;
const EQUIV_TRIPLES: usize = 500;
// Criterion 6
const VALID_CONES: usize = 200;
// Criterion 7
const MC_TRIALS: usize = 10_000;
const CHI2_CLOSED_TOL: f64 = 1e-10;
const CHI2_QUAD_TOL: f64 = 1e-8;
// Criterion 8
const NOISY_N: usize = 50;
const NOISY_TRIALS_PER_CONE: usize = 5_000;
// Criterion 9
const CURVE_REL_DEVIATION: f64 = 0.3;
const CURVE_ORACLE_TOL: f64 = 1e-9;
const MONOTONE_SLACK: f64 = 1e-12;
// Criterion 10
const SCALING_SMALL: usize = 512;
const SCALING_LARGE: usize = 4096;
const SCALING_MAX_RATIO: f64 = 12.0;
const SCALING_ROUNDS: usize = 15;
const SCALING_REPS: usize = 100;

const SEED: u64 = 20_240_601;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        n_values: EXACT_SIZES.to_vec(),
        trials: EXACT_TRIALS,
        mode: Mode::Noiseless,
        seed: SEED,
        ..Default::default()
    };
    let rows = run_noiseless(&cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    ensure(rows.len() == EXACT_SIZES.len() * EXACT_TRIALS, || "missing rows".into())?;
    let mut worst = f64::NEG_INFINITY;
    for r in &rows {
        let db = r.error_db.ok_or("zero target")?;
        worst = worst.max(db);
        ensure(r.detected == 0, || format!("n={} trial={} misdetected", r.n, r.trial))?;
        ensure(r.measurements == r.n + 1, || {
            format!("n={} trial={} used {} measurements", r.n, r.trial, r.measurements)
        })?;
    }
    ensure(worst <= EXACT_DB, || format!("worst error {worst:.1} dB"))?;
    ensure(elapsed < EXACT_SECONDS, || format!("took {elapsed:.2} s"))?;
    Ok(format!("worst {worst:.1} dB over {} trials, {elapsed:.2} s", rows.len()))
}

fn criterion_2() -> Outcome {
    let cfg = FeasibilityConfig::default();
    let mut checked = 0;
    for &l in &BUDGET_CONES {
        for gamma in 2..=16usize {
            let mut rng = seeded(derive_seed(SEED, l as u64, gamma as u64));
            // First cone carries the requested rank; the others are drawn at or below it.
            let ranks: Vec<usize> = (0..l)
                .map(|k| if k == 0 { gamma } else { rng.random_range(1..=gamma) })
                .collect();
            let u = planted_union(&ranks, &mut rng).map_err(|e| e.to_string())?;
            let report = detectability_check(&u, &cfg).map_err(|e| e.to_string())?;
            let bank = report.bank.ok_or_else(|| format!("planted union L={l} gamma={gamma} not detectable"))?;
            let ensembles: Vec<MeasurementEnsemble> = u
                .cones()
                .iter()
                .map(|c| {
                    design_ensemble(c, &DesignOptions { seed: SEED, ..Default::default() }, &cfg)
                        .map_err(|e| e.to_string())
                })
                .collect::<Result<_, _>>()?;
            for t in 0..BUDGET_TARGETS {
                let k = t % l;
                let z = cone_member(u.cone(k), &mut rng);
                let mut oracle = CountingOracle::new(ExactOracle::new(z.clone()));
                let det = detect(&bank, &mut oracle, default_zero_tol(&bank, norm2(&z))).map_err(|e| e.to_string())?;
                ensure(det.cone == k, || format!("L={l} gamma={gamma}: detected {} for cone {k}", det.cone))?;
                let e = &ensembles[det.cone];
                let b: Vec<f64> = e.vectors().iter().map(|f| oracle.query(f)).collect();
                recover(e, &b).map_err(|e| e.to_string())?;
                let expected = (l - 1) + u.cone(k).rank();
                ensure(oracle.count() == expected, || {
                    format!("L={l} gamma={gamma}: {} queries, expected {expected}", oracle.count())
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} trials used exactly (L-1)+gamma queries"))
}

fn criterion_3() -> Outcome {
    let cfg = FeasibilityConfig::default();
    let mut targets = 0;
    for u_idx in 0..DETECT_UNIONS {
        let mut rng = seeded(derive_seed(SEED, 3, u_idx as u64));
        let l = rng.random_range(2..=4usize);
        let ranks: Vec<usize> = (0..l).map(|_| rng.random_range(1..=3usize)).collect();
        let u = planted_union(&ranks, &mut rng).map_err(|e| e.to_string())?;
        let report = detectability_check(&u, &cfg).map_err(|e| e.to_string())?;
        let bank = report.bank.ok_or_else(|| format!("union {u_idx} reported not detectable"))?;
        for t in 0..DETECT_TARGETS {
            let k = t % l;
            let z = cone_member(u.cone(k), &mut rng);
            let det = detect(&bank, &mut ExactOracle::new(z.clone()), default_zero_tol(&bank, norm2(&z)))
                .map_err(|e| e.to_string())?;
            ensure(det.cone == k, || format!("union {u_idx} target {t}: detected {} not {k}", det.cone))?;
            targets += 1;
        }
    }
    for p in 0..SUBSPACE_PAIRS {
        let mut rng = seeded(derive_seed(SEED, 33, p as u64));
        let n = rng.random_range(3..=6usize);
        let d1 = rng.random_range(1..n);
        let d2 = rng.random_range(1..n);
        let u = conepr::cone::UnionOfCones::new(vec![
            subspace_cone(n, d1, &mut rng).map_err(|e| e.to_string())?,
            subspace_cone(n, d2, &mut rng).map_err(|e| e.to_string())?,
        ])
        .map_err(|e| e.to_string())?;
        let report = detectability_check(&u, &cfg).map_err(|e| e.to_string())?;
        ensure(!report.detectable, || format!("subspace pair {p} reported detectable"))?;
    }
    Ok(format!(
        "{targets} targets over {DETECT_UNIONS} unions detected; {SUBSPACE_PAIRS} subspace pairs rejected"
    ))
}

fn direct_dft(v: &[f64]) -> Vec<Complex64> {
    let n = v.len();
    (0..n)
        .map(|k| {
            v.iter()
                .enumerate()
                .map(|(l, &x)| {
                    let ang = -2.0 * std::f64::consts::PI * ((l * k) % n) as f64 / n as f64;
                    Complex64::new(x * ang.cos(), x * ang.sin())
                })
                .sum()
        })
        .collect()
}

fn criterion_4() -> Outcome {
    let mut rng = seeded(derive_seed(SEED, 4, 0));
    let mut worst_diag: f64 = 0.0;
    let mut worst_dft: f64 = 0.0;
    for n in 2..=32usize {
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ph = dft(&p);
        let w = |e: usize| {
            let ang = -2.0 * std::f64::consts::PI * (e % n) as f64 / n as f64;
            Complex64::new(ang.cos(), ang.sin())
        };
        let rows = circulant_rows(&p);
        // n F diag(p̂) F* with F = (1/n)[W^{jk}].
        for (j, row) in rows.iter().enumerate() {
            for (l, &entry) in row.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, pk) in ph.iter().enumerate() {
                    acc += w(j * k) * pk * w(l * k).conj();
                }
                let rebuilt = acc * (n as f64) / (n as f64 * n as f64);
                worst_diag = worst_diag.max((rebuilt - entry).norm());
                worst_diag = worst_diag.max(rebuilt.im.abs());
            }
        }
        for _ in 0..DFT_VECTORS {
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let fast = dft(&v);
            let slow = direct_dft(&v);
            let scale = slow.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let err = fast.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
            worst_dft = worst_dft.max(err);
        }
    }
    ensure(worst_diag <= DIAG_TOL, || format!("diagonalization error {worst_diag:e}"))?;
    ensure(worst_dft <= DFT_REL_TOL, || format!("dft relative error {worst_dft:e}"))?;
    Ok(format!("diagonalization {worst_diag:.1e}, dft {worst_dft:.1e}"))
}

/// Gaussian elimination with partial pivoting.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

fn criterion_5() -> Outcome {
    let cfg = FeasibilityConfig::default();
    let mut worst: f64 = 0.0;
    for t in 0..EQUIV_TRIPLES {
        let mut rng = seeded(derive_seed(SEED, 5, t as u64));
        let gamma = rng.random_range(2..=16usize);
        let n = gamma + rng.random_range(0..=3usize);
        let m = rng.random_range(gamma..=3 * gamma);
        let x = random_overlap_cone(n, gamma, m, &mut rng).map_err(|e| e.to_string())?;
        let e = design_ensemble(&x, &DesignOptions { seed: t as u64, ..Default::default() }, &cfg)
            .map_err(|e| format!("triple {t}: {e}"))?;
        let z = cone_member(&x, &mut rng);
        let b = e.measure(&z);
        let fast = recover(&e, &b).map_err(|e| e.to_string())?.z;
        let reduced: Vec<Vec<f64>> = e.vectors().iter().map(|f| e.iso().apply(f)).collect();
        let w = gauss_solve(reduced, b);
        let dense = e.iso().lift(&w);
        let diff = fast.iter().zip(&dense).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(diff);
    }
    ensure(worst <= EQUIV_TOL, || format!("max-abs difference {worst:e}"))?;
    Ok(format!("max-abs difference {worst:.1e} over {EQUIV_TRIPLES} triples"))
}

fn criterion_6() -> Outcome {
    let cfg = FeasibilityConfig::default();
    for t in 0..VALID_CONES {
        let mut rng = seeded(derive_seed(SEED, 6, t as u64));
        let gamma = rng.random_range(2..=32usize);
        let n = gamma + rng.random_range(0..=2usize);
        let m = rng.random_range(gamma..=3 * gamma);
        let x = random_overlap_cone(n, gamma, m, &mut rng).map_err(|e| e.to_string())?;
        let e = design_ensemble(&x, &DesignOptions { seed: t as u64, ..Default::default() }, &cfg)
            .map_err(|e| format!("cone {t}: {e}"))?;
        let report = validate_ensemble(&e, &x).map_err(|e| e.to_string())?;
        if !report.passed() {
            let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
            return Err(format!("cone {t} (gamma={gamma}, m={m}) failed {failed:?}"));
        }
    }
    Ok(format!("{VALID_CONES} ensembles valid"))
}

/// Adaptive Simpson quadrature.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

fn criterion_7() -> Outcome {
    let closed = (chi2_cdf(2, 2.0).map_err(|e| e.to_string())? - (1.0 - (-1.0f64).exp())).abs();
    ensure(closed <= CHI2_CLOSED_TOL, || format!("Phi_2(2) off by {closed:e}"))?;
    // Φ₁(1) = ∫₀¹ x^{-1/2} e^{-x/2} / √(2π) dx; with x = u² the integrand is smooth.
    let quad = simpson(
        &|u: f64| 2.0 * (-u * u / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt(),
        0.0,
        1.0,
        1e-14,
    );
    let quad_err = (chi2_cdf(1, 1.0).map_err(|e| e.to_string())? - quad).abs();
    ensure(quad_err <= CHI2_QUAD_TOL, || format!("Phi_1(1) off by {quad_err:e}"))?;

    let cfg = FeasibilityConfig::default();
    let mut lines = Vec::new();
    for gamma in [8usize, 16] {
        let u = build_reference_union(gamma).map_err(|e| e.to_string())?;
        let e = design_ensemble(
            &u.x1,
            &DesignOptions {
                q1: Some(u.q1.clone()),
                delta_override: Some(REFERENCE_DELTA),
                ..Default::default()
            },
            &cfg,
        )
        .map_err(|e| e.to_string())?;
        for sigma in [1e-3, 1e-2] {
            for mult in [0.1, 1.0, 10.0] {
                let eps = sigma * sigma * mult;
                let rep = monte_carlo_stability(&e, &u.x1, sigma, eps, MC_TRIALS, derive_seed(SEED, 7, gamma as u64))
                    .map_err(|e| e.to_string())?;
                ensure(rep.covers(), || {
                    format!(
                        "gamma={gamma} sigma={sigma} eps={eps}: coverage {} < {} - {}",
                        rep.coverage, rep.success_probability, rep.three_sigma
                    )
                })?;
                lines.push(format!("{:.3}/{:.3}", rep.coverage, rep.success_probability));
            }
        }
    }
    Ok(format!("coverage/bound {}", lines.join(" ")))
}

fn criterion_8() -> Outcome {
    let snrs: Vec<f64> = (1..=6).map(|k| 10.0 * k as f64).collect();
    let mut per_snr = vec![(0usize, 0usize, 0.0f64); snrs.len()];
    for cone in 0..2 {
        let cfg = ExperimentConfig {
            n_values: vec![NOISY_N],
            trials: NOISY_TRIALS_PER_CONE,
            mode: Mode::Noisy,
            snr_db: snrs.clone(),
            seed: derive_seed(SEED, 8, cone as u64),
            target_cone: cone,
            ..Default::default()
        };
        let rows = run_noisy(&cfg).map_err(|e| e.to_string())?;
        for r in rows {
            let i = snrs.iter().position(|&s| s == r.snr_db).unwrap();
            per_snr[i].0 += 1;
            per_snr[i].1 += (r.detected == r.cone) as usize;
            per_snr[i].2 += r.detection_bound;
        }
    }
    let mut parts = Vec::new();
    for (snr, (count, hits, bound_sum)) in snrs.iter().zip(per_snr) {
        let rate = hits as f64 / count as f64;
        let bound = bound_sum / count as f64;
        let se = (bound * (1.0 - bound) / count as f64).sqrt();
        ensure(rate >= bound - 3.0 * se, || {
            format!("SNR {snr}: success {rate} below bound {bound} - 3*{se}")
        })?;
        parts.push(format!("{snr:.0}dB {rate:.4}>={bound:.4}"));
    }
    // The bound itself is the Gaussian CDF at the threshold; check one value by hand.
    let probe = gaussian_cdf(1.0, 0.0, 1.0).map_err(|e| e.to_string())?;
    ensure((probe - 0.841_344_746_068_542_9).abs() < 1e-12, || "gaussian cdf probe".into())?;
    Ok(parts.join(", "))
}

/// `ln k!` by direct summation.
fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// Chi-square CDF with an even number of degrees: `1 − e^{−t/2} Σ_{k<s/2} (t/2)^k / k!`.
fn chi2_even_oracle(s: usize, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let x = t / 2.0;
    let terms: Vec<f64> = (0..s / 2).map(|k| k as f64 * x.ln() - x - ln_factorial(k)).collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tail = max.exp() * terms.iter().map(|l| (l - max).exp()).sum::<f64>();
    1.0 - tail
}

/// Chi-square CDF with one degree: `erf(√(t/2))` by its Taylor series.
fn chi2_one_oracle(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let x = (t / 2.0).sqrt();
    let mut term = x;
    let mut sum = x;
    for n in 1..200 {
        term *= -x * x / n as f64;
        sum += term / (2 * n + 1) as f64;
    }
    2.0 / std::f64::consts::PI.sqrt() * sum
}

fn criterion_9() -> Outcome {
    let xs = grid(0.0, 0.1, 10.0).map_err(|e| e.to_string())?;
    let rows = stability_curves(&DEFAULT_GAMMAS, &xs).map_err(|e| e.to_string())?;
    let curve = |g: usize| -> Vec<f64> { rows.iter().filter(|r| r.gamma == g).map(|r| r.probability).collect() };
    let curves: Vec<Vec<f64>> = DEFAULT_GAMMAS.iter().map(|&g| curve(g)).collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (g, c) in DEFAULT_GAMMAS.iter().zip(&curves) {
        ensure(c.len() == xs.len(), || "grid endpoints missing".into())?;
        ensure(c.windows(2).all(|w| w[1] >= w[0] - MONOTONE_SLACK), || format!("gamma={g} not monotone"))?;
        lo = lo.min(c.iter().copied().fold(f64::INFINITY, f64::min));
        hi = hi.max(c.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
    let mut worst_oracle: f64 = 0.0;
    for r in &rows {
        let s = r.gamma - 1;
        let gx = r.gamma as f64 * r.x;
        let small = gx / s as f64;
        let oracle = -1.0 + chi2_even_oracle(s, s as f64 + gx) + chi2_one_oracle(1.0 + small)
            - chi2_even_oracle(s, s as f64 - gx)
            - chi2_one_oracle(1.0 - small);
        worst_oracle = worst_oracle.max((oracle - r.probability).abs());
        let direct = success_probability_at(r.gamma, r.x).map_err(|e| e.to_string())?;
        ensure(direct == r.probability, || "curve differs from direct evaluation".into())?;
    }
    ensure(worst_oracle <= CURVE_ORACLE_TOL, || format!("oracle mismatch {worst_oracle:e}"))?;
    let range = hi - lo;
    let mut dev: f64 = 0.0;
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            for (a, b) in curves[i].iter().zip(&curves[j]) {
                dev = dev.max((a - b).abs());
            }
        }
    }
    ensure(dev <= CURVE_REL_DEVIATION * range, || {
        format!("max deviation {dev:.3} exceeds {CURVE_REL_DEVIATION} x range {range:.3}")
    })?;
    Ok(format!(
        "monotone; max pairwise deviation {dev:.3} = {:.3} x range; oracle {worst_oracle:.1e}",
        dev / range
    ))
}

fn reference_ensemble(n: usize) -> MeasurementEnsemble {
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    MeasurementEnsemble::from_parts(Isometry::identity(n), e1, vec![REFERENCE_DELTA; n - 1]).unwrap()
}

fn batch_seconds(e: &MeasurementEnsemble, b: &[f64], reps: usize) -> f64 {
    let start = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(recover_signal(e, std::hint::black_box(b)).unwrap());
    }
    start.elapsed().as_secs_f64() / reps as f64
}

fn criterion_10() -> Outcome {
    let mut rng = seeded(derive_seed(SEED, 10, 0));
    let cases: Vec<(MeasurementEnsemble, Vec<f64>)> = [SCALING_SMALL, SCALING_LARGE]
        .into_iter()
        .map(|n| {
            let e = reference_ensemble(n);
            let mut z: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.01)).collect();
            z[0] = 1.0;
            let b = e.measure(&z);
            (e, b)
        })
        .collect();
    for (e, b) in &cases {
        batch_seconds(e, b, 20);
    }
    // Alternate sizes so background load hits both; keep each minimum.
    let mut timings = [f64::INFINITY; 2];
    for _ in 0..SCALING_ROUNDS {
        for (t, (e, b)) in timings.iter_mut().zip(&cases) {
            *t = t.min(batch_seconds(e, b, SCALING_REPS));
        }
    }
    let ratio = timings[1] / timings[0];
    let detail = format!(
        "{:.1} us at n={SCALING_SMALL}, {:.1} us at n={SCALING_LARGE}, ratio {ratio:.2}",
        timings[0] * 1e6,
        timings[1] * 1e6
    );
    ensure(ratio <= SCALING_MAX_RATIO, || detail.clone())?;
    Ok(detail)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("exact recovery", criterion_1),
        ("measurement budget", criterion_2),
        ("detection correctness", criterion_3),
        ("circulant diagonalization", criterion_4),
        ("oracle equivalence", criterion_5),
        ("ensemble validity", criterion_6),
        ("stability coverage", criterion_7),
        ("noisy detection", criterion_8),
        ("stability curves", criterion_9),
        ("scaling", criterion_10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let label = format!("criterion {:>2} {name}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|p| label.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {label}: {detail} [{secs:.2} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {label}: {detail} [{secs:.2} s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
