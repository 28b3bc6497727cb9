//! End-to-end experiments on the reference two-cone union, a Gaussian
//! alternating-minimization baseline, random cone generators for testing,
//! and CSV output.

use std::io::Write;
use std::time::Instant;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::cone::{ConeGenerator, UnionOfCones};
use crate::design::{design_ensemble, DesignOptions, MeasurementEnsemble};
use crate::detect::{
    default_zero_tol, detect, detect_noisy, CountingOracle, DetectorBank, ExactOracle, GaussianNoiseOracle,
    MeasurementOracle,
};
use crate::error::{Error, Result};
use crate::feasibility::{FeasibilityConfig, PairDetector};
use crate::linalg::{dot, min_entry, norm2, Matrix, PivotedQr};
use crate::recover::{recover, recover_noisy, recover_signal, relative_error_db};
use crate::rng::{derive_seed, seeded, Rng};
use crate::stability::success_probability_at;

pub const REFERENCE_DELTA: f64 = 0.0542;
pub const COMBO_A: f64 = 0.115;
pub const COMBO_B: f64 = 0.885;
/// Target coefficients are drawn from `U(0, TARGET_COEFF_MAX)`.
pub const TARGET_COEFF_MAX: f64 = 0.01;
pub const ALTMIN_ITERS: usize = 200;
const TIMING_REPS: usize = 5;

/// `x₁,₁`: a leading 1 followed by `(−1)^{l−1} / (3 l³ (l − 1))` for `l = 2..n`.
fn x11(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|l| {
            if l == 1 {
                1.0
            } else {
                let lf = l as f64;
                let sign = if (l - 1) % 2 == 0 { 1.0 } else { -1.0 };
                sign / (3.0 * lf * lf * lf * (lf - 1.0))
            }
        })
        .collect()
}

/// The `n × (2n − 1)` generator of the first reference cone.
pub fn reference_x1(n: usize) -> Matrix {
    let base = x11(n);
    let mut cols = Vec::with_capacity(2 * n - 1);
    cols.push(base.clone());
    for k in 1..n {
        let mut c = base.clone();
        c[k] = -c[k];
        cols.push(c);
    }
    for j in 1..n {
        let c: Vec<f64> = (0..n).map(|i| COMBO_B * cols[0][i] - COMBO_A * cols[j][i]).collect();
        cols.push(c);
    }
    Matrix::from_columns(n, &cols).expect("finite generator")
}

/// The `n × n` generator of the second reference cone: rows `2`, `−1`, then
/// `(−1)^{i+j}` (1-based).
pub fn reference_x2(n: usize) -> Matrix {
    let rows: Vec<Vec<f64>> = (1..=n)
        .map(|i| {
            (1..=n)
                .map(|j| match i {
                    1 => 2.0,
                    2 => -1.0,
                    _ if (i + j) % 2 == 0 => 1.0,
                    _ => -1.0,
                })
                .collect()
        })
        .collect();
    Matrix::from_rows(&rows).expect("finite generator")
}

#[derive(Clone, Debug)]
pub struct ReferenceUnion {
    pub n: usize,
    pub x1: ConeGenerator,
    pub x2: ConeGenerator,
    /// Detector `(1, 2, 0, …, 0)`: positive on the first cone, null on the second.
    pub g: Vec<f64>,
    pub q1: Vec<f64>,
    pub delta: f64,
}

impl ReferenceUnion {
    pub fn cone(&self, k: usize) -> Result<&ConeGenerator> {
        match k {
            0 => Ok(&self.x1),
            1 => Ok(&self.x2),
            _ => Err(Error::invalid(format!("cone index {k} out of range for a two-cone union"))),
        }
    }

    pub fn union(&self) -> UnionOfCones {
        UnionOfCones::new(vec![self.x1.clone(), self.x2.clone()]).expect("same dimension")
    }

    pub fn detector(&self) -> PairDetector {
        PairDetector {
            positive_cone: 0,
            null_cone: 1,
            g: self.g.clone(),
            min_positive_margin: min_entry(&self.x1.measure(&self.g)),
        }
    }

    pub fn bank(&self) -> DetectorBank {
        DetectorBank::new(self.n, 2, vec![self.detector()]).expect("complete two-cone bank")
    }

    /// Ensembles for both cones: the first with `q₁ = e₁` and the fixed
    /// shift, the second with `q₁ = e₁` and the default shift.
    pub fn ensembles(&self, seed: u64) -> Result<[MeasurementEnsemble; 2]> {
        let cfg = FeasibilityConfig::default();
        let first = design_ensemble(
            &self.x1,
            &DesignOptions {
                q1: Some(self.q1.clone()),
                delta_override: Some(self.delta),
                seed,
                cone_ref: Some("x1".into()),
            },
            &cfg,
        )?;
        let second = design_ensemble(
            &self.x2,
            &DesignOptions {
                q1: Some(self.q1.clone()),
                delta_override: None,
                seed,
                cone_ref: Some("x2".into()),
            },
            &cfg,
        )?;
        Ok([first, second])
    }
}

/// Builds the reference union and checks its defining properties with the
/// known certificates: `X₁ᵀg ≻ 0`, `X₂ᵀg = 0`, and `e₁` measuring both cones
/// strictly positively.
pub fn build_reference_union(n: usize) -> Result<ReferenceUnion> {
    if n < 3 {
        return Err(Error::invalid(format!("the reference union needs n >= 3, got {n}")));
    }
    let x1 = ConeGenerator::new(reference_x1(n))?;
    let x2 = ConeGenerator::new(reference_x2(n))?;
    let mut g = vec![0.0; n];
    g[0] = 1.0;
    g[1] = 2.0;
    let mut q1 = vec![0.0; n];
    q1[0] = 1.0;

    if !(min_entry(&x1.measure(&g)) > 0.0) {
        return Err(Error::Construction("detector is not positive on the first cone".into()));
    }
    if x2.measure(&g).iter().any(|&v| v != 0.0) {
        return Err(Error::Construction("detector does not annihilate the second cone".into()));
    }
    if !(min_entry(&x1.measure(&q1)) > 0.0 && min_entry(&x2.measure(&q1)) > 0.0) {
        return Err(Error::Construction("e1 is not interior to both cones".into()));
    }
    Ok(ReferenceUnion {
        n,
        x1,
        x2,
        g,
        q1,
        delta: REFERENCE_DELTA,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Target {
    pub cone: usize,
    pub coeffs: Vec<f64>,
    pub z: Vec<f64>,
}

/// `z = Σ εₖ xₖ` over the generators of `cone` with `εₖ ~ U(0, 0.01)`.
pub fn random_target(u: &ReferenceUnion, cone: usize, seed: u64) -> Result<Target> {
    let x = u.cone(cone)?;
    let mut rng = seeded(seed);
    let coeffs: Vec<f64> = (0..x.len())
        .map(|_| loop {
            let v = rng.random_range(0.0..TARGET_COEFF_MAX);
            if v > 0.0 {
                break v;
            }
        })
        .collect();
    let z = x.combine(&coeffs)?;
    Ok(Target { cone, coeffs, z })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Noiseless,
    Noisy,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub mode: Mode,
    pub snr_db: Vec<f64>,
    pub seed: u64,
    /// Cone the targets are drawn from.
    pub target_cone: usize,
    /// Adds wall-clock columns; the output is then no longer reproducible.
    pub timing: bool,
    /// Runs the alternating-minimization baseline with `altmin_factor · n`
    /// Gaussian measurements.
    pub altmin: bool,
    pub altmin_factor: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_values: vec![50],
            trials: 100,
            mode: Mode::Noiseless,
            snr_db: vec![10.0, 20.0, 30.0, 40.0, 50.0, 60.0],
            seed: 0,
            target_cone: 0,
            timing: false,
            altmin: false,
            altmin_factor: 4,
        }
    }
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.n_values.is_empty() {
            return Err(Error::invalid("no signal sizes given"));
        }
        if self.mode == Mode::Noisy && self.snr_db.is_empty() {
            return Err(Error::invalid("noisy mode needs at least one SNR"));
        }
        if self.target_cone > 1 {
            return Err(Error::invalid(format!("target cone {} out of range", self.target_cone)));
        }
        if self.altmin && self.altmin_factor == 0 {
            return Err(Error::invalid("altmin measurement factor must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoiselessRow {
    pub n: usize,
    pub trial: usize,
    pub cone: usize,
    pub detected: usize,
    pub measurements: usize,
    pub error_db: Option<f64>,
    pub altmin_error_db: Option<f64>,
    pub recover_seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoisyRow {
    pub n: usize,
    pub snr_db: f64,
    pub trial: usize,
    pub cone: usize,
    pub detected: usize,
    pub measurements: usize,
    pub sigma: f64,
    pub error_db: Option<f64>,
    /// Lower bound on the detection success probability at this noise level.
    pub detection_bound: f64,
    pub altmin_error_db: Option<f64>,
}

fn with_trial<T>(n: usize, trial: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Trial {
        n,
        trial,
        source: Box::new(e),
    })
}

fn median_seconds(mut f: impl FnMut() -> Result<()>) -> Result<f64> {
    f()?;
    let mut times = Vec::with_capacity(TIMING_REPS);
    for _ in 0..TIMING_REPS {
        let start = Instant::now();
        f()?;
        times.push(start.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    Ok(times[TIMING_REPS / 2])
}

/// Wall-clock median over five runs (after one warmup) of the fast recovery
/// path for fixed measurements.
pub fn time_recovery(e: &MeasurementEnsemble, b: &[f64]) -> Result<f64> {
    median_seconds(|| recover_signal(e, b).map(|_| ()))
}

fn query_all<O: MeasurementOracle>(e: &MeasurementEnsemble, oracle: &mut O) -> Vec<f64> {
    e.vectors().iter().map(|f| oracle.query(f)).collect()
}

/// Noiseless two-step runs: one detector query, then `γ` recovery queries.
pub fn run_noiseless(cfg: &ExperimentConfig) -> Result<Vec<NoiselessRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &n in &cfg.n_values {
        let u = build_reference_union(n)?;
        let bank = u.bank();
        let ensembles = u.ensembles(cfg.seed)?;
        let mut block: Vec<NoiselessRow> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                with_trial(n, trial, {
                    let seed = derive_seed(cfg.seed, n as u64, trial as u64);
                    noiseless_trial(&u, &bank, &ensembles, cfg, seed, trial)
                })
            })
            .collect::<Result<_>>()?;
        block.sort_by_key(|r| r.trial);
        rows.extend(block);
    }
    Ok(rows)
}

fn noiseless_trial(
    u: &ReferenceUnion,
    bank: &DetectorBank,
    ensembles: &[MeasurementEnsemble; 2],
    cfg: &ExperimentConfig,
    seed: u64,
    trial: usize,
) -> Result<NoiselessRow> {
    let target = random_target(u, cfg.target_cone, seed)?;
    let mut oracle = CountingOracle::new(ExactOracle::new(target.z.clone()));
    // The harness knows the target scale; a deployed detector would not.
    let tol = default_zero_tol(bank, norm2(&target.z));
    let det = detect(bank, &mut oracle, tol)?;
    let e = &ensembles[det.cone];
    let b = query_all(e, &mut oracle);
    let rec = recover(e, &b)?;
    let recover_seconds = if cfg.timing {
        Some(time_recovery(e, &b)?)
    } else {
        None
    };
    let altmin_error_db = if cfg.altmin {
        let x = altmin_baseline(cfg.altmin_factor * u.n, &target.z, ALTMIN_ITERS, derive_seed(seed, 1, 0));
        relative_error_db(&target.z, &x)
    } else {
        None
    };
    Ok(NoiselessRow {
        n: u.n,
        trial,
        cone: target.cone,
        detected: det.cone,
        measurements: oracle.count(),
        error_db: relative_error_db(&target.z, &rec.z),
        altmin_error_db,
        recover_seconds,
    })
}

/// `σ` such that `10 log₁₀(‖Mᵀz‖² / (m σ²)) = snr_db` for `M = [g, f₁ … f_γ]`.
pub fn sigma_for_snr(g: &[f64], e: &MeasurementEnsemble, z: &[f64], snr_db: f64) -> f64 {
    let mut energy = dot(g, z).powi(2);
    for f in e.vectors() {
        energy += dot(f, z).powi(2);
    }
    let m = (e.gamma() + 1) as f64;
    (energy / (m * 10f64.powf(snr_db / 10.0))).sqrt()
}

/// Noisy two-step runs over an SNR sweep. Every magnitude, detection and
/// recovery alike, gets independent `N(0, σ²)` noise. Detection uses the
/// threshold rule with `r = 0.9 ×` the target's true coefficient sum.
pub fn run_noisy(cfg: &ExperimentConfig) -> Result<Vec<NoisyRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &n in &cfg.n_values {
        let u = build_reference_union(n)?;
        let bank = u.bank();
        let ensembles = u.ensembles(cfg.seed)?;
        for (si, &snr) in cfg.snr_db.iter().enumerate() {
            let mut block: Vec<NoisyRow> = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    let seed = derive_seed(cfg.seed, n as u64, ((si as u64) << 32) | trial as u64);
                    with_trial(n, trial, noisy_trial(&u, &bank, &ensembles, cfg, snr, seed, trial))
                })
                .collect::<Result<_>>()?;
            block.sort_by_key(|r| r.trial);
            rows.extend(block);
        }
    }
    Ok(rows)
}

fn noisy_trial(
    u: &ReferenceUnion,
    bank: &DetectorBank,
    ensembles: &[MeasurementEnsemble; 2],
    cfg: &ExperimentConfig,
    snr: f64,
    seed: u64,
    trial: usize,
) -> Result<NoisyRow> {
    let target = random_target(u, cfg.target_cone, seed)?;
    let sigma = sigma_for_snr(&u.g, &ensembles[target.cone], &target.z, snr);
    let noise = GaussianNoiseOracle::new(target.z.clone(), sigma, derive_seed(seed, 2, 0))?;
    let mut oracle = CountingOracle::new(noise);
    let r = 0.9 * target.coeffs.iter().sum::<f64>();
    let det = detect_noisy(bank, &mut oracle, r, sigma)?;
    let e = &ensembles[det.cone];
    let b = query_all(e, &mut oracle);
    let rec = recover_noisy(e, &b)?;
    let altmin_error_db = if cfg.altmin {
        let x = altmin_baseline_noisy(
            cfg.altmin_factor * u.n,
            &target.z,
            ALTMIN_ITERS,
            sigma,
            derive_seed(seed, 1, 0),
        );
        relative_error_db(&target.z, &x)
    } else {
        None
    };
    Ok(NoisyRow {
        n: u.n,
        snr_db: snr,
        trial,
        cone: target.cone,
        detected: det.cone,
        measurements: oracle.count(),
        sigma,
        error_db: relative_error_db(&target.z, &rec.z),
        detection_bound: det.success_probability,
        altmin_error_db,
    })
}

/// Alternating minimization from noiseless Gaussian magnitudes.
pub fn altmin_baseline(n_measurements: usize, target: &[f64], iters: usize, seed: u64) -> Vec<f64> {
    altmin_baseline_noisy(n_measurements, target, iters, 0.0, seed)
}

/// Alternating minimization with `m` i.i.d. standard Gaussian measurement
/// vectors and magnitudes perturbed by `N(0, σ²)`. Spectral initialization
/// from the rows best aligned with the target, then alternating sign
/// estimation and least squares until `iters` rounds or a relative change
/// below `1e-10`. Returns the iterate with the smallest magnitude residual.
pub fn altmin_baseline_noisy(n_measurements: usize, target: &[f64], iters: usize, sigma: f64, seed: u64) -> Vec<f64> {
    let n = target.len();
    if n == 0 || n_measurements == 0 || norm2(target) == 0.0 {
        return vec![0.0; n];
    }
    let m = n_measurements;
    let mut rng = seeded(seed);
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let a = Matrix::from_rows(&rows).expect("finite Gaussian matrix");
    let y: Vec<f64> = a
        .matvec(target)
        .iter()
        .map(|v| {
            let noise = if sigma > 0.0 {
                let draw: f64 = StandardNormal.sample(&mut rng);
                sigma * draw
            } else {
                0.0
            };
            v.abs() + noise
        })
        .collect();

    let mut x = spectral_init(&a, &y, &mut rng);
    let qr = PivotedQr::new(&a);
    let residual = |x: &[f64]| {
        let ax = a.matvec(x);
        norm2(&ax.iter().zip(&y).map(|(p, q)| p.abs() - q).collect::<Vec<_>>())
    };
    let mut best = x.clone();
    let mut best_res = residual(&x);
    for _ in 0..iters {
        let signed: Vec<f64> = a
            .matvec(&x)
            .iter()
            .zip(&y)
            .map(|(p, q)| if *p >= 0.0 { *q } else { -*q })
            .collect();
        let next = qr.solve(&signed);
        let change = norm2(&next.iter().zip(&x).map(|(p, q)| p - q).collect::<Vec<_>>());
        let scale = norm2(&next).max(f64::MIN_POSITIVE);
        x = next;
        let res = residual(&x);
        if res < best_res {
            best_res = res;
            best.clone_from(&x);
        }
        if change / scale < 1e-10 {
            break;
        }
    }
    best
}

fn spectral_init(a: &Matrix, y: &[f64], rng: &mut Rng) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    // Leading eigenvector of Σ aᵢaᵢᵀ/‖aᵢ‖² over the ⌈m/6⌉ rows with the
    // largest normalized magnitudes.
    let row_sq: Vec<f64> = (0..m).map(|i| dot(a.row(i), a.row(i))).collect();
    let ratio: Vec<f64> = (0..m).map(|i| y[i] / row_sq[i].sqrt()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| ratio[j].total_cmp(&ratio[i]));
    let mut weights = vec![0.0; m];
    for &i in &order[..m.div_ceil(6)] {
        weights[i] = 1.0 / row_sq[i];
    }
    let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    for _ in 0..100 {
        let av = a.matvec(&v);
        let scaled: Vec<f64> = av.iter().zip(&weights).map(|(p, w)| p * w).collect();
        let next = a.tr_matvec(&scaled);
        let nn = norm2(&next);
        if nn == 0.0 {
            break;
        }
        v = next.into_iter().map(|t| t / nn).collect();
    }
    let scale = (y.iter().map(|t| t * t).sum::<f64>() / m as f64).sqrt();
    v.into_iter().map(|t| t * scale).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    /// `ε / (2σ²)`.
    pub x: f64,
    pub gamma: usize,
    pub probability: f64,
}

pub const DEFAULT_GAMMAS: [usize; 3] = [81, 801, 8001];

/// Grid `start, start + step, …` ending exactly at `stop`.
pub fn grid(start: f64, step: f64, stop: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::invalid(format!("bad grid {start}:{step}:{stop}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    let mut pts: Vec<f64> = (0..=count).map(|i| start + i as f64 * step).collect();
    if let Some(last) = pts.last_mut() {
        if (stop - *last).abs() <= 1e-9 * step {
            *last = stop;
        } else {
            pts.push(stop);
        }
    }
    Ok(pts)
}

/// The success-probability formula tabulated over `grid` for each `γ`.
pub fn stability_curves(gammas: &[usize], grid: &[f64]) -> Result<Vec<CurveRow>> {
    let mut rows = Vec::with_capacity(gammas.len() * grid.len());
    for &gamma in gammas {
        for &x in grid {
            rows.push(CurveRow {
                x,
                gamma,
                probability: success_probability_at(gamma, x)?,
            });
        }
    }
    Ok(rows)
}

/// Seventeen significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_noiseless_csv<W: Write>(rows: &[NoiselessRow], timing: bool, altmin: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["n", "trial", "cone", "detected", "measurements", "error_db"];
    if altmin {
        header.push("altmin_error_db");
    }
    if timing {
        header.push("recover_seconds");
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.n.to_string(),
            r.trial.to_string(),
            r.cone.to_string(),
            r.detected.to_string(),
            r.measurements.to_string(),
            fmt_opt(r.error_db),
        ];
        if altmin {
            rec.push(fmt_opt(r.altmin_error_db));
        }
        if timing {
            rec.push(fmt_opt(r.recover_seconds));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_noisy_csv<W: Write>(rows: &[NoisyRow], altmin: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "n",
        "snr_db",
        "trial",
        "cone",
        "detected",
        "measurements",
        "sigma",
        "error_db",
        "detection_bound",
    ];
    if altmin {
        header.push("altmin_error_db");
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.n.to_string(),
            fmt_f64(r.snr_db),
            r.trial.to_string(),
            r.cone.to_string(),
            r.detected.to_string(),
            r.measurements.to_string(),
            fmt_f64(r.sigma),
            fmt_opt(r.error_db),
            fmt_f64(r.detection_bound),
        ];
        if altmin {
            rec.push(fmt_opt(r.altmin_error_db));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curves_csv<W: Write>(rows: &[CurveRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "gamma", "probability"])?;
    for r in rows {
        w.write_record([fmt_f64(r.x), r.gamma.to_string(), fmt_f64(r.probability)])?;
    }
    w.flush()?;
    Ok(())
}

/// Mean error (dB) and mean recovery time per signal size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeSummary {
    pub n: usize,
    pub trials: usize,
    pub mean_error_db: f64,
    pub max_error_db: f64,
    pub mean_measurements: f64,
    pub mean_recover_seconds: Option<f64>,
}

pub fn summarize_noiseless(rows: &[NoiselessRow]) -> Vec<SizeSummary> {
    let mut sizes: Vec<usize> = rows.iter().map(|r| r.n).collect();
    sizes.dedup();
    sizes
        .into_iter()
        .map(|n| {
            let sel: Vec<&NoiselessRow> = rows.iter().filter(|r| r.n == n).collect();
            let errs: Vec<f64> = sel.iter().filter_map(|r| r.error_db).collect();
            let times: Vec<f64> = sel.iter().filter_map(|r| r.recover_seconds).collect();
            SizeSummary {
                n,
                trials: sel.len(),
                mean_error_db: errs.iter().sum::<f64>() / errs.len().max(1) as f64,
                max_error_db: errs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean_measurements: sel.iter().map(|r| r.measurements as f64).sum::<f64>() / sel.len() as f64,
                mean_recover_seconds: (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64),
            }
        })
        .collect()
}

/// Random cones for property tests.
pub mod synthetic {
    use super::*;

    fn random_orthogonal(n: usize, rng: &mut Rng) -> Matrix {
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| StandardNormal.sample(rng)).collect())
            .collect();
        let qr = PivotedQr::new(&Matrix::from_columns(n, &cols).expect("finite"));
        let q: Vec<Vec<f64>> = (0..n).map(|j| qr.q_column(j)).collect();
        Matrix::from_columns(n, &q).expect("finite")
    }

    /// `m` generators of rank `gamma` in `ℝⁿ` that all make a positive inner
    /// product with a hidden direction, so the overlap property holds.
    pub fn random_overlap_cone(n: usize, gamma: usize, m: usize, rng: &mut Rng) -> Result<ConeGenerator> {
        if gamma == 0 || gamma > n || m < gamma {
            return Err(Error::invalid(format!("need 1 <= gamma <= n and m >= gamma, got n={n}, gamma={gamma}, m={m}")));
        }
        let q = random_orthogonal(n, rng);
        let basis: Vec<Vec<f64>> = (0..gamma).map(|j| q.column(j)).collect();
        let dir: Vec<f64> = (0..gamma).map(|_| StandardNormal.sample(rng)).collect();
        for _ in 0..20 {
            let cols: Vec<Vec<f64>> = (0..m)
                .map(|_| {
                    let mut c: Vec<f64> = (0..gamma).map(|_| StandardNormal.sample(rng)).collect();
                    if dot(&c, &dir) < 0.0 {
                        c.iter_mut().for_each(|v| *v = -*v);
                    }
                    (0..n).map(|i| (0..gamma).map(|k| basis[k][i] * c[k]).sum()).collect()
                })
                .collect();
            let cone = ConeGenerator::from_columns(n, &cols)?;
            if cone.rank() == gamma {
                return Ok(cone);
            }
        }
        Err(Error::Construction("could not draw a generator of the requested rank".into()))
    }

    /// A union in which cone `k` lives in its own block of coordinates of a
    /// randomly rotated frame, with a planted positive direction per block.
    /// Any block's leading axis separates its cone from every other cone.
    pub fn planted_union(ranks: &[usize], rng: &mut Rng) -> Result<UnionOfCones> {
        if ranks.len() < 2 || ranks.contains(&0) {
            return Err(Error::invalid("need at least two cones of positive rank"));
        }
        let n: usize = ranks.iter().sum();
        let q = random_orthogonal(n, rng);
        let mut offset = 0;
        let mut cones = Vec::with_capacity(ranks.len());
        for &r in ranks {
            let m = r + rng.random_range(0..=2 * r);
            let cols: Vec<Vec<f64>> = (0..m)
                .map(|j| {
                    let mut local = vec![0.0; n];
                    local[offset] = rng.random_range(0.5..1.5);
                    for i in 1..r {
                        // The first r generators get a dominant distinct axis so the rank is r.
                        local[offset + i] = if j < r && i == j {
                            rng.random_range(1.0..2.0)
                        } else {
                            rng.random_range(-0.5..0.5)
                        };
                    }
                    q.matvec(&local)
                })
                .collect();
            cones.push(ConeGenerator::from_columns(n, &cols)?);
            offset += r;
        }
        UnionOfCones::new(cones)
    }

    /// The linear subspace spanned by `dim` random directions, written as the
    /// cone over `±` each direction.
    pub fn subspace_cone(n: usize, dim: usize, rng: &mut Rng) -> Result<ConeGenerator> {
        let mut cols = Vec::with_capacity(2 * dim);
        for _ in 0..dim {
            let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
            cols.push(v.iter().map(|t| -t).collect());
            cols.push(v);
        }
        ConeGenerator::from_columns(n, &cols)
    }

    /// A member of cone `k`: nonnegative coefficients, at least one positive.
    pub fn cone_member(cone: &ConeGenerator, rng: &mut Rng) -> Vec<f64> {
        let theta: Vec<f64> = (0..cone.len()).map(|_| rng.random_range(0.0..1.0)).collect();
        cone.combine(&theta).expect("nonnegative coefficients")
    }
}
