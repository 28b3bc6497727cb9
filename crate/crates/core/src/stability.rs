//! Noise analytics: chi-square and Gaussian distribution functions, the
//! success-probability formula, the recovery error bound, and an empirical
//! check of both.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::cone::ConeGenerator;
use crate::design::MeasurementEnsemble;
use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::recover::{recover, recover_noisy, recover_signal, sign_invariant_error};
use crate::rng::{derive_seed, seeded};
use crate::spectral::dft;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection keeps the approximation in its accurate range.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn iteration_cap(a: f64) -> usize {
    200 + (20.0 * a.sqrt()).ceil() as usize
}

fn prefactor(a: f64, x: f64) -> f64 {
    (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn series_p(a: f64, x: f64) -> Result<f64> {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..iteration_cap(a) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-15 {
            return Ok(sum * prefactor(a, x));
        }
    }
    Err(Error::Domain(format!("incomplete gamma series did not converge (a = {a}, x = {x})")))
}

fn continued_fraction_q(a: f64, x: f64) -> Result<f64> {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=iteration_cap(a) {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-15 {
            return Ok(h * prefactor(a, x));
        }
    }
    Err(Error::Domain(format!("incomplete gamma fraction did not converge (a = {a}, x = {x})")))
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || x.is_nan() {
        return Err(Error::Domain(format!("P(a, x) needs a > 0, got a = {a}, x = {x}")));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        series_p(a, x)
    } else {
        Ok(1.0 - continued_fraction_q(a, x)?)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 − P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || x.is_nan() {
        return Err(Error::Domain(format!("Q(a, x) needs a > 0, got a = {a}, x = {x}")));
    }
    if x <= 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        Ok(1.0 - series_p(a, x)?)
    } else {
        continued_fraction_q(a, x)
    }
}

/// `Φ_s(t)`, the chi-square distribution function with `s` degrees of freedom.
pub fn chi2_cdf(s: usize, t: f64) -> Result<f64> {
    if s == 0 {
        return Err(Error::Domain("chi-square needs at least one degree of freedom".into()));
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    gamma_p(s as f64 / 2.0, t / 2.0)
}

/// Normal distribution function with mean `mu` and standard deviation `sigma`.
pub fn gaussian_cdf(x: f64, mu: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || x.is_nan() || !mu.is_finite() {
        return Err(Error::Domain(format!("need sigma > 0 and finite mean, got mu = {mu}, sigma = {sigma}")));
    }
    let u = (x - mu) / sigma;
    let half_sq = 0.5 * u * u;
    if u >= 0.0 {
        Ok(1.0 - 0.5 * gamma_q(0.5, half_sq)?)
    } else {
        Ok(0.5 * gamma_q(0.5, half_sq)?)
    }
}

/// The success-probability formula as a function of `x = ε / (2σ²)`:
///
/// `−1 + Φ_{γ−1}(γ−1 + γx) + Φ₁(1 + γx/(γ−1)) − Φ_{γ−1}(γ−1 − γx) − Φ₁(1 − γx/(γ−1))`.
///
/// It is a bound, not a probability, and tends to −1 as `x → 0⁺`.
pub fn success_probability_at(gamma: usize, x: f64) -> Result<f64> {
    if gamma < 2 {
        return Err(Error::Domain(format!("need gamma >= 2, got {gamma}")));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("ratio must be nonnegative, got {x}")));
    }
    let s = gamma - 1;
    let g = gamma as f64;
    let sf = s as f64;
    let big = g * x;
    let small = g * x / sf;
    Ok(-1.0 + chi2_cdf(s, sf + big)? + chi2_cdf(1, 1.0 + small)?
        - chi2_cdf(s, sf - big)?
        - chi2_cdf(1, 1.0 - small)?)
}

pub fn success_probability(gamma: usize, sigma: f64, epsilon: f64) -> Result<f64> {
    if !(sigma > 0.0) || !(epsilon > 0.0) {
        return Err(Error::Domain(format!("need sigma > 0 and epsilon > 0, got {sigma}, {epsilon}")));
    }
    success_probability_at(gamma, epsilon / (2.0 * sigma * sigma))
}

/// `min_k |dft(p̃₁)_k| / γ`, the smallest coefficient of the anchor under the
/// `1/γ`-scaled transform.
pub fn min_scaled_anchor_coefficient(e: &MeasurementEnsemble) -> f64 {
    let g = e.gamma() as f64;
    dft(e.anchor()).iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min) / g
}

/// `√(2‖n‖² + δ_max[(γ−1)ε + ((γ−1)/γ)‖n‖²]) / min|FFT(𝔓f₁)|`.
pub fn error_bound(e: &MeasurementEnsemble, noise_norm: f64, epsilon: f64) -> Result<f64> {
    if !(noise_norm >= 0.0) || !(epsilon >= 0.0) {
        return Err(Error::Domain(format!(
            "noise norm and epsilon must be nonnegative, got {noise_norm}, {epsilon}"
        )));
    }
    let denom = min_scaled_anchor_coefficient(e);
    if !(denom > 0.0) {
        return Err(Error::Singular {
            frequencies: Vec::new(),
        });
    }
    let g = e.gamma() as f64;
    let n2 = noise_norm * noise_norm;
    let inner = 2.0 * n2 + e.max_delta() * ((g - 1.0) * epsilon + (g - 1.0) / g * n2);
    Ok(inner.sqrt() / denom)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub gamma: usize,
    pub sigma: f64,
    pub epsilon: f64,
    /// Raw formula value, in `[−1, 1]`.
    pub probability: f64,
    pub probability_clamped: f64,
    pub error_bound: f64,
    pub min_fft_anchor: f64,
    pub max_delta: f64,
}

pub fn stability_report(
    e: &MeasurementEnsemble,
    sigma: f64,
    epsilon: f64,
    noise_norm: f64,
) -> Result<StabilityReport> {
    let probability = success_probability(e.gamma(), sigma, epsilon)?;
    Ok(StabilityReport {
        gamma: e.gamma(),
        sigma,
        epsilon,
        probability,
        probability_clamped: probability.clamp(0.0, 1.0),
        error_bound: error_bound(e, noise_norm, epsilon)?,
        min_fft_anchor: min_scaled_anchor_coefficient(e),
        max_delta: e.max_delta(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub trials: usize,
    /// Fraction of trials whose error met the bound for their own noise draw.
    pub coverage: f64,
    pub success_probability: f64,
    /// `3 √(p(1−p)/trials)` with `p` the clamped formula value.
    pub three_sigma: f64,
    pub max_error: f64,
    pub mean_error: f64,
}

impl MonteCarloReport {
    pub fn covers(&self) -> bool {
        self.coverage >= self.success_probability - self.three_sigma
    }
}

pub const MIN_TRIALS: usize = 100;

/// Recovers random cone targets from magnitudes perturbed by `N(0, σ²)` and
/// counts how often the error stays within `error_bound`.
pub fn monte_carlo_stability(
    e: &MeasurementEnsemble,
    x: &ConeGenerator,
    sigma: f64,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloReport> {
    if trials < MIN_TRIALS {
        return Err(Error::invalid(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    if !(sigma >= 0.0) || !(epsilon > 0.0) {
        return Err(Error::invalid(format!("need sigma >= 0 and epsilon > 0, got {sigma}, {epsilon}")));
    }
    if x.dim() != e.ambient_dim() || x.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: e.ambient_dim(),
            found: x.dim(),
        });
    }
    let m = x.len();
    let gamma = e.gamma();
    let outcomes: Vec<Result<(bool, f64)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeded(derive_seed(seed, gamma as u64, t as u64));
            let theta: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0) / m as f64).collect();
            let z = x.combine(&theta)?;
            let clean = e.measure(&z);
            let noise: Vec<f64> = if sigma > 0.0 {
                let normal = Normal::new(0.0, sigma).expect("positive sigma");
                (0..gamma).map(|_| normal.sample(&mut rng)).collect()
            } else {
                vec![0.0; gamma]
            };
            let noisy: Vec<f64> = clean.iter().zip(&noise).map(|(a, b)| a + b).collect();
            let rec = recover_noisy(e, &noisy)?;
            let err = sign_invariant_error(&z, &rec.z);
            let bound = error_bound(e, norm2(&noise), epsilon)?;
            Ok((err <= bound, err))
        })
        .collect();
    let mut hits = 0usize;
    let mut max_error: f64 = 0.0;
    let mut sum = 0.0;
    for o in outcomes {
        let (hit, err) = o?;
        hits += hit as usize;
        max_error = max_error.max(err);
        sum += err;
    }
    let p = if sigma > 0.0 {
        success_probability(gamma, sigma, epsilon)?
    } else {
        1.0
    };
    let pc = p.clamp(0.0, 1.0);
    Ok(MonteCarloReport {
        trials,
        coverage: hits as f64 / trials as f64,
        success_probability: p,
        three_sigma: 3.0 * (pc * (1.0 - pc) / trials as f64).sqrt(),
        max_error,
        mean_error: sum / trials as f64,
    })
}

/// Difference between the error observed when recovering `z` from
/// `|⟨z, fₖ⟩| + nₖ` and the error predicted by pushing `n` alone through the
/// linear recovery map.
pub fn propagation_mismatch(e: &MeasurementEnsemble, z: &[f64], noise: &[f64]) -> Result<f64> {
    let clean = e.measure(z);
    let exact = recover(e, &clean)?.z;
    let noisy: Vec<f64> = clean.iter().zip(noise).map(|(a, b)| a + b).collect();
    let observed: Vec<f64> = recover_noisy(e, &noisy)?
        .z
        .iter()
        .zip(&exact)
        .map(|(a, b)| a - b)
        .collect();
    let (predicted, _) = recover_signal(e, noise)?;
    Ok(observed
        .iter()
        .zip(&predicted)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}
