//! Identifying which cone of a union holds a hidden target, using one
//! magnitude measurement per exclusion.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::PairDetector;
use crate::linalg::{dot, norm2};
use crate::stability::gaussian_cdf;

/// One detector per unordered pair of cones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BankRepr", into = "BankRepr")]
pub struct DetectorBank {
    n: usize,
    cone_count: usize,
    detectors: BTreeMap<(usize, usize), PairDetector>,
}

#[derive(Serialize, Deserialize)]
struct BankRepr {
    n: usize,
    cone_count: usize,
    detectors: Vec<PairDetector>,
}

impl TryFrom<BankRepr> for DetectorBank {
    type Error = Error;

    fn try_from(r: BankRepr) -> Result<Self> {
        DetectorBank::new(r.n, r.cone_count, r.detectors)
    }
}

impl From<DetectorBank> for BankRepr {
    fn from(b: DetectorBank) -> Self {
        BankRepr {
            n: b.n,
            cone_count: b.cone_count,
            detectors: b.detectors.into_values().collect(),
        }
    }
}

fn key(i: usize, j: usize) -> (usize, usize) {
    (i.min(j), i.max(j))
}

impl DetectorBank {
    /// Requires exactly one detector for each pair of distinct cones.
    pub fn new(n: usize, cone_count: usize, detectors: Vec<PairDetector>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for det in detectors {
            let (p, q) = (det.positive_cone, det.null_cone);
            if p == q || p >= cone_count || q >= cone_count {
                return Err(Error::invalid(format!(
                    "detector pair ({p}, {q}) is not a pair of distinct cones below {cone_count}"
                )));
            }
            if det.g.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: det.g.len(),
                });
            }
            if map.insert(key(p, q), det).is_some() {
                return Err(Error::invalid(format!("duplicate detector for pair ({p}, {q})")));
            }
        }
        for i in 0..cone_count {
            for j in i + 1..cone_count {
                if !map.contains_key(&(i, j)) {
                    return Err(Error::MissingDetector(i, j));
                }
            }
        }
        Ok(DetectorBank {
            n,
            cone_count,
            detectors: map,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn cone_count(&self) -> usize {
        self.cone_count
    }

    pub fn get(&self, i: usize, j: usize) -> Result<&PairDetector> {
        self.detectors
            .get(&key(i, j))
            .ok_or(Error::MissingDetector(i.min(j), i.max(j)))
    }

    pub fn detectors(&self) -> impl Iterator<Item = &PairDetector> {
        self.detectors.values()
    }

    pub fn max_detector_norm(&self) -> f64 {
        self.detectors().map(|d| norm2(&d.g)).fold(0.0, f64::max)
    }
}

/// Source of magnitude readings `|⟨g, z⟩|` for a hidden target `z`.
pub trait MeasurementOracle {
    fn query(&mut self, g: &[f64]) -> f64;
}

impl<O: MeasurementOracle + ?Sized> MeasurementOracle for &mut O {
    fn query(&mut self, g: &[f64]) -> f64 {
        (**self).query(g)
    }
}

/// Noiseless readings of a stored target.
#[derive(Clone, Debug)]
pub struct ExactOracle {
    z: Vec<f64>,
}

impl ExactOracle {
    pub fn new(z: Vec<f64>) -> Self {
        ExactOracle { z }
    }
}

impl MeasurementOracle for ExactOracle {
    fn query(&mut self, g: &[f64]) -> f64 {
        dot(g, &self.z).abs()
    }
}

/// Readings `|⟨g, z⟩| + n` with `n ~ N(0, σ²)` drawn fresh per query.
#[derive(Clone, Debug)]
pub struct GaussianNoiseOracle {
    z: Vec<f64>,
    noise: Normal<f64>,
    rng: ChaCha8Rng,
}

impl GaussianNoiseOracle {
    pub fn new(z: Vec<f64>, sigma: f64, seed: u64) -> Result<Self> {
        let noise = Normal::new(0.0, sigma)
            .map_err(|_| Error::invalid(format!("noise level must be finite and nonnegative, got {sigma}")))?;
        Ok(GaussianNoiseOracle {
            z,
            noise,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }
}

impl MeasurementOracle for GaussianNoiseOracle {
    fn query(&mut self, g: &[f64]) -> f64 {
        dot(g, &self.z).abs() + self.noise.sample(&mut self.rng)
    }
}

/// Wraps an oracle and counts its queries.
#[derive(Clone, Debug)]
pub struct CountingOracle<O> {
    inner: O,
    count: usize,
}

impl<O: MeasurementOracle> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        CountingOracle { inner, count: 0 }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: MeasurementOracle> MeasurementOracle for CountingOracle<O> {
    fn query(&mut self, g: &[f64]) -> f64 {
        self.count += 1;
        self.inner.query(g)
    }
}

/// `10⁻⁹ · max‖g‖₂ · target_scale`, a surrogate for the exact zero test.
pub fn default_zero_tol(bank: &DetectorBank, target_scale: f64) -> f64 {
    1e-9 * bank.max_detector_norm() * target_scale
}

#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    pub cone: usize,
    pub queries: usize,
    /// Every reading fell at or below the zero tolerance. Either the target is
    /// zero or it sits in a cone that is the null side of every pair it met.
    pub all_readings_null: bool,
}

/// Sequential exclusion: the champion starts at cone 0 and meets each later
/// cone once, so exactly `L − 1` queries are issued.
pub fn detect<O: MeasurementOracle>(
    bank: &DetectorBank,
    oracle: &mut O,
    zero_tol: f64,
) -> Result<Detection> {
    if !(zero_tol >= 0.0) {
        return Err(Error::invalid(format!("zero tolerance must be nonnegative, got {zero_tol}")));
    }
    let mut champion = 0;
    let mut all_null = true;
    for challenger in 1..bank.cone_count() {
        let det = bank.get(champion, challenger)?;
        let reading = oracle.query(&det.g);
        let vanished = reading <= zero_tol;
        all_null &= vanished;
        let champion_positive = det.positive_cone == champion;
        if champion_positive == vanished {
            champion = challenger;
        }
    }
    Ok(Detection {
        cone: champion,
        queries: bank.cone_count().saturating_sub(1),
        all_readings_null: all_null,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoisyDetection {
    pub cone: usize,
    pub reading: f64,
    /// `T = (r/2) · min(Xₚᵀ g)`.
    pub threshold: f64,
    /// Lower bound on the probability that the decision is correct.
    pub success_probability: f64,
}

/// Threshold rule for a two-cone union: a reading at or above `T` rules out
/// the null cone, a reading below it rules out the positive cone. `r` is a
/// lower bound on the target's coefficient sum.
pub fn detect_noisy<O: MeasurementOracle>(
    bank: &DetectorBank,
    oracle: &mut O,
    r: f64,
    sigma: f64,
) -> Result<NoisyDetection> {
    if bank.cone_count() != 2 {
        return Err(Error::Precondition(format!(
            "the threshold rule is defined for two cones, got {}",
            bank.cone_count()
        )));
    }
    if !(r > 0.0) {
        return Err(Error::invalid(format!("coefficient-sum bound must be positive, got {r}")));
    }
    if !(sigma >= 0.0) {
        return Err(Error::invalid(format!("noise level must be nonnegative, got {sigma}")));
    }
    let det = bank.get(0, 1)?;
    let threshold = 0.5 * r * det.min_positive_margin;
    let reading = oracle.query(&det.g);
    let cone = if reading >= threshold {
        det.positive_cone
    } else {
        det.null_cone
    };
    let success_probability = if sigma > 0.0 {
        detection_success_probability(r, det.min_positive_margin, sigma)?
    } else {
        1.0
    };
    Ok(NoisyDetection {
        cone,
        reading,
        threshold,
        success_probability,
    })
}

/// `Φ((r/2)·margin)` for a zero-mean Gaussian with standard deviation `σ`.
pub fn detection_success_probability(r: f64, min_positive_margin: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || !(r > 0.0) {
        return Err(Error::Domain(format!("need r > 0 and sigma > 0, got r = {r}, sigma = {sigma}")));
    }
    gaussian_cdf(0.5 * r * min_positive_margin, 0.0, sigma)
}

/// Threshold detection for more than two cones. Not part of the supported
/// surface: each exclusion applies the two-cone rule to its own pair.
pub mod experimental {
    use super::*;

    pub fn detect_noisy_multi<O: MeasurementOracle>(
        bank: &DetectorBank,
        oracle: &mut O,
        r: f64,
    ) -> Result<usize> {
        if !(r > 0.0) {
            return Err(Error::invalid(format!("coefficient-sum bound must be positive, got {r}")));
        }
        let mut champion = 0;
        for challenger in 1..bank.cone_count() {
            let det = bank.get(champion, challenger)?;
            let threshold = 0.5 * r * det.min_positive_margin;
            let winner = if oracle.query(&det.g) >= threshold {
                det.positive_cone
            } else {
                det.null_cone
            };
            champion = winner;
        }
        Ok(champion)
    }
}
