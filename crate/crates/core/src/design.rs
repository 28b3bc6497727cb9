//! Measurement ensembles for a single cone: `γ = rank(X)` vectors whose
//! magnitudes against any cone member determine it through one circulant
//! solve.
//!
//! With the reduced generator `Y = 𝔓X` and a full-support anchor `p̃₁`, the
//! reduced vectors are `f̃₁ = p̃₁` and `f̃ₖ = δₖ p̃₁ + p̃ₖ`, where `p̃ₖ` is row
//! `k − 1` of `circ(p̃₁ᵀ)`. Each is lifted back by `fₖ = 𝔓ᵀ f̃ₖ`.

use serde::{Deserialize, Serialize};

use crate::anchor::{find_interior_point, full_support_anchor, AnchorVector};
use crate::cone::ConeGenerator;
use crate::error::{Error, Result};
use crate::feasibility::FeasibilityConfig;
use crate::linalg::{self, dot, min_entry, norm2, Isometry, Matrix};
use crate::rng::seeded;
use crate::spectral::{dft, dft_support, DEFAULT_SUPPORT_TOL};

const ISOMETRY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnsembleRepr", into = "EnsembleRepr")]
pub struct MeasurementEnsemble {
    iso: Isometry,
    anchor: Vec<f64>,
    deltas: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    cone_ref: Option<String>,
    anchor_margin: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct EnsembleRepr {
    gamma: usize,
    iso: Matrix,
    anchor: Vec<f64>,
    deltas: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cone_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    anchor_margin: Option<f64>,
}

impl TryFrom<EnsembleRepr> for MeasurementEnsemble {
    type Error = Error;

    fn try_from(r: EnsembleRepr) -> Result<Self> {
        let iso = Isometry::from_matrix(r.iso, ISOMETRY_TOL)?;
        if r.gamma != iso.gamma() {
            return Err(Error::DimensionMismatch {
                expected: iso.gamma(),
                found: r.gamma,
            });
        }
        let n = iso.ambient_dim();
        if r.vectors.len() != r.gamma || r.vectors.iter().any(|v| v.len() != n) {
            return Err(Error::invalid(format!(
                "ensemble needs {} vectors of length {n}",
                r.gamma
            )));
        }
        let mut e = MeasurementEnsemble::from_parts(iso, r.anchor, r.deltas)?;
        e.vectors = r.vectors;
        e.cone_ref = r.cone_ref;
        e.anchor_margin = r.anchor_margin;
        Ok(e)
    }
}

impl From<MeasurementEnsemble> for EnsembleRepr {
    fn from(e: MeasurementEnsemble) -> Self {
        EnsembleRepr {
            gamma: e.gamma(),
            iso: e.iso.matrix(),
            anchor: e.anchor,
            deltas: e.deltas,
            vectors: e.vectors,
            cone_ref: e.cone_ref,
            anchor_margin: e.anchor_margin,
        }
    }
}

impl MeasurementEnsemble {
    /// Assembles the vectors from an isometry, a reduced anchor and the
    /// `γ − 1` shifts. The anchor's support is not checked here.
    pub fn from_parts(iso: Isometry, anchor: Vec<f64>, deltas: Vec<f64>) -> Result<Self> {
        let gamma = iso.gamma();
        if anchor.len() != gamma {
            return Err(Error::DimensionMismatch {
                expected: gamma,
                found: anchor.len(),
            });
        }
        if deltas.len() + 1 != gamma {
            return Err(Error::DimensionMismatch {
                expected: gamma - 1,
                found: deltas.len(),
            });
        }
        if anchor.iter().chain(&deltas).any(|v| !v.is_finite()) {
            return Err(Error::invalid("anchor and shifts must be finite"));
        }
        let vectors = reduced_vectors(&anchor, &deltas).map(|f| iso.lift(&f)).collect();
        Ok(MeasurementEnsemble {
            iso,
            anchor,
            deltas,
            vectors,
            cone_ref: None,
            anchor_margin: None,
        })
    }

    pub fn with_cone_ref(mut self, cone_ref: impl Into<String>) -> Self {
        self.cone_ref = Some(cone_ref.into());
        self
    }

    pub fn gamma(&self) -> usize {
        self.anchor.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.iso.ambient_dim()
    }

    pub fn iso(&self) -> &Isometry {
        &self.iso
    }

    /// `p̃₁ ∈ ℝ^γ`.
    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    /// `δ₂ … δ_γ`.
    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn max_delta(&self) -> f64 {
        self.deltas.iter().copied().fold(0.0, f64::max)
    }

    /// `f₁ … f_γ ∈ ℝⁿ`.
    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn cone_ref(&self) -> Option<&str> {
        self.cone_ref.as_deref()
    }

    pub fn anchor_margin(&self) -> Option<f64> {
        self.anchor_margin
    }

    /// `|⟨z, fₖ⟩|` for every `k`.
    pub fn measure(&self, z: &[f64]) -> Vec<f64> {
        self.vectors.iter().map(|f| dot(f, z).abs()).collect()
    }
}

/// `f̃₁ = p̃₁` and `f̃ₖ = δₖ p̃₁ + p̃ₖ`, with `p̃ₖ[l] = p̃₁[(l − k + 1) mod γ]`.
fn reduced_vectors<'a>(anchor: &'a [f64], deltas: &'a [f64]) -> impl Iterator<Item = Vec<f64>> + 'a {
    let gamma = anchor.len();
    std::iter::once(anchor.to_vec()).chain(deltas.iter().enumerate().map(move |(i, &d)| {
        let shift = i + 1;
        (0..gamma)
            .map(|l| d * anchor[l] + anchor[(l + gamma - shift) % gamma])
            .collect()
    }))
}

#[derive(Clone, Debug, Default)]
pub struct DesignOptions {
    /// Interior point in the ambient space; found by linear programming if absent.
    pub q1: Option<Vec<f64>>,
    /// One shift used for every `δₖ`.
    pub delta_override: Option<f64>,
    pub seed: u64,
    pub cone_ref: Option<String>,
}

/// `‖row‖₂ · maxᵢ‖yᵢ‖₂ / min(Yᵀp)`; any larger shift keeps every measurement
/// of every generator positive.
pub fn delta_bound(y: &Matrix, anchor: &[f64], row: &[f64]) -> Result<f64> {
    let kappa = min_entry(&y.tr_matvec(anchor));
    if !(kappa > 0.0) {
        return Err(Error::ZeroMargin(kappa));
    }
    Ok(norm2(row) * y.max_column_norm() / kappa)
}

pub fn design_ensemble(
    x: &ConeGenerator,
    opts: &DesignOptions,
    cfg: &FeasibilityConfig,
) -> Result<MeasurementEnsemble> {
    if let Some(d) = opts.delta_override {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::invalid(format!("shift must be positive, got {d}")));
        }
    }
    let iso = linalg::span_isometry(x.matrix(), None)?;
    let y = iso.reduce(x.matrix());
    let q_reduced = match &opts.q1 {
        Some(q1) => {
            if q1.len() != x.dim() {
                return Err(Error::DimensionMismatch {
                    expected: x.dim(),
                    found: q1.len(),
                });
            }
            let m = x.measure(q1);
            if m.is_empty() || !(min_entry(&m) > 0.0) {
                return Err(Error::invalid("q1 does not measure every generator positively"));
            }
            iso.apply(q1)
        }
        None => find_interior_point(&ConeGenerator::new(y.clone())?, cfg)?,
    };
    let mut rng = seeded(opts.seed);
    let anchor = full_support_anchor(&y, &q_reduced, &mut rng)?;

    let gamma = iso.gamma();
    let delta = match opts.delta_override {
        Some(d) => d,
        None => {
            // Every circulant row is a cyclic shift of the anchor, so the
            // bound is the same for all k.
            let b = delta_bound(&y, &anchor.p, &anchor.p)?;
            if b > 0.0 {
                1.01 * b
            } else {
                1.0
            }
        }
    };
    let deltas = vec![delta; gamma - 1];
    let mut e = MeasurementEnsemble::from_parts(iso, anchor.p.clone(), deltas)?;
    e.anchor_margin = Some(anchor.positivity_margin);
    e.cone_ref = opts.cone_ref.clone();
    Ok(e)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Smallest slack observed; negative when the check fails.
    pub margin: f64,
    /// Offending indices (vectors or generators, per check).
    pub failing: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Recomputes every ensemble invariant against the generator.
pub fn validate_ensemble(e: &MeasurementEnsemble, x: &ConeGenerator) -> Result<ValidationReport> {
    if x.dim() != e.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: e.ambient_dim(),
            found: x.dim(),
        });
    }
    let gamma = e.gamma();
    let mut checks = Vec::new();

    let rank = x.rank();
    checks.push(Check {
        name: "count",
        passed: rank == gamma && e.vectors.len() == gamma,
        margin: gamma as f64 - rank as f64,
        failing: vec![],
    });

    let spec = dft(&e.anchor);
    let max = spec.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let rel: Vec<f64> = spec
        .iter()
        .map(|c| if max > 0.0 { c.norm() / max } else { 0.0 })
        .collect();
    let vanishing: Vec<usize> = (0..gamma).filter(|&k| rel[k] <= DEFAULT_SUPPORT_TOL).collect();
    checks.push(Check {
        name: "anchor_support",
        passed: dft_support(&e.anchor, DEFAULT_SUPPORT_TOL) == gamma,
        margin: rel.iter().copied().fold(f64::INFINITY, f64::min) - DEFAULT_SUPPORT_TOL,
        failing: vanishing,
    });

    let y = e.iso.reduce(x.matrix());
    let anchor_meas = y.tr_matvec(&e.anchor);
    checks.push(sign_check("anchor_positivity", &anchor_meas));

    let mut worst = f64::INFINITY;
    let mut bad = Vec::new();
    for (k, f) in e.vectors.iter().enumerate() {
        let m = min_entry(&x.measure(f));
        worst = worst.min(m);
        if !(m > 0.0) {
            bad.push(k);
        }
    }
    checks.push(Check {
        name: "positivity",
        passed: bad.is_empty() && !x.is_empty(),
        margin: worst,
        failing: bad,
    });

    let expected: Vec<Vec<f64>> = reduced_vectors(&e.anchor, &e.deltas).map(|f| e.iso.lift(&f)).collect();
    let scale = expected.iter().map(|v| linalg::norm_inf(v)).fold(0.0, f64::max).max(1.0);
    let mut dev_max: f64 = 0.0;
    let mut off = Vec::new();
    for (k, (got, want)) in e.vectors.iter().zip(&expected).enumerate() {
        let dev = got.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        dev_max = dev_max.max(dev);
        if dev > 1e-10 * scale {
            off.push(k);
        }
    }
    checks.push(Check {
        name: "structure",
        passed: off.is_empty(),
        margin: 1e-10 * scale - dev_max,
        failing: off,
    });

    checks.push(sign_check("deltas_positive", &e.deltas));

    let stacked = Matrix::from_columns(e.ambient_dim(), &e.vectors)?;
    let r = linalg::rank(&stacked, None)?;
    checks.push(Check {
        name: "independence",
        passed: r == gamma,
        margin: r as f64 - gamma as f64,
        failing: vec![],
    });

    Ok(ValidationReport { checks })
}

fn sign_check(name: &'static str, values: &[f64]) -> Check {
    let failing: Vec<usize> = (0..values.len()).filter(|&i| !(values[i] > 0.0)).collect();
    Check {
        name,
        passed: failing.is_empty(),
        margin: values.iter().copied().fold(f64::INFINITY, f64::min),
        failing,
    }
}

/// The ensemble's anchor re-evaluated against `x`.
pub fn ensemble_anchor(e: &MeasurementEnsemble, x: &ConeGenerator) -> AnchorVector {
    AnchorVector::evaluate(&e.iso.reduce(x.matrix()), e.anchor.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_cone() -> ConeGenerator {
        ConeGenerator::new(Matrix::identity(2)).unwrap()
    }

    #[test]
    fn identity_example_by_hand() {
        let opts = DesignOptions {
            q1: Some(vec![2.0, 1.0]),
            ..Default::default()
        };
        let e = design_ensemble(&identity_cone(), &opts, &FeasibilityConfig::default()).unwrap();
        assert_eq!(e.gamma(), 2);
        let d = 1.01 * 5f64.sqrt();
        assert!((e.deltas()[0] - d).abs() < 1e-14);
        assert_eq!(e.vectors()[0], vec![2.0, 1.0]);
        let f2 = &e.vectors()[1];
        assert!((f2[0] - (2.0 * d + 1.0)).abs() < 1e-14 && (f2[1] - (d + 2.0)).abs() < 1e-14);
        assert!(validate_ensemble(&e, &identity_cone()).unwrap().passed());
    }

    #[test]
    fn delta_bound_examples() {
        let b = delta_bound(&Matrix::identity(2), &[2.0, 1.0], &[1.0, 2.0]).unwrap();
        assert!((b - 5f64.sqrt()).abs() < 1e-15);
        let ray = Matrix::from_columns(2, &[vec![1.0, 0.0]]).unwrap();
        assert_eq!(delta_bound(&ray, &[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(
            delta_bound(&Matrix::identity(2), &[1.0, 0.0], &[0.0, 1.0]),
            Err(Error::ZeroMargin(_))
        ));
    }

    #[test]
    fn planted_faults_are_named() {
        let opts = DesignOptions {
            q1: Some(vec![2.0, 1.0]),
            ..Default::default()
        };
        let x = identity_cone();
        let mut e = design_ensemble(&x, &opts, &FeasibilityConfig::default()).unwrap();
        e.vectors[1].iter_mut().for_each(|v| *v = -*v);
        let rep = validate_ensemble(&e, &x).unwrap();
        assert!(!rep.passed());
        assert_eq!(rep.check("positivity").unwrap().failing, vec![1]);

        let flat = MeasurementEnsemble::from_parts(Isometry::identity(2), vec![1.0, 1.0], vec![1.0]).unwrap();
        let rep = validate_ensemble(&flat, &x).unwrap();
        assert!(!rep.check("anchor_support").unwrap().passed);
        assert_eq!(rep.check("anchor_support").unwrap().failing, vec![1]);
    }

    #[test]
    fn rank_deficient_cone_stays_in_span() {
        let x = ConeGenerator::from_columns(3, &[vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 1.0]])
            .unwrap();
        let e = design_ensemble(&x, &DesignOptions::default(), &FeasibilityConfig::default()).unwrap();
        assert_eq!(e.gamma(), 2);
        let normal = [1.0, -1.0, -1.0];
        for f in e.vectors() {
            assert!(dot(f, &normal).abs() < 1e-10 * norm2(f));
        }
        assert!(validate_ensemble(&e, &x).unwrap().passed());
    }

    #[test]
    fn json_round_trip_keeps_vectors() {
        let opts = DesignOptions {
            q1: Some(vec![2.0, 1.0]),
            cone_ref: Some("c0".into()),
            ..Default::default()
        };
        let e = design_ensemble(&identity_cone(), &opts, &FeasibilityConfig::default()).unwrap();
        let text = serde_json::to_string(&e).unwrap();
        let back: MeasurementEnsemble = serde_json::from_str(&text).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn cone_without_overlap_is_rejected() {
        let x = ConeGenerator::from_columns(2, &[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let err = design_ensemble(&x, &DesignOptions::default(), &FeasibilityConfig::default());
        assert!(err.is_err());
    }
}
