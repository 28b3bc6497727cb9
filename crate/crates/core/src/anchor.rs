//! Anchor vectors: points `p` with `Yᵀp ≻ 0`, and in particular ones whose
//! DFT has no zero entries so that `circ(pᵀ)` is invertible.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::cone::ConeGenerator;
use crate::error::{Error, Result};
use crate::feasibility::{has_overlap_property, FeasibilityConfig};
use crate::linalg::{self, least_squares_solve, min_entry, norm_inf, Matrix, PivotedQr};
use crate::rng::Rng;
use crate::spectral::{dft, dft_support, DEFAULT_SUPPORT_TOL};

const MAX_RESAMPLES: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorVector {
    pub p: Vec<f64>,
    /// `min(Yᵀp)`.
    pub positivity_margin: f64,
    pub dft_support: usize,
}

impl AnchorVector {
    pub fn evaluate(y: &Matrix, p: Vec<f64>) -> Self {
        let positivity_margin = min_entry(&y.tr_matvec(&p));
        let dft_support = dft_support(&p, DEFAULT_SUPPORT_TOL);
        AnchorVector {
            p,
            positivity_margin,
            dft_support,
        }
    }
}

/// A vector measuring every generator strictly positively.
pub fn find_interior_point(y: &ConeGenerator, cfg: &FeasibilityConfig) -> Result<Vec<f64>> {
    let overlap = has_overlap_property(y, cfg)?;
    match overlap.witness {
        Some(w) if overlap.holds => Ok(w),
        _ => Err(Error::NoAnchor),
    }
}

fn check_positive(y: &Matrix, q: &[f64]) -> Result<Vec<f64>> {
    if q.len() != y.rows() {
        return Err(Error::DimensionMismatch {
            expected: y.rows(),
            found: q.len(),
        });
    }
    let z = y.tr_matvec(q);
    if z.is_empty() || !(min_entry(&z) > 0.0) {
        return Err(Error::invalid("vector does not measure every generator positively"));
    }
    Ok(z)
}

/// Extends `z₁ ∈ 𝓡(Yᵀ) ∩ ℝ^{+,m}` to `γ` preimages `a₁ … a_γ` whose images
/// `Yᵀaₖ` are strictly positive and linearly independent. `Y` must be
/// `γ × m` with full row rank.
pub fn extend_to_independent_family(y: &Matrix, z1: &[f64], rng: &mut Rng) -> Result<Vec<Vec<f64>>> {
    let (gamma, m) = (y.rows(), y.cols());
    if z1.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: z1.len(),
        });
    }
    if z1.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::invalid("seed measurement vector must be strictly positive"));
    }
    if linalg::rank(y, None)? != gamma {
        return Err(Error::Precondition("generator must have full row rank".into()));
    }
    let a1 = least_squares_solve(y, z1)?.solution;
    if gamma == 1 {
        return Ok(vec![a1]);
    }

    let qr = PivotedQr::new(y);
    let perm = qr.permutation();
    let (basis_idx, rest_idx) = perm.split_at(gamma);
    let basis_cols: Vec<Vec<f64>> = basis_idx.iter().map(|&j| y.column(j)).collect();
    let basis = Matrix::from_columns(gamma, &basis_cols)?;
    let z1_actual = y.tr_matvec(&a1);

    // Perturbations h = B⁻ᵀg must keep the non-basis measurements positive:
    // ‖h‖_∞ < min(z_rest) / ‖Rᵀ‖_∞. Without non-basis columns nothing binds.
    let limit = if rest_idx.is_empty() {
        None
    } else {
        let min_rest = rest_idx.iter().map(|&j| z1_actual[j]).fold(f64::INFINITY, f64::min);
        let rt_norm = rest_idx
            .iter()
            .map(|&j| y.column(j).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        if !(min_rest > 0.0) {
            return Err(Error::invalid("seed measurement vector is not attained by a preimage"));
        }
        Some(min_rest / rt_norm.max(f64::MIN_POSITIVE))
    };

    for _ in 0..MAX_RESAMPLES {
        let mut family = vec![a1.clone()];
        for _ in 1..gamma {
            let g: Vec<f64> = (0..gamma).map(|_| rng.random_range(f64::EPSILON..1.0)).collect();
            let mut h = least_squares_solve(&basis, &g)?.solution;
            if let Some(lim) = limit {
                let s = 0.5 * lim / norm_inf(&h).max(f64::MIN_POSITIVE);
                h.iter_mut().for_each(|v| *v *= s);
            }
            family.push(a1.iter().zip(&h).map(|(a, d)| a + d).collect());
        }
        let images: Vec<Vec<f64>> = family.iter().map(|a| y.tr_matvec(a)).collect();
        let positive = images.iter().all(|z| min_entry(z) > 0.0);
        if positive && linalg::rank(&Matrix::from_columns(m, &images)?, None)? == gamma {
            return Ok(family);
        }
    }
    Err(Error::Construction(format!(
        "no independent positive family after {MAX_RESAMPLES} perturbation draws"
    )))
}

fn support(spec: &[num_complex::Complex64]) -> Vec<bool> {
    let max = spec.iter().map(|c| c.norm()).fold(0.0, f64::max);
    spec.iter().map(|c| c.norm() > DEFAULT_SUPPORT_TOL * max).collect()
}

/// Turns an interior point `q₁` of `Y` (`γ × m`, full row rank) into one with
/// full DFT support by repeatedly forming `ν·p + aⱼ` with members of an
/// independent positive family.
pub fn full_support_anchor(y: &Matrix, q1: &[f64], rng: &mut Rng) -> Result<AnchorVector> {
    let gamma = y.rows();
    let z1 = check_positive(y, q1)?;
    if dft_support(q1, DEFAULT_SUPPORT_TOL) == gamma {
        return Ok(AnchorVector::evaluate(y, q1.to_vec()));
    }
    let family = extend_to_independent_family(y, &z1, rng)?;
    let partners: Vec<(Vec<f64>, Vec<num_complex::Complex64>)> = family
        .into_iter()
        .skip(1)
        .map(|a| {
            let s = dft(&a);
            (a, s)
        })
        .collect();

    let mut p = q1.to_vec();
    let mut spec = dft(&p);
    let mut supp = support(&spec);
    let mut count = supp.iter().filter(|&&b| b).count();
    for _ in 0..gamma {
        if count == gamma {
            break;
        }
        let mut best: Option<(usize, usize)> = None;
        for (idx, (_, s)) in partners.iter().enumerate() {
            let sp = support(s);
            let gain = (0..gamma).filter(|&k| !supp[k] && sp[k]).count();
            if gain > 0 && best.is_none_or(|(_, g)| gain > g) {
                best = Some((idx, gain));
            }
        }
        let Some((idx, _)) = best else {
            return Err(Error::Construction("no partner extends the DFT support".into()));
        };
        let (a, s) = &partners[idx];
        let ratio = (0..gamma)
            .filter(|&k| supp[k])
            .map(|k| s[k].norm() / spec[k].norm())
            .fold(0.0, f64::max);
        let nu = 2.0 * ratio + 1.0;
        p = p.iter().zip(a).map(|(pi, ai)| nu * pi + ai).collect();
        spec = dft(&p);
        supp = support(&spec);
        let next = supp.iter().filter(|&&b| b).count();
        if next <= count {
            return Err(Error::Construction(format!(
                "support did not grow ({count} -> {next})"
            )));
        }
        count = next;
    }
    if count != gamma {
        return Err(Error::Construction(format!(
            "support reached {count} of {gamma} after {gamma} combinations"
        )));
    }
    Ok(AnchorVector::evaluate(y, p))
}
