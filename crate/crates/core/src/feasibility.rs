//! Strict linear feasibility: deciding whether `M x ≻ 0` has a solution, and
//! the cone-pair certificates built on top of it.
//!
//! The strict system is decided through the linear program
//!
//! ```text
//! max t   s.t.   M x ≥ t·1,   −1 ≤ xᵢ ≤ 1,   −1 ≤ t ≤ 1
//! ```
//!
//! which is strictly feasible exactly when its optimum `t*` is positive. The
//! lower bound on `t` does not change the sign of `t*`; it only makes the
//! origin a feasible basis so a single simplex phase suffices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::{ConeGenerator, UnionOfCones};
use crate::detect::DetectorBank;
use crate::error::{Error, Result};
use crate::linalg::{self, min_entry, norm_inf, Matrix};

/// Numerical stand-ins for "≻ 0" and "= 0".
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeasibilityConfig {
    /// Optimal slack `t*` must exceed this to count as strictly feasible.
    pub strict_tol: f64,
    /// Null-cone residual `‖Xᵀg‖_max` allowed relative to `‖X‖_max · ‖g‖₂`.
    pub null_tol: f64,
}

impl Default for FeasibilityConfig {
    fn default() -> Self {
        FeasibilityConfig {
            strict_tol: 1e-8,
            null_tol: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeasibilityStatus {
    StrictlyFeasible,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityResult {
    pub status: FeasibilityStatus,
    /// Optimal `x` rescaled to unit ∞-norm; present iff strictly feasible.
    pub witness: Option<Vec<f64>>,
    /// Attained slack `t*`, never above 1.
    pub margin: f64,
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        self.status == FeasibilityStatus::StrictlyFeasible
    }

    fn infeasible(margin: f64) -> Self {
        FeasibilityResult {
            status: FeasibilityStatus::Infeasible,
            witness: None,
            margin,
        }
    }
}

/// Dense tableau for `max cᵀv s.t. A v ≤ b, v ≥ 0` with `b ≥ 0`.
struct Tableau {
    rows: usize,
    width: usize,
    /// `rows + 1` rows of `width + 1` entries; the last row is the objective
    /// and the last column the right-hand side.
    t: Vec<f64>,
    basis: Vec<usize>,
}

const PIVOT_EPS: f64 = 1e-12;

impl Tableau {
    fn new(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Self {
        let rows = a.len();
        let vars = c.len();
        let width = vars + rows;
        let stride = width + 1;
        let mut t = vec![0.0; (rows + 1) * stride];
        for (i, row) in a.iter().enumerate() {
            t[i * stride..i * stride + vars].copy_from_slice(row);
            t[i * stride + vars + i] = 1.0;
            t[i * stride + width] = b[i];
        }
        for (j, cj) in c.iter().enumerate() {
            t[rows * stride + j] = -cj;
        }
        Tableau {
            rows,
            width,
            t,
            basis: (vars..vars + rows).collect(),
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.width + 1) + j]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let stride = self.width + 1;
        let p = self.at(pr, pc);
        for v in &mut self.t[pr * stride..(pr + 1) * stride] {
            *v /= p;
        }
        let pivot_row = self.t[pr * stride..(pr + 1) * stride].to_vec();
        for i in 0..=self.rows {
            if i == pr {
                continue;
            }
            let f = self.at(i, pc);
            if f == 0.0 {
                continue;
            }
            for (v, pv) in self.t[i * stride..(i + 1) * stride].iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.t[i * stride + pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Runs Bland's rule to optimality. The problem is bounded by construction.
    fn solve(&mut self, max_iter: usize) -> Result<()> {
        for _ in 0..max_iter {
            let obj = self.rows;
            let Some(enter) = (0..self.width).find(|&j| self.at(obj, j) < -PIVOT_EPS) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, enter);
                if a <= PIVOT_EPS {
                    continue;
                }
                let ratio = self.at(i, self.width).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        if ratio < best - 1e-15 * best.abs().max(1.0)
                            || (ratio <= best + 1e-15 * best.abs().max(1.0)
                                && self.basis[i] < self.basis[r])
                        {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
            let Some((pr, _)) = leave else {
                // Unbounded cannot happen with the box constraints.
                return Err(Error::Construction("unbounded simplex step".into()));
            };
            self.pivot(pr, enter);
        }
        Err(Error::SolverFailure {
            iterations: max_iter,
        })
    }

    fn values(&self, vars: usize) -> Vec<f64> {
        let mut v = vec![0.0; vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < vars {
                v[b] = self.at(i, self.width).max(0.0);
            }
        }
        v
    }
}

/// Decides `M x ≻ 0` for an `m × n` matrix `M` (rows are the generators).
pub fn strict_feasible(m: &Matrix, cfg: &FeasibilityConfig) -> Result<FeasibilityResult> {
    let (rows, n) = (m.rows(), m.cols());
    if n == 0 {
        // Only x = 0 exists, and it measures every generator as zero.
        return Ok(FeasibilityResult::infeasible(0.0));
    }

    // Variables: x⁺ (n), x⁻ (n), τ = t + 1.
    let vars = 2 * n + 1;
    let tau = 2 * n;
    let mut a = Vec::with_capacity(rows + vars);
    let mut b = Vec::with_capacity(rows + vars);
    for i in 0..rows {
        // −M x + τ ≤ 1   ⇔   M x ≥ t
        let mut row = vec![0.0; vars];
        for (j, &mij) in m.row(i).iter().enumerate() {
            row[j] = -mij;
            row[n + j] = mij;
        }
        row[tau] = 1.0;
        a.push(row);
        b.push(1.0);
    }
    for j in 0..vars {
        let mut row = vec![0.0; vars];
        row[j] = 1.0;
        a.push(row);
        b.push(if j == tau { 2.0 } else { 1.0 });
    }
    let mut c = vec![0.0; vars];
    c[tau] = 1.0;

    let mut tableau = Tableau::new(&a, &b, &c);
    let cap = 50 * (a.len() + vars);
    tableau.solve(cap)?;
    let v = tableau.values(vars);
    let t_star = (v[tau] - 1.0).min(1.0);
    let x: Vec<f64> = (0..n).map(|j| v[j] - v[n + j]).collect();

    if t_star <= cfg.strict_tol {
        return Ok(FeasibilityResult::infeasible(t_star));
    }
    let scale = norm_inf(&x);
    if scale == 0.0 {
        return Ok(FeasibilityResult::infeasible(t_star));
    }
    let witness: Vec<f64> = x.iter().map(|v| v / scale).collect();
    // Independent re-check rather than trusting the final tableau.
    let attained = min_entry(&m.matvec(&witness));
    let margin = t_star.min(attained);
    if margin <= cfg.strict_tol {
        return Ok(FeasibilityResult::infeasible(margin));
    }
    Ok(FeasibilityResult {
        status: FeasibilityStatus::StrictlyFeasible,
        witness: Some(witness),
        margin,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Overlap {
    pub holds: bool,
    /// `x` with `Xᵀ x ≻ 0` when the property holds.
    pub witness: Option<Vec<f64>>,
    pub margin: f64,
}

/// Whether `𝓡(Xᵀ) ∩ ℝ^{+,m} ≠ ∅`, i.e. some vector measures every generator
/// strictly positively. The generator-free cone is reported as lacking it.
pub fn has_overlap_property(x: &ConeGenerator, cfg: &FeasibilityConfig) -> Result<Overlap> {
    if x.is_empty() {
        return Ok(Overlap {
            holds: false,
            witness: None,
            margin: 0.0,
        });
    }
    let res = strict_feasible(&x.matrix().transpose(), cfg)?;
    Ok(Overlap {
        holds: res.is_feasible(),
        witness: res.witness,
        margin: res.margin,
    })
}

/// Certificate separating two cones: `Xₚᵀ g ≻ 0` for the positive cone and
/// `X_νᵀ g = 0` for the null cone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDetector {
    pub positive_cone: usize,
    pub null_cone: usize,
    pub g: Vec<f64>,
    /// `min(Xₚᵀ g)`.
    #[serde(rename = "margin")]
    pub min_positive_margin: f64,
}

impl PairDetector {
    /// Checks both defining conditions against the generators.
    pub fn verify(
        &self,
        positive: &ConeGenerator,
        null: &ConeGenerator,
        cfg: &FeasibilityConfig,
    ) -> bool {
        let pos = positive.measure(&self.g);
        let nul = null.measure(&self.g);
        let scale = null.matrix().max_abs() * linalg::norm2(&self.g);
        !pos.is_empty()
            && pos.iter().all(|&v| v > 0.0)
            && norm_inf(&nul) <= cfg.null_tol * scale.max(f64::MIN_POSITIVE)
    }
}

fn branch(
    pos_index: usize,
    positive: &ConeGenerator,
    null_index: usize,
    null: &ConeGenerator,
    cfg: &FeasibilityConfig,
) -> Result<Option<PairDetector>> {
    if positive.is_empty() {
        return Ok(None);
    }
    let basis = linalg::null_space_basis(null.matrix(), None)?;
    if basis.cols() == 0 {
        return Ok(None);
    }
    // Rows of the reduced system are (Nᵀ x_i)ᵀ.
    let reduced = basis.transpose().matmul(positive.matrix()).transpose();
    let res = strict_feasible(&reduced, cfg)?;
    let Some(y) = res.witness else {
        return Ok(None);
    };
    let g = basis.matvec(&y);
    let det = PairDetector {
        positive_cone: pos_index,
        null_cone: null_index,
        min_positive_margin: min_entry(&positive.measure(&g)),
        g,
    };
    Ok(det.verify(positive, null, cfg).then_some(det))
}

/// Searches for a detector for the pair `(l, k)`: first with `l` positive and
/// `k` null, then the reverse. `None` means neither orientation exists.
pub fn pair_detector(
    l: usize,
    x_l: &ConeGenerator,
    k: usize,
    x_k: &ConeGenerator,
    cfg: &FeasibilityConfig,
) -> Result<Option<PairDetector>> {
    if x_l.dim() != x_k.dim() {
        return Err(Error::DimensionMismatch {
            expected: x_l.dim(),
            found: x_k.dim(),
        });
    }
    if let Some(det) = branch(l, x_l, k, x_k, cfg)? {
        return Ok(Some(det));
    }
    branch(k, x_k, l, x_l, cfg)
}

#[derive(Clone, Debug)]
pub struct DetectabilityReport {
    pub detectable: bool,
    pub bank: Option<DetectorBank>,
    /// First pair `(l, k)`, `l < k`, for which no detector exists.
    pub failing_pair: Option<(usize, usize)>,
}

/// Checks every pair `l < k` of the union for a detector.
pub fn detectability_check(u: &UnionOfCones, cfg: &FeasibilityConfig) -> Result<DetectabilityReport> {
    let count = u.len();
    if count < 2 {
        return Err(Error::Precondition(format!(
            "detectability needs at least two cones, got {count}"
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..count)
        .flat_map(|l| (l + 1..count).map(move |k| (l, k)))
        .collect();
    let results: Vec<Result<Option<PairDetector>>> = pairs
        .par_iter()
        .map(|&(l, k)| {
            pair_detector(l, u.cone(l), k, u.cone(k), cfg).map_err(|e| Error::Pair {
                first: l,
                second: k,
                source: Box::new(e),
            })
        })
        .collect();

    let mut detectors = Vec::with_capacity(pairs.len());
    for (&pair, res) in pairs.iter().zip(results) {
        match res? {
            Some(det) => detectors.push(det),
            None => {
                return Ok(DetectabilityReport {
                    detectable: false,
                    bank: None,
                    failing_pair: Some(pair),
                })
            }
        }
    }
    Ok(DetectabilityReport {
        detectable: true,
        bank: Some(DetectorBank::new(u.dim(), count, detectors)?),
        failing_pair: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> FeasibilityConfig {
        FeasibilityConfig::default()
    }

    #[test]
    fn identity_is_strictly_feasible_with_unit_margin() {
        let res = strict_feasible(&Matrix::identity(2), &cfg()).unwrap();
        assert!(res.is_feasible());
        let w = res.witness.unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12 && (w[1] - 1.0).abs() < 1e-12);
        assert!((res.margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn opposite_rays_are_infeasible() {
        let m = Matrix::from_rows(&[vec![1.0], vec![-1.0]]).unwrap();
        let res = strict_feasible(&m, &cfg()).unwrap();
        assert_eq!(res.status, FeasibilityStatus::Infeasible);
        assert!(res.witness.is_none());
        assert!(res.margin <= 1e-8);
    }

    #[test]
    fn margin_never_exceeds_one() {
        let m = Matrix::from_rows(&[vec![5.0, 0.0], vec![0.0, 7.0]]).unwrap();
        let res = strict_feasible(&m, &cfg()).unwrap();
        assert!(res.is_feasible());
        assert!(res.margin <= 1.0);
        let w = res.witness.unwrap();
        assert!(min_entry(&m.matvec(&w)) >= res.margin);
    }

    #[test]
    fn overlap_property_basic_cases() {
        let id = ConeGenerator::new(Matrix::identity(3)).unwrap();
        let ov = has_overlap_property(&id, &cfg()).unwrap();
        assert!(ov.holds);
        assert!(ov.witness.unwrap().iter().all(|&v| (v - 1.0).abs() < 1e-12));

        let line = ConeGenerator::from_columns(2, &[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        assert!(!has_overlap_property(&line, &cfg()).unwrap().holds);
        assert!(!has_overlap_property(&ConeGenerator::trivial(3), &cfg()).unwrap().holds);
    }

    #[test]
    fn orthogonal_rays_detector() {
        let a = ConeGenerator::from_columns(2, &[vec![1.0, 0.0]]).unwrap();
        let b = ConeGenerator::from_columns(2, &[vec![0.0, 1.0]]).unwrap();
        let det = pair_detector(0, &a, 1, &b, &cfg()).unwrap().unwrap();
        assert_eq!((det.positive_cone, det.null_cone), (0, 1));
        assert!(det.g[0] > 0.0 && det.g[1].abs() < 1e-14);
    }

    #[test]
    fn identical_planes_have_no_detector() {
        let cols = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let a = ConeGenerator::from_columns(2, &cols).unwrap();
        assert!(pair_detector(0, &a, 1, &a.clone(), &cfg()).unwrap().is_none());
    }

    #[test]
    fn second_branch_is_used_when_first_fails() {
        // cone 0 is a full line (no overlap); cone 1 a ray orthogonal to it.
        let line = ConeGenerator::from_columns(2, &[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let ray = ConeGenerator::from_columns(2, &[vec![0.0, 1.0]]).unwrap();
        let det = pair_detector(0, &line, 1, &ray, &cfg()).unwrap().unwrap();
        assert_eq!((det.positive_cone, det.null_cone), (1, 0));
    }

    #[test]
    fn union_of_two_lines_is_not_detectable() {
        let l1 = ConeGenerator::from_columns(2, &[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let l2 = ConeGenerator::from_columns(2, &[vec![0.0, 1.0], vec![0.0, -1.0]]).unwrap();
        let u = UnionOfCones::new(vec![l1, l2]).unwrap();
        let rep = detectability_check(&u, &cfg()).unwrap();
        assert!(!rep.detectable);
        assert_eq!(rep.failing_pair, Some((0, 1)));
    }

    #[test]
    fn single_cone_union_is_a_precondition_error() {
        let u = UnionOfCones::new(vec![ConeGenerator::new(Matrix::identity(2)).unwrap()]).unwrap();
        assert!(matches!(
            detectability_check(&u, &cfg()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = ConeGenerator::new(Matrix::identity(2)).unwrap();
        let b = ConeGenerator::new(Matrix::identity(3)).unwrap();
        assert!(matches!(
            pair_detector(0, &a, 1, &b, &cfg()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
