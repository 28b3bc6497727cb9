//! Finitely generated cones and unions of them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// `cone(X) = { X θ : θ ⪰ 0 }` for an `n × m` generator `X`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Matrix", into = "Matrix")]
pub struct ConeGenerator {
    x: Matrix,
    rank: usize,
}

impl ConeGenerator {
    pub fn new(x: Matrix) -> Result<Self> {
        let rank = linalg::rank(&x, None)?;
        Ok(ConeGenerator { x, rank })
    }

    /// The trivial cone `{0}` in `ℝⁿ` (no generators).
    pub fn trivial(n: usize) -> Self {
        ConeGenerator {
            x: Matrix::zeros(n, 0),
            rank: 0,
        }
    }

    pub fn from_columns(n: usize, columns: &[Vec<f64>]) -> Result<Self> {
        ConeGenerator::new(Matrix::from_columns(n, columns)?)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.x
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.x.rows()
    }

    /// Number of generators `m`.
    pub fn len(&self) -> usize {
        self.x.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.x.cols() == 0
    }

    /// `γ = rank(X)`, cached at construction.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `Xᵀ v`, the inner products of `v` against every generator.
    pub fn measure(&self, v: &[f64]) -> Vec<f64> {
        self.x.tr_matvec(v)
    }

    /// `X θ` for nonnegative coefficients.
    pub fn combine(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: theta.len(),
            });
        }
        if theta.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::invalid("cone coefficients must be nonnegative"));
        }
        Ok(self.x.matvec(theta))
    }
}

impl TryFrom<Matrix> for ConeGenerator {
    type Error = Error;

    fn try_from(x: Matrix) -> Result<Self> {
        ConeGenerator::new(x)
    }
}

impl From<ConeGenerator> for Matrix {
    fn from(c: ConeGenerator) -> Matrix {
        c.x
    }
}

/// Ordered list of cones sharing one ambient dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UnionRepr", into = "UnionRepr")]
pub struct UnionOfCones {
    cones: Vec<ConeGenerator>,
}

#[derive(Serialize, Deserialize)]
struct UnionRepr {
    cones: Vec<ConeGenerator>,
}

impl TryFrom<UnionRepr> for UnionOfCones {
    type Error = Error;

    fn try_from(r: UnionRepr) -> Result<Self> {
        UnionOfCones::new(r.cones)
    }
}

impl From<UnionOfCones> for UnionRepr {
    fn from(u: UnionOfCones) -> Self {
        UnionRepr { cones: u.cones }
    }
}

impl UnionOfCones {
    pub fn new(cones: Vec<ConeGenerator>) -> Result<Self> {
        let Some(first) = cones.first() else {
            return Err(Error::invalid("a union needs at least one cone"));
        };
        let n = first.dim();
        if let Some(bad) = cones.iter().find(|c| c.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.dim(),
            });
        }
        Ok(UnionOfCones { cones })
    }

    pub fn dim(&self) -> usize {
        self.cones[0].dim()
    }

    pub fn len(&self) -> usize {
        self.cones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cones.is_empty()
    }

    pub fn cones(&self) -> &[ConeGenerator] {
        &self.cones
    }

    pub fn cone(&self, k: usize) -> &ConeGenerator {
        &self.cones[k]
    }

    /// `Γ`, the largest generator rank in the union.
    pub fn max_rank(&self) -> usize {
        self.cones.iter().map(ConeGenerator::rank).max().unwrap_or(0)
    }
}
