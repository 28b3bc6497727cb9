//! Dense real linear algebra.
//!
//! Everything here is built on a Householder QR factorization with column
//! pivoting. Rank, orthonormal bases for the column space and its orthogonal
//! complement, minimum-norm least squares and the span isometry all read off
//! the same factorization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix with finite entries.
///
/// A matrix may have zero columns (the generator of the trivial cone `{0}`),
/// but always has at least one row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<MatrixRepr> for Matrix {
    type Error = Error;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        Matrix::new(repr.rows, repr.cols, repr.data)
    }
}

impl From<Matrix> for MatrixRepr {
    fn from(m: Matrix) -> Self {
        MatrixRepr {
            rows: m.rows,
            cols: m.cols,
            data: m.data,
        }
    }
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 {
            return Err(Error::invalid("matrix must have at least one row"));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite entry at ({}, {})",
                bad / cols.max(1),
                bad % cols.max(1)
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0, "matrix must have at least one row");
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::invalid("ragged rows"));
        }
        Matrix::new(r, c, rows.concat())
    }

    /// Builds an `n × columns.len()` matrix whose columns are the given vectors.
    pub fn from_columns(n: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        let mut data = vec![0.0; n * cols];
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: col.len(),
                });
            }
            for (i, &v) in col.iter().enumerate() {
                data[i * cols + j] = v;
            }
        }
        Matrix::new(n, cols, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.get(i, j);
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// `self · x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ · y`
    pub fn tr_matvec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "tr_matvec dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut data = vec![0.0; self.rows * other.cols];
        for i in 0..self.rows {
            let out = &mut data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Matrix {
            rows: self.rows,
            cols: other.cols,
            data,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_column_norm(&self) -> f64 {
        (0..self.cols)
            .map(|j| norm2(&self.column(j)))
            .fold(0.0, f64::max)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn min_entry(a: &[f64]) -> f64 {
    a.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Householder QR with column pivoting: `A·P = Q·R`.
#[derive(Clone, Debug)]
pub struct PivotedQr {
    rows: usize,
    cols: usize,
    /// Householder vectors, `reflectors[k]` acts on rows `k..rows`.
    reflectors: Vec<(Vec<f64>, f64)>,
    /// Upper-trapezoidal factor stored column-major, `r[j][i]` for `i <= j`.
    r: Vec<Vec<f64>>,
    /// `perm[j]` is the original column placed at position `j`.
    perm: Vec<usize>,
}

impl PivotedQr {
    pub fn new(a: &Matrix) -> Self {
        let (m, n) = (a.rows, a.cols);
        let mut work = a.columns();
        let mut perm: Vec<usize> = (0..n).collect();
        let steps = m.min(n);
        let mut reflectors = Vec::with_capacity(steps);

        for k in 0..steps {
            let (best, _) = (k..n)
                .map(|j| (j, work[j][k..].iter().map(|v| v * v).sum::<f64>()))
                .fold((k, -1.0), |acc, (j, s)| if s > acc.1 { (j, s) } else { acc });
            work.swap(k, best);
            perm.swap(k, best);

            let x = &work[k][k..];
            let sigma = norm2(x);
            if sigma == 0.0 {
                reflectors.push((vec![0.0; m - k], 0.0));
                continue;
            }
            let alpha = if x[0] >= 0.0 { -sigma } else { sigma };
            let mut v = x.to_vec();
            v[0] -= alpha;
            let vtv = v.iter().map(|t| t * t).sum::<f64>();
            let beta = if vtv == 0.0 { 0.0 } else { 2.0 / vtv };

            work[k][k] = alpha;
            for t in &mut work[k][k + 1..] {
                *t = 0.0;
            }
            for col in work.iter_mut().skip(k + 1) {
                let s = beta * dot(&v, &col[k..]);
                for (c, vi) in col[k..].iter_mut().zip(&v) {
                    *c -= s * vi;
                }
            }
            reflectors.push((v, beta));
        }

        let r = work.into_iter().map(|mut c| {
            c.truncate(steps);
            c
        });
        PivotedQr {
            rows: m,
            cols: n,
            reflectors,
            r: r.collect(),
            perm,
        }
    }

    /// Magnitudes of the diagonal of `R`, nonincreasing up to rounding.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.reflectors.len()).map(|k| self.r[k][k].abs()).collect()
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.diagonal().iter().take_while(|&&d| d > tol).count()
    }

    /// `max(rows, cols) · ε · |R₀₀|`
    pub fn default_tolerance(&self) -> f64 {
        let lead = self.diagonal().first().copied().unwrap_or(0.0);
        self.rows.max(self.cols) as f64 * f64::EPSILON * lead
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Applies `Qᵀ` to a vector of length `rows`.
    pub fn apply_qt(&self, b: &mut [f64]) {
        for (k, (v, beta)) in self.reflectors.iter().enumerate() {
            let s = beta * dot(v, &b[k..]);
            for (x, vi) in b[k..].iter_mut().zip(v) {
                *x -= s * vi;
            }
        }
    }

    /// Applies `Q` to a vector of length `rows`.
    pub fn apply_q(&self, b: &mut [f64]) {
        for (k, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            let s = beta * dot(v, &b[k..]);
            for (x, vi) in b[k..].iter_mut().zip(v) {
                *x -= s * vi;
            }
        }
    }

    /// Column `j` of the full orthogonal factor `Q`.
    pub fn q_column(&self, j: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.rows];
        e[j] = 1.0;
        self.apply_q(&mut e);
        e
    }

    /// Basic least-squares solution of `min ‖A x − b‖₂`, using the columns
    /// above the default rank tolerance.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = b.to_vec();
        self.apply_qt(&mut rhs);
        self.back_substitute(&rhs, self.rank(self.default_tolerance()))
    }

    /// Solves the leading `k × k` triangular system `R[..k, ..k] y = rhs[..k]`
    /// and scatters the result back through the column permutation.
    fn back_substitute(&self, rhs: &[f64], k: usize) -> Vec<f64> {
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = rhs[i];
            for (j, yj) in y.iter().enumerate().skip(i + 1) {
                s -= self.r[j][i] * yj;
            }
            y[i] = s / self.r[i][i];
        }
        let mut x = vec![0.0; self.cols];
        for (pos, &orig) in self.perm.iter().enumerate().take(k) {
            x[orig] = y[pos];
        }
        x
    }
}

fn resolve_tol(qr: &PivotedQr, tol: Option<f64>) -> Result<f64> {
    match tol {
        Some(t) if t < 0.0 || !t.is_finite() => {
            Err(Error::invalid(format!("rank tolerance must be finite and >= 0, got {t}")))
        }
        Some(t) => Ok(t),
        None => Ok(qr.default_tolerance()),
    }
}

/// Numerical rank from the pivoted-QR diagonal.
///
/// With `tol = None` the threshold is `max(rows, cols) · ε · |R₀₀|`.
pub fn rank(x: &Matrix, tol: Option<f64>) -> Result<usize> {
    if x.cols == 0 {
        return Ok(0);
    }
    let qr = PivotedQr::new(x);
    Ok(qr.rank(resolve_tol(&qr, tol)?))
}

/// Orthonormal basis of `𝒩(Xᵀ)`, the orthogonal complement of the column
/// space of the `n × m` matrix `X`, returned as the columns of an
/// `n × (n − rank)` matrix.
pub fn null_space_basis(x: &Matrix, tol: Option<f64>) -> Result<Matrix> {
    let n = x.rows;
    if x.cols == 0 {
        return Ok(Matrix::identity(n));
    }
    let qr = PivotedQr::new(x);
    let r = qr.rank(resolve_tol(&qr, tol)?);
    let cols: Vec<Vec<f64>> = (r..n).map(|j| qr.q_column(j)).collect();
    Ok(Matrix::from_columns(n, &cols).expect("finite Q"))
}

/// Orthonormal basis of the column space of `X` as an `n × rank` matrix.
pub fn range_basis(x: &Matrix, tol: Option<f64>) -> Result<Matrix> {
    let n = x.rows;
    if x.cols == 0 {
        return Ok(Matrix::zeros(n, 0));
    }
    let qr = PivotedQr::new(x);
    let r = qr.rank(resolve_tol(&qr, tol)?);
    let cols: Vec<Vec<f64>> = (0..r).map(|j| qr.q_column(j)).collect();
    Ok(Matrix::from_columns(n, &cols).expect("finite Q"))
}

/// Linear isometry from `span(X) ⊂ ℝⁿ` onto `ℝ^γ`, stored as a `γ × n`
/// matrix with orthonormal rows. Its transpose is the exact inverse on the
/// span. The identity is kept implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    n: usize,
    map: Option<Matrix>,
}

impl Isometry {
    /// Wraps a matrix after checking `map · mapᵀ = I` to `tol` entrywise.
    pub fn from_matrix(map: Matrix, tol: f64) -> Result<Self> {
        if map.rows > map.cols {
            return Err(Error::invalid("isometry cannot have more rows than columns"));
        }
        let n = map.cols;
        if map.rows == n && map == Matrix::identity(n) {
            return Ok(Isometry::identity(n));
        }
        let gram = map.matmul(&map.transpose());
        for i in 0..gram.rows {
            for j in 0..gram.cols {
                let target = if i == j { 1.0 } else { 0.0 };
                if (gram.get(i, j) - target).abs() > tol {
                    return Err(Error::invalid(format!(
                        "rows are not orthonormal: gram[{i}][{j}] = {}",
                        gram.get(i, j)
                    )));
                }
            }
        }
        Ok(Isometry { n, map: Some(map) })
    }

    pub fn identity(n: usize) -> Self {
        Isometry { n, map: None }
    }

    pub fn gamma(&self) -> usize {
        self.map.as_ref().map_or(self.n, |m| m.rows)
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    /// Dense `γ × n` matrix, materialized for the identity.
    pub fn matrix(&self) -> Matrix {
        self.map.clone().unwrap_or_else(|| Matrix::identity(self.n))
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_none()
    }

    /// `𝔓 z`
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        match &self.map {
            None => z.to_vec(),
            Some(m) => m.matvec(z),
        }
    }

    /// `𝔓ᵀ w`, the preimage of `w` inside the span.
    pub fn lift(&self, w: &[f64]) -> Vec<f64> {
        match &self.map {
            None => w.to_vec(),
            Some(m) => m.tr_matvec(w),
        }
    }

    /// `𝔓 X`, the reduced generator in `ℝ^{γ×m}`.
    pub fn reduce(&self, x: &Matrix) -> Matrix {
        match &self.map {
            None => x.clone(),
            Some(m) => m.matmul(x),
        }
    }
}

/// Isometry for the column span of `X`. Full-rank generators get the exact
/// identity so that no rounding is introduced.
pub fn span_isometry(x: &Matrix, tol: Option<f64>) -> Result<Isometry> {
    let n = x.rows;
    if x.cols == 0 {
        return Err(Error::EmptySpan);
    }
    let qr = PivotedQr::new(x);
    let r = qr.rank(resolve_tol(&qr, tol)?);
    match r {
        0 => Err(Error::EmptySpan),
        r if r == n => Ok(Isometry::identity(n)),
        r => {
            let rows: Vec<Vec<f64>> = (0..r).map(|j| qr.q_column(j)).collect();
            Ok(Isometry {
                n,
                map: Some(Matrix::from_rows(&rows).expect("finite Q")),
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeastSquares {
    pub solution: Vec<f64>,
    /// Set when `X` lacks full row rank; `solution` is then the minimum-norm
    /// minimizer.
    pub rank_deficient: bool,
}

/// Minimizes `‖Xᵀ p − b‖₂` over `p ∈ ℝⁿ` for an `n × m` matrix `X`.
///
/// When `X` has full row rank this is `p = (X Xᵀ)⁻¹ X b`; otherwise the
/// minimizer of least norm is returned and flagged.
pub fn least_squares_solve(x: &Matrix, b: &[f64]) -> Result<LeastSquares> {
    if b.len() != x.cols {
        return Err(Error::DimensionMismatch {
            expected: x.cols,
            found: b.len(),
        });
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("right-hand side has non-finite entries"));
    }
    let n = x.rows;
    let basis = range_basis(x, None)?;
    let r = basis.cols;
    if r == 0 {
        return Ok(LeastSquares {
            solution: vec![0.0; n],
            rank_deficient: true,
        });
    }
    // p = Q₁ y with y solving the full-column-rank problem (Xᵀ Q₁) y ≈ b.
    let reduced = x.transpose().matmul(&basis);
    let qr = PivotedQr::new(&reduced);
    let mut rhs = b.to_vec();
    qr.apply_qt(&mut rhs);
    let y = qr.back_substitute(&rhs, r);
    Ok(LeastSquares {
        solution: basis.matvec(&y),
        rank_deficient: r < n,
    })
}
