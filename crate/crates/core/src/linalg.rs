//! Dense complex matrix kernel.
//!
//! Everything in the toolkit lives on small finite-dimensional spaces, so
//! matrices are dense and backed by [`nalgebra::DMatrix`]. The kernel adds the
//! handful of operations the rest of the crate needs: Hermitian
//! eigendecomposition with a reproducible eigenvector gauge, trace norms,
//! projectors onto positive eigenspaces, Kronecker products and partial traces.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest system dimension accepted by the state, instrument and channel
/// constructors.
pub const MAX_DIM: usize = 16;

/// Relative tolerance used for Hermiticity, projector and unitarity checks.
pub const REL_TOL: f64 = 1e-10;

/// Absolute floor under every relative tolerance.
pub const ABS_FLOOR: f64 = 1e-14;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Relative tolerance scaled by `norm`, never below [`ABS_FLOOR`].
#[inline]
pub fn tol_for(norm: f64) -> f64 {
    (REL_TOL * norm).max(ABS_FLOOR)
}

/// A dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix(DMatrix<Complex64>);

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        CMatrix(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        CMatrix(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::DimensionError(format!(
                "{} entries do not fill a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Self::checked(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Builds a matrix from a list of rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::DimensionError("ragged rows".into()));
        }
        let flat: Vec<Complex64> = rows.iter().flatten().copied().collect();
        Self::from_row_slice(rows.len(), ncols, &flat)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { re(diag[i]) } else { Complex64::ZERO })
    }

    /// Column vector.
    pub fn column(entries: &[Complex64]) -> Self {
        CMatrix(DMatrix::from_column_slice(entries.len(), 1, entries))
    }

    /// Wraps an nalgebra matrix, rejecting empty or non-finite input.
    pub fn checked(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::DimensionError("empty matrix".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidOperator("non-finite entry".into()));
        }
        Ok(CMatrix(m))
    }

    /// `|v><w|` for column vectors `v`, `w`.
    pub fn outer(v: &CMatrix, w: &CMatrix) -> Self {
        CMatrix(&v.0 * w.0.adjoint())
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.0[(i, j)] = value;
    }

    /// Row-major copy of the entries.
    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.nrows())
            .map(|i| (0..self.ncols()).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        CMatrix(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        CMatrix(&self.0 * re(s))
    }

    pub fn scale_c(&self, s: Complex64) -> Self {
        CMatrix(&self.0 * s)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape(), "shape mismatch in max_abs_diff");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &CMatrix) -> Complex64 {
        assert_eq!(self.ncols(), other.nrows());
        assert_eq!(self.nrows(), other.ncols());
        let mut acc = Complex64::ZERO;
        for i in 0..self.nrows() {
            for k in 0..self.ncols() {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        acc
    }

    /// `K · self · K†`.
    pub fn conjugate_by(&self, k: &CMatrix) -> Self {
        CMatrix(&k.0 * &self.0 * k.0.adjoint())
    }

    /// `(self + self†)/2`.
    pub fn hermitian_part(&self) -> Self {
        CMatrix((&self.0 + self.0.adjoint()) * re(0.5))
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_square()
            && (&self.0 - self.0.adjoint()).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
                <= tol_for(self.frobenius_norm())
    }

    /// Hermitian and idempotent within tolerance.
    pub fn is_projector(&self) -> bool {
        self.is_hermitian() && (self * self).max_abs_diff(self) <= 1e-10
    }

    pub fn is_unitary(&self) -> bool {
        self.is_square() && (&self.adjoint() * self).max_abs_diff(&Self::identity(self.nrows())) <= 1e-10
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CMatrix) -> Self {
        CMatrix(self.0.kronecker(&other.0))
    }

    /// Columns `start..start+count`.
    pub fn columns(&self, start: usize, count: usize) -> Self {
        CMatrix(self.0.columns(start, count).into_owned())
    }

    pub fn column_at(&self, j: usize) -> Self {
        self.columns(j, 1)
    }

    /// Horizontal concatenation.
    pub fn hstack(blocks: &[&CMatrix]) -> Result<Self> {
        let rows = blocks.first().map_or(0, |b| b.nrows());
        if blocks.iter().any(|b| b.nrows() != rows) {
            return Err(Error::DimensionError("hstack row counts differ".into()));
        }
        let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
        let mut out = DMatrix::zeros(rows, cols);
        let mut at = 0;
        for b in blocks {
            out.columns_mut(at, b.ncols()).copy_from(&b.0);
            at += b.ncols();
        }
        Ok(CMatrix(out))
    }

    /// Block `(row, col)` of size `rows × cols`.
    pub fn block(&self, row: usize, col: usize, rows: usize, cols: usize) -> Self {
        CMatrix(self.0.view((row, col), (rows, cols)).into_owned())
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMatrix{}x{}[", self.nrows(), self.ncols())?;
        for i in 0..self.nrows() {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.ncols() {
                let z = self.get(i, j);
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:.6}{:+.6}i", z.re, z.im)?;
            }
        }
        write!(f, "]")
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-&self.0)
    }
}

impl Add for CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: CMatrix) -> CMatrix {
        CMatrix(self.0 + rhs.0)
    }
}

impl Sub for CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: CMatrix) -> CMatrix {
        CMatrix(self.0 - rhs.0)
    }
}

impl std::iter::Sum for CMatrix {
    /// Panics on an empty iterator; callers always sum at least one term.
    fn sum<I: Iterator<Item = CMatrix>>(mut iter: I) -> CMatrix {
        let first = iter.next().expect("sum of zero matrices has no shape");
        iter.fold(first, |acc, m| acc + m)
    }
}

/// Pauli matrices `(σx, σy, σz)`.
pub fn pauli() -> [CMatrix; 3] {
    let o = Complex64::ZERO;
    let one = re(1.0);
    let i = c(0.0, 1.0);
    [
        CMatrix(DMatrix::from_row_slice(2, 2, &[o, one, one, o])),
        CMatrix(DMatrix::from_row_slice(2, 2, &[o, -i, i, o])),
        CMatrix(DMatrix::from_row_slice(2, 2, &[one, o, o, -one])),
    ]
}

/// `n · σ` for a real 3-vector.
pub fn pauli_dot(n: [f64; 3]) -> CMatrix {
    let [x, y, z] = pauli();
    &(&x.scale(n[0]) + &y.scale(n[1])) + &z.scale(n[2])
}

/// Spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted in descending order. Each eigenvector column is
/// gauge-fixed so that its first non-negligible component is real and
/// positive, which makes projectors and protocols built from it reproducible.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl HermitianEig {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Spectral norm `max |λ|`.
    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, l| m.max(l.abs()))
    }

    /// Eigenvalues within this distance of zero count as zero.
    pub fn zero_cutoff(&self) -> f64 {
        tol_for(self.operator_norm())
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let lam = CMatrix::from_real_diagonal(&self.eigenvalues);
        debug_assert_eq!(v.ncols(), n);
        &(v * &lam) * &v.adjoint()
    }

    /// Projector onto the span of eigenvectors whose eigenvalue satisfies `keep`.
    pub fn spectral_projector(&self, mut keep: impl FnMut(f64) -> bool) -> CMatrix {
        let n = self.dim();
        let mut p = CMatrix::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            if keep(lam) {
                let v = self.eigenvectors.column_at(k);
                p = &p + &CMatrix::outer(&v, &v);
            }
        }
        p
    }

    /// Orthonormal columns spanning the eigenspaces with `λ > eps`, and the
    /// complementary columns, in eigenvalue order.
    pub fn split_basis(&self, eps: f64) -> (CMatrix, CMatrix) {
        let k = self.eigenvalues.iter().filter(|&&l| l > eps).count();
        let n = self.dim();
        // eigenvalues are descending, so the positive block comes first
        (self.eigenvectors.columns(0, k), self.eigenvectors.columns(k, n - k))
    }
}

fn require_hermitian(h: &CMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::InvalidOperator(format!(
            "expected a square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    if !h.is_hermitian() {
        return Err(Error::InvalidOperator("matrix is not Hermitian".into()));
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix.
pub fn eig_hermitian(h: &CMatrix) -> Result<HermitianEig> {
    require_hermitian(h)?;
    let n = h.nrows();
    let sym = h.hermitian_part().into_inner();
    let eig = SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = DMatrix::<Complex64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        let nrm = col.norm();
        col /= re(nrm);
        if let Some(lead) = col.iter().copied().find(|z| z.norm() > 1e-8) {
            col *= lead.conj() / lead.norm();
        }
        vecs.set_column(dst, &col);
    }
    Ok(HermitianEig { eigenvalues, eigenvectors: CMatrix(vecs) })
}

/// Trace norm `Σ|λ_k|` of a Hermitian matrix.
pub fn trace_norm(h: &CMatrix) -> Result<f64> {
    Ok(eig_hermitian(h)?.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// Orthogonal projector onto the eigenspaces of `h` with eigenvalue `> eps`.
pub fn positive_projector(h: &CMatrix, eps: f64) -> Result<CMatrix> {
    Ok(eig_hermitian(h)?.spectral_projector(|l| l > eps))
}

/// `A ⊗ B`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kron(b)
}

/// Partial trace over the second tensor factor of dimension `dim_second`.
pub fn partial_trace_second(m: &CMatrix, dim_second: usize) -> Result<CMatrix> {
    if !m.is_square() || dim_second == 0 || !m.nrows().is_multiple_of(dim_second) {
        return Err(Error::DimensionError(format!(
            "{}x{} does not factor with second dimension {dim_second}",
            m.nrows(),
            m.ncols()
        )));
    }
    let d1 = m.nrows() / dim_second;
    Ok(CMatrix::from_fn(d1, d1, |i, j| {
        (0..dim_second)
            .map(|k| m.get(i * dim_second + k, j * dim_second + k))
            .sum()
    }))
}
