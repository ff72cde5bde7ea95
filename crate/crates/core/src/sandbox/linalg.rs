//! Small dense complex matrices.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::SandboxError;

/// Dense complex matrix; norms are operator norms (largest singular value).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix(DMatrix<Complex64>);

impl DenseMatrix {
    pub fn from_inner(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    /// Row-major construction; rows must be non-empty and of equal length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, SandboxError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(SandboxError::Shape("rows must be non-empty and of equal length".into()));
        }
        Ok(Self(DMatrix::from_fn(r, c, |i, j| rows[i][j])))
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.rows()).map(|i| (0..self.cols()).map(|j| self.0[(i, j)]).collect()).collect()
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn singular_values(&self) -> Vec<f64> {
        self.0.clone().svd(false, false).singular_values.iter().copied().collect()
    }

    /// Operator norm.
    pub fn norm(&self) -> f64 {
        self.singular_values().into_iter().fold(0.0, f64::max)
    }

    pub fn inverse(&self) -> Result<Self, SandboxError> {
        if !self.is_square() {
            return Err(SandboxError::Shape("inverse of a non-square matrix".into()));
        }
        self.0.clone().try_inverse().map(Self).ok_or(SandboxError::Singular)
    }

    /// Number of singular values above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.singular_values().into_iter().filter(|&s| s > tol).count()
    }

    /// Unitary factor `U` of the polar decomposition `Z = U|Z|`, from the
    /// singular value factorization. Singular values at or below `tol` make
    /// the factor non-unique and are rejected.
    pub fn polar_unitary(&self, tol: f64) -> Result<Self, SandboxError> {
        if !self.is_square() {
            return Err(SandboxError::Shape("polar factor of a non-square matrix".into()));
        }
        let svd = self.0.clone().svd(true, true);
        if svd.singular_values.iter().any(|&s| s <= tol) {
            return Err(SandboxError::Singular);
        }
        let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
        Ok(Self(u * v_t))
    }

    /// Eigenvalues from the diagonal of a complex Schur form.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>, SandboxError> {
        if !self.is_square() {
            return Err(SandboxError::Shape("eigenvalues of a non-square matrix".into()));
        }
        let (_, t) = self.0.clone().schur().unpack();
        Ok(t.diagonal().iter().copied().collect())
    }

    /// `‖M*M − I‖` and `‖MM* − I‖` both at most `tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let id = DenseMatrix::identity(self.rows());
        (&(&self.adjoint() * self) - &id).norm() <= tol && (&(self * &self.adjoint()) - &id).norm() <= tol
    }

    /// `‖MM* − M*M‖ ≤ tol·(1 + ‖M‖²)`.
    pub fn is_normal(&self, tol: f64) -> bool {
        let n = self.norm();
        (&(self * &self.adjoint()) - &(&self.adjoint() * self)).norm() <= tol * (1.0 + n * n)
    }

    /// Self-adjoint idempotent up to `tol`.
    pub fn is_projection(&self, tol: f64) -> bool {
        self.is_square() && (self - &self.adjoint()).norm() <= tol && (&(self * self) - self).norm() <= tol
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        DenseMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;
    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        DenseMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;
    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        DenseMatrix(&self.0 - &rhs.0)
    }
}
