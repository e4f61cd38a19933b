//! Dense Hermitian operators on small Hilbert spaces.
//!
//! Everything downstream (POVM effects, W-measure entries, differential
//! operators) is a [`HermitianOperator`]. The spectral routines here all go
//! through one cyclic Jacobi solver, so trace norms and negative parts are
//! consistent with each other to rounding.

mod basis;
mod jacobi;

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub use basis::{gell_mann_basis, pauli_dot, BlochCoefficients, OperatorBasis};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;

/// Largest anti-Hermitian part accepted (and discarded) on construction.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Eigenvalues in `[-PSD_TOL, 0)` are treated as zero.
pub const PSD_TOL: f64 = 1e-10;

/// Spectral decomposition `V diag(values) V†`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let diag = DMatrix::from_diagonal(&DVector::from_iterator(n, self.values.iter().map(|&x| C64::new(x, 0.0))));
        &self.vectors * diag * self.vectors.adjoint()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    /// Validates and symmetrizes `matrix` as `(M + M†)/2`.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Validation(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::Validation("operator must have positive dimension".into()));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("operator has non-finite entries".into()));
        }
        let adjoint = matrix.adjoint();
        let correction = (&matrix - &adjoint).iter().map(|z| z.norm()).fold(0.0, f64::max) / 2.0;
        if correction > HERMITICITY_TOL {
            return Err(Error::Validation(format!("operator is not Hermitian (anti-Hermitian part {correction:e})")));
        }
        Ok(Self { matrix: (matrix + adjoint).scale(0.5) })
    }

    /// Symmetrizes without checking; for matrices Hermitian by construction.
    pub(crate) fn from_hermitian_parts(matrix: ComplexMatrix) -> Self {
        let adjoint = matrix.adjoint();
        Self { matrix: (matrix + adjoint).scale(0.5) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::zeros(dim, dim) }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self { matrix: DMatrix::from_diagonal(&DVector::from_iterator(n, diag.iter().map(|&x| C64::new(x, 0.0)))) }
    }

    /// Projector `|ψ⟩⟨ψ|` onto a (not necessarily normalized) vector.
    pub fn projector(state: &DVector<C64>) -> Self {
        Self::from_hermitian_parts(state * state.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { matrix: self.matrix.scale(factor) }
    }

    /// `Re Tr(self · other)`; the Hilbert–Schmidt inner product.
    pub fn hs_inner(&self, other: &HermitianOperator) -> f64 {
        self.matrix.zip_fold(&other.matrix.transpose(), 0.0, |acc, a, b| acc + (a * b).re)
    }

    /// Expectation value `Tr(self · ρ)`.
    pub fn expectation(&self, state: &HermitianOperator) -> f64 {
        self.hs_inner(state)
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &HermitianOperator) -> f64 {
        self.matrix.zip_fold(&other.matrix, 0.0, |acc, a, b| acc.max((a - b).norm()))
    }

    pub fn eig(&self) -> Result<Eigen> {
        let (values, vectors) = jacobi::eigh(&self.matrix)?;
        Ok(Eigen { values, vectors })
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eig()?.values)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    /// `Σ_k |λ_k|`.
    pub fn trace_norm(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().map(|l| l.abs()).sum())
    }

    /// `‖ |X| − X ‖ = Σ_k (|λ_k| − λ_k)`, twice the magnitude of the negative spectrum.
    pub fn negative_part_norm(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().map(|&l| l.abs() - l).sum())
    }

    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -tol)
    }

    /// Applies `f` to the spectrum: `V diag(f(λ)) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut eig = self.eig()?;
        eig.values.iter_mut().for_each(|l| *l = f(*l));
        Ok(Self::from_hermitian_parts(eig.reconstruct()))
    }

    /// Principal square root. Eigenvalues in `[-PSD_TOL, 0)` are clamped to zero.
    pub fn sqrt(&self) -> Result<Self> {
        let eig = self.eig()?;
        if let Some(&worst) = eig.values.first() {
            if worst < -PSD_TOL {
                return Err(Error::NotPsd { eigenvalue: worst });
            }
        }
        let mut eig = eig;
        eig.values.iter_mut().for_each(|l| *l = l.max(0.0).sqrt());
        Ok(Self::from_hermitian_parts(eig.reconstruct()))
    }

    /// `B X B` for Hermitian `B`; stays Hermitian.
    pub fn sandwich(&self, outer: &HermitianOperator) -> Self {
        Self::from_hermitian_parts(&outer.matrix * &self.matrix * &outer.matrix)
    }

    /// Operator product `self · other`, symmetrized. Only Hermitian when the
    /// factors commute; used for squares and idempotence checks.
    pub(crate) fn product_hermitian_part(&self, other: &HermitianOperator) -> Self {
        Self::from_hermitian_parts(&self.matrix * &other.matrix)
    }

    pub(crate) fn axpy(&mut self, alpha: f64, x: &HermitianOperator) {
        self.matrix.zip_apply(&x.matrix, |a, b| *a += b * alpha);
    }
}

impl<'a> Add<&'a HermitianOperator> for &'a HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: &'a HermitianOperator) -> HermitianOperator {
        HermitianOperator { matrix: &self.matrix + &rhs.matrix }
    }
}

impl<'a> Sub<&'a HermitianOperator> for &'a HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: &'a HermitianOperator) -> HermitianOperator {
        HermitianOperator { matrix: &self.matrix - &rhs.matrix }
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scale(rhs)
    }
}

impl Neg for &HermitianOperator {
    type Output = HermitianOperator;
    fn neg(self) -> HermitianOperator {
        self.scale(-1.0)
    }
}

/// Sum of a sequence of operators of dimension `dim`.
pub fn sum_operators<'a>(dim: usize, ops: impl IntoIterator<Item = &'a HermitianOperator>) -> HermitianOperator {
    let mut acc = HermitianOperator::zeros(dim);
    for op in ops {
        acc.axpy(1.0, op);
    }
    acc
}
