//! POVMs, their qubit Bloch-form families, and the unsharpness entropy.

use nalgebra::{DVector, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::operator::{pauli_dot, sum_operators, HermitianOperator, C64, PSD_TOL};

/// Tolerance for `Σ_i Â_i = 𝟙`.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Tolerance for `Â² = Â` in [`Povm::is_pvm`].
pub const IDEMPOTENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub ok: bool,
    /// Smallest eigenvalue over all effects.
    pub worst_eigenvalue: f64,
    /// Largest entry of `|Σ_i Â_i − 𝟙|`.
    pub completeness_residual: f64,
}

/// Checks the POVM invariants on an arbitrary list of effects.
pub fn validate_effects(effects: &[HermitianOperator]) -> Result<ValidationReport> {
    let Some(first) = effects.first() else {
        return Err(Error::Validation("a POVM needs at least one effect".into()));
    };
    let dim = first.dim();
    if let Some(bad) = effects.iter().find(|e| e.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: bad.dim() });
    }
    let mut worst = f64::INFINITY;
    for e in effects {
        worst = worst.min(e.min_eigenvalue()?);
    }
    let residual = sum_operators(dim, effects).max_abs_diff(&HermitianOperator::identity(dim));
    Ok(ValidationReport {
        ok: worst >= -PSD_TOL && residual <= COMPLETENESS_TOL,
        worst_eigenvalue: worst,
        completeness_residual: residual,
    })
}

/// An ordered list of positive effects summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<HermitianOperator>,
}

impl Povm {
    pub fn new(effects: Vec<HermitianOperator>) -> Result<Self> {
        let report = validate_effects(&effects)?;
        if !report.ok {
            return Err(Error::Validation(format!(
                "not a POVM: worst eigenvalue {:e}, completeness residual {:e}",
                report.worst_eigenvalue, report.completeness_residual
            )));
        }
        Ok(Self { effects })
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }

    pub fn effect(&self, i: usize) -> &HermitianOperator {
        &self.effects[i]
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        validate_effects(&self.effects)
    }

    /// Outcome probabilities `Tr Â_i ρ`.
    pub fn probabilities(&self, state: &DensityMatrix) -> Vec<f64> {
        self.effects.iter().map(|e| e.expectation(state.operator())).collect()
    }

    /// `(1/D) Tr(−Σ_i Â_i ln Â_i)` in nats.
    pub fn unsharpness_entropy(&self) -> Result<f64> {
        let mut total = 0.0;
        for effect in &self.effects {
            for lambda in effect.eigenvalues()? {
                if lambda < -PSD_TOL {
                    return Err(Error::NotPsd { eigenvalue: lambda });
                }
                if lambda > 0.0 {
                    total -= lambda * lambda.ln();
                }
            }
        }
        Ok(total / self.dim() as f64)
    }

    /// True when every effect is idempotent.
    pub fn is_pvm(&self) -> bool {
        self.effects.iter().all(|e| e.product_hermitian_part(e).max_abs_diff(e) <= IDEMPOTENCE_TOL)
    }

    /// Applies `U · U†` conjugation to every effect.
    pub fn conjugate(&self, unitary: &crate::operator::ComplexMatrix) -> Self {
        let effects = self
            .effects
            .iter()
            .map(|e| HermitianOperator::from_hermitian_parts(unitary * e.matrix() * unitary.adjoint()))
            .collect();
        Self { effects }
    }

    pub fn permuted(&self, order: &[usize]) -> Self {
        Self { effects: order.iter().map(|&i| self.effects[i].clone()).collect() }
    }
}

/// Sign `ω^i` for one-based outcome index `i`, with `ω = −1`.
pub fn omega_pow(i: usize) -> f64 {
    if i.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Splits a qubit operator as `(s·𝟙 + v·σ)/2`, returning `(s, v)`.
pub fn qubit_components(op: &HermitianOperator) -> Result<(f64, Vector3<f64>)> {
    if op.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: op.dim() });
    }
    let v = Vector3::new(
        op.hs_inner(&pauli_dot(&Vector3::x())),
        op.hs_inner(&pauli_dot(&Vector3::y())),
        op.hs_inner(&pauli_dot(&Vector3::z())),
    );
    Ok((op.trace(), v))
}

/// `(scalar·𝟙 + v·σ) / normalization`.
pub fn qubit_operator(scalar: f64, v: &Vector3<f64>, normalization: f64) -> HermitianOperator {
    let mut op = pauli_dot(v);
    op.axpy(scalar, &HermitianOperator::identity(2));
    op.scale(1.0 / normalization)
}

/// Dichotomic qubit POVM `Â_i = [(1 + ω^i a₀)𝟙 + ω^i a⃗·σ⃗]/2`, `i = 1, 2`.
///
/// Effect index 1 (the second entry) carries `+a⃗`; `a₀ = 0` is unbiased.
pub fn dichotomic_from_spec(bias: f64, vector: &Vector3<f64>) -> Result<Povm> {
    let excess = bias.abs() + vector.norm() - 1.0;
    if !bias.is_finite() || !vector.iter().all(|x| x.is_finite()) || excess > PSD_TOL {
        return Err(Error::Domain(format!(
            "dichotomic POVM needs |a0| + |a| <= 1, got {} + {}",
            bias.abs(),
            vector.norm()
        )));
    }
    let effects = (1..=2)
        .map(|i| {
            let w = omega_pow(i);
            qubit_operator(1.0 + w * bias, &(vector * w), 2.0)
        })
        .collect();
    Ok(Povm { effects })
}

/// An orthonormal pair spanning the plane of a trichotomic triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub u: Vector3<f64>,
    pub v: Vector3<f64>,
}

impl Default for Plane {
    fn default() -> Self {
        Self { u: Vector3::x(), v: Vector3::y() }
    }
}

impl Plane {
    pub fn new(u: Vector3<f64>, v: Vector3<f64>) -> Result<Self> {
        let ok = (u.norm() - 1.0).abs() < 1e-9 && (v.norm() - 1.0).abs() < 1e-9 && u.dot(&v).abs() < 1e-9;
        if !ok {
            return Err(Error::Domain("plane vectors must be orthonormal".into()));
        }
        Ok(Self { u, v })
    }

    pub fn at_angle(&self, angle: f64) -> Vector3<f64> {
        self.u * angle.cos() + self.v * angle.sin()
    }
}

/// Bloch vectors `μ·(unit vectors at φ, φ + 2π/3, φ + 4π/3)` in `plane`.
pub fn trichotomic_vectors(mu: f64, phi: f64, plane: &Plane) -> [Vector3<f64>; 3] {
    let step = 2.0 * std::f64::consts::PI / 3.0;
    [0.0, 1.0, 2.0].map(|k| plane.at_angle(phi + k * step) * mu)
}

/// Three-outcome qubit POVM `Â_i = (𝟙 + a⃗_i·σ⃗)/3` on an equilateral triangle.
pub fn trichotomic_from_spec(mu: f64, phi: f64, plane: &Plane) -> Result<Povm> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::Domain(format!("sharpness must lie in [0, 1], got {mu}")));
    }
    let vectors = trichotomic_vectors(mu, phi, plane);
    // Exact completeness: build the third effect as the remainder.
    let a0 = qubit_operator(1.0, &vectors[0], 3.0);
    let a1 = qubit_operator(1.0, &vectors[1], 3.0);
    let a2 = &(&HermitianOperator::identity(2) - &a0) - &a1;
    Ok(Povm { effects: vec![a0, a1, a2] })
}

/// Three-outcome qubit POVM from arbitrary Bloch vectors with `Σ a⃗_i = 0`.
pub fn trichotomic_from_vectors(vectors: &[Vector3<f64>; 3]) -> Result<Povm> {
    let sum: Vector3<f64> = vectors.iter().sum();
    if sum.norm() > 1e-9 {
        return Err(Error::Domain(format!("trichotomic Bloch vectors must sum to zero, residual {:e}", sum.norm())));
    }
    if let Some(v) = vectors.iter().find(|v| v.norm() > 1.0 + PSD_TOL) {
        return Err(Error::Domain(format!("trichotomic Bloch vector too long: {}", v.norm())));
    }
    Povm::new(vectors.iter().map(|v| qubit_operator(1.0, v, 3.0)).collect())
}

/// Qubit POVM description in Bloch form.
#[derive(Debug, Clone, PartialEq)]
pub enum BlochPovmSpec {
    Dichotomic { bias: f64, vector: Vector3<f64> },
    Trichotomic { vectors: [Vector3<f64>; 3] },
}

impl BlochPovmSpec {
    pub fn trichotomic_equilateral(mu: f64, phi: f64, plane: &Plane) -> Result<Self> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::Domain(format!("sharpness must lie in [0, 1], got {mu}")));
        }
        Ok(Self::Trichotomic { vectors: trichotomic_vectors(mu, phi, plane) })
    }

    pub fn to_povm(&self) -> Result<Povm> {
        match self {
            Self::Dichotomic { bias, vector } => dichotomic_from_spec(*bias, vector),
            Self::Trichotomic { vectors } => trichotomic_from_vectors(vectors),
        }
    }
}

/// Unit-trace positive operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        if (op.trace() - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!("state trace must be 1, got {}", op.trace())));
        }
        let worst = op.min_eigenvalue()?;
        if worst < -PSD_TOL {
            return Err(Error::NotPsd { eigenvalue: worst });
        }
        Ok(Self { op })
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn pure(state: &DVector<C64>) -> Result<Self> {
        let norm = state.norm();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::Validation("state vector must be nonzero and finite".into()));
        }
        Ok(Self { op: HermitianOperator::projector(&(state / C64::new(norm, 0.0))) })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { op: HermitianOperator::identity(dim).scale(1.0 / dim as f64) }
    }

    /// Haar-random pure state of dimension `dim`.
    pub fn random_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let v = DVector::from_fn(dim, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        Self::pure(&v).expect("gaussian vector is nonzero")
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }
}
