//! W-measures: Hermitian operator grids whose marginals are two given POVMs.
//!
//! A W-measure is built either from a conjunction POVM `C` over outcome
//! pairs, `Ŵ_ij = Ĉ_ij + (Â_i − Σ_j Ĉ_ij)/d + (B̂_j − Σ_i Ĉ_ij)/d`, or from a
//! set of differential operators, `Ŵ_ij = (Â_i + B̂_j)/d − Θ̂_ij`. Either way
//! `Σ_j Ŵ_ij = Â_i` and `Σ_i Ŵ_ij = B̂_j`; the W-measure is a joint POVM of
//! `A` and `B` exactly when every entry is positive.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::operator::{gell_mann_basis, sum_operators, BlochCoefficients, HermitianOperator, PSD_TOL};
use crate::povm::Povm;

/// Tolerance for the `Σ_i Θ̂_ij = Σ_j Θ̂_ij = 𝟙/d` constraints.
pub const THETA_CONSTRAINT_TOL: f64 = 1e-8;

/// Tolerance for W-measure completeness and marginality.
pub const MARGINAL_TOL: f64 = 1e-9;

/// Row-major index of outcome pair `(i, j)` in a `d²`-outcome POVM.
pub fn pair_index(d: usize, i: usize, j: usize) -> usize {
    i * d + j
}

fn check_pair(a: &Povm, b: &Povm) -> Result<usize> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    if a.outcomes() != b.outcomes() {
        return Err(Error::DimensionMismatch { expected: a.outcomes(), found: b.outcomes() });
    }
    Ok(a.outcomes())
}

/// Grid of differential operators `Θ̂_ij` with row and column sums `𝟙/d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialSet {
    d: usize,
    grid: Vec<HermitianOperator>,
}

impl DifferentialSet {
    /// Row-major `grid` of `d²` operators; rejects constraint violations
    /// beyond [`THETA_CONSTRAINT_TOL`].
    pub fn new(d: usize, grid: Vec<HermitianOperator>) -> Result<Self> {
        if d < 2 || grid.len() != d * d {
            return Err(Error::Domain(format!(
                "differential set needs d >= 2 and d² entries, got d={d}, {} entries",
                grid.len()
            )));
        }
        let dim = grid[0].dim();
        if let Some(bad) = grid.iter().find(|t| t.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.dim() });
        }
        let set = Self { d, grid };
        let residual = set.constraint_residual();
        if residual > THETA_CONSTRAINT_TOL {
            return Err(Error::Domain(format!("differential operators violate row/column sums by {residual:e}")));
        }
        Ok(set)
    }

    /// `Θ̂_ij = 𝟙/d²`; reproduces the uniform conjunction.
    pub fn uniform(d: usize, dim: usize) -> Self {
        let entry = HermitianOperator::identity(dim).scale(1.0 / (d * d) as f64);
        Self { d, grid: vec![entry; d * d] }
    }

    /// Builds from per-entry Bloch coefficients, `Θ̂_ij = (θ₀ 𝟙 + θ⃗·γ⃗)/d²`.
    pub fn from_coefficients(d: usize, dim: usize, coeffs: &[BlochCoefficients]) -> Result<Self> {
        let basis = gell_mann_basis(dim)?;
        let norm = (d * d) as f64;
        let grid = coeffs.iter().map(|c| basis.decode(c, norm)).collect::<Result<Vec<_>>>()?;
        Self::new(d, grid)
    }

    pub(crate) fn from_grid_unchecked(d: usize, grid: Vec<HermitianOperator>) -> Self {
        Self { d, grid }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.grid[0].dim()
    }

    pub fn entry(&self, i: usize, j: usize) -> &HermitianOperator {
        &self.grid[pair_index(self.d, i, j)]
    }

    pub fn grid(&self) -> &[HermitianOperator] {
        &self.grid
    }

    /// Bloch view `(θ₀^{ij}, θ⃗_ij)` of each entry with normalization `d²`, row-major.
    pub fn coefficients(&self) -> Vec<BlochCoefficients> {
        let basis = gell_mann_basis(self.dim()).expect("dimension validated on construction");
        let norm = (self.d * self.d) as f64;
        self.grid.iter().map(|t| basis.encode(t, norm).expect("dimensions agree")).collect()
    }

    /// Largest entry of any `|Σ Θ̂ − 𝟙/d|` over rows and columns.
    pub fn constraint_residual(&self) -> f64 {
        let d = self.d;
        let target = HermitianOperator::identity(self.dim()).scale(1.0 / d as f64);
        let mut worst: f64 = 0.0;
        for k in 0..d {
            let row = sum_operators(self.dim(), (0..d).map(|j| self.entry(k, j)));
            let col = sum_operators(self.dim(), (0..d).map(|i| self.entry(i, k)));
            worst = worst.max(row.max_abs_diff(&target)).max(col.max_abs_diff(&target));
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    FromConjunction,
    FromTheta,
}

/// Entry with the most negative eigenvalue when a W-measure is not positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityFailure {
    pub entry: (usize, usize),
    pub eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum JointExtraction {
    Joint(Povm),
    NotPositive(PositivityFailure),
}

#[derive(Debug, Clone)]
pub struct WMeasure {
    d: usize,
    grid: Vec<HermitianOperator>,
    a: Povm,
    b: Povm,
    provenance: Provenance,
}

impl WMeasure {
    pub fn from_conjunction(a: &Povm, b: &Povm, conjunction: &Povm) -> Result<Self> {
        let d = check_pair(a, b)?;
        if conjunction.dim() != a.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), found: conjunction.dim() });
        }
        if conjunction.outcomes() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, found: conjunction.outcomes() });
        }
        let dim = a.dim();
        let c = |i: usize, j: usize| conjunction.effect(pair_index(d, i, j));
        let row_sums: Vec<_> = (0..d).map(|i| sum_operators(dim, (0..d).map(|j| c(i, j)))).collect();
        let col_sums: Vec<_> = (0..d).map(|j| sum_operators(dim, (0..d).map(|i| c(i, j)))).collect();
        let inv_d = 1.0 / d as f64;
        let mut grid = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut w = c(i, j).clone();
                w.axpy(inv_d, a.effect(i));
                w.axpy(-inv_d, &row_sums[i]);
                w.axpy(inv_d, b.effect(j));
                w.axpy(-inv_d, &col_sums[j]);
                grid.push(w);
            }
        }
        Ok(Self { d, grid, a: a.clone(), b: b.clone(), provenance: Provenance::FromConjunction })
    }

    pub fn from_theta(a: &Povm, b: &Povm, theta: &DifferentialSet) -> Result<Self> {
        let d = check_pair(a, b)?;
        if theta.d() != d {
            return Err(Error::DimensionMismatch { expected: d, found: theta.d() });
        }
        if theta.dim() != a.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), found: theta.dim() });
        }
        let residual = theta.constraint_residual();
        if residual > THETA_CONSTRAINT_TOL {
            return Err(Error::Domain(format!("differential operators violate row/column sums by {residual:e}")));
        }
        let inv_d = 1.0 / d as f64;
        let mut grid = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut w = theta.entry(i, j).scale(-1.0);
                w.axpy(inv_d, a.effect(i));
                w.axpy(inv_d, b.effect(j));
                grid.push(w);
            }
        }
        Ok(Self { d, grid, a: a.clone(), b: b.clone(), provenance: Provenance::FromTheta })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn entry(&self, i: usize, j: usize) -> &HermitianOperator {
        &self.grid[pair_index(self.d, i, j)]
    }

    pub fn grid(&self) -> &[HermitianOperator] {
        &self.grid
    }

    pub fn marginal_a(&self) -> &Povm {
        &self.a
    }

    pub fn marginal_b(&self) -> &Povm {
        &self.b
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Largest deviation of `Σ_j Ŵ_ij` from `Â_i` or `Σ_i Ŵ_ij` from `B̂_j`.
    pub fn marginal_residual(&self) -> f64 {
        let (d, dim) = (self.d, self.dim());
        let mut worst: f64 = 0.0;
        for k in 0..d {
            let row = sum_operators(dim, (0..d).map(|j| self.entry(k, j)));
            let col = sum_operators(dim, (0..d).map(|i| self.entry(i, k)));
            worst = worst.max(row.max_abs_diff(self.a.effect(k)));
            worst = worst.max(col.max_abs_diff(self.b.effect(k)));
        }
        worst
    }

    pub fn completeness_residual(&self) -> f64 {
        sum_operators(self.dim(), &self.grid).max_abs_diff(&HermitianOperator::identity(self.dim()))
    }

    /// `N = (1/D) Σ_ij ‖ |Ŵ_ij| − Ŵ_ij ‖`.
    pub fn negativity(&self) -> Result<f64> {
        let mut total = 0.0;
        for w in &self.grid {
            total += w.negative_part_norm()?;
        }
        Ok(total / self.dim() as f64)
    }

    /// `(1/D) Σ_ij ‖Ŵ_ij‖ − 1`, equal to [`negativity`](Self::negativity) by completeness.
    pub fn negativity_from_trace_norms(&self) -> Result<f64> {
        let mut total = 0.0;
        for w in &self.grid {
            total += w.trace_norm()?;
        }
        Ok(total / self.dim() as f64 - 1.0)
    }

    /// Most negative eigenvalue over all entries with its location.
    pub fn min_eigenvalue(&self) -> Result<((usize, usize), f64)> {
        let mut best = ((0, 0), f64::INFINITY);
        for i in 0..self.d {
            for j in 0..self.d {
                let l = self.entry(i, j).min_eigenvalue()?;
                if l < best.1 {
                    best = ((i, j), l);
                }
            }
        }
        Ok(best)
    }

    /// Returns the W-measure as a `d²`-outcome joint POVM when every entry
    /// is positive (to [`PSD_TOL`]), otherwise the most negative entry.
    pub fn extract_joint(&self) -> Result<JointExtraction> {
        let (entry, eigenvalue) = self.min_eigenvalue()?;
        if eigenvalue < -PSD_TOL {
            return Ok(JointExtraction::NotPositive(PositivityFailure { entry, eigenvalue }));
        }
        Ok(JointExtraction::Joint(Povm::new(self.grid.clone())?))
    }
}

/// Bloch vectors `a⃗_i` of an unbiased qubit POVM `Â_i = (𝟙 + a⃗_i·σ⃗)/d`.
///
/// Returns `None` when the POVM is not a qubit POVM of that form.
pub fn unbiased_qubit_vectors(p: &Povm) -> Option<Vec<Vector3<f64>>> {
    if p.dim() != 2 {
        return None;
    }
    let d = p.outcomes() as f64;
    p.effects()
        .iter()
        .map(|e| {
            let (s, v) = crate::povm::qubit_components(e).ok()?;
            // (s𝟙 + v·σ)/2 = (𝟙 + a·σ)/d  ⇒  s = 2/d, a = d v / 2.
            ((s - 2.0 / d).abs() < 1e-10).then(|| v * (d / 2.0))
        })
        .collect()
}

/// Eigenvalue pairs `λ_k^{ij} = (2 − θ₀^{ij} + ω^k |a⃗_i + b⃗_j − θ⃗_ij|)/d²`
/// of a qubit W-measure built from unbiased POVMs, row-major, ascending.
pub fn qubit_unbiased_eigenvalues(
    a: &[Vector3<f64>],
    b: &[Vector3<f64>],
    theta: &DifferentialSet,
) -> Result<Vec<[f64; 2]>> {
    let d = theta.d();
    if a.len() != d || b.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: a.len().min(b.len()) });
    }
    if theta.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: theta.dim() });
    }
    let norm = (d * d) as f64;
    let coeffs = theta.coefficients();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let c = &coeffs[pair_index(d, i, j)];
            let t = Vector3::new(c.vector[0], c.vector[1], c.vector[2]);
            let r = (a[i] + b[j] - t).norm();
            out.push([(2.0 - c.scalar - r) / norm, (2.0 - c.scalar + r) / norm]);
        }
    }
    Ok(out)
}

/// Negativity from the closed-form qubit eigenvalues; matches
/// [`WMeasure::negativity`] on unbiased qubit inputs.
pub fn qubit_unbiased_negativity(a: &[Vector3<f64>], b: &[Vector3<f64>], theta: &DifferentialSet) -> Result<f64> {
    let eig = qubit_unbiased_eigenvalues(a, b, theta)?;
    Ok(eig.iter().flatten().map(|&l| l.abs() - l).sum::<f64>() / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::{dichotomic_from_spec, trichotomic_from_spec, Plane};
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn z_pvm() -> Povm {
        dichotomic_from_spec(0.0, &Vector3::z()).unwrap()
    }

    fn x_pvm() -> Povm {
        dichotomic_from_spec(0.0, &Vector3::x()).unwrap()
    }

    fn product_conjunction(a: &Povm, b: &Povm) -> Povm {
        let mut effects = Vec::new();
        for ai in a.effects() {
            for bj in b.effects() {
                effects.push(ai.product_hermitian_part(bj));
            }
        }
        Povm::new(effects).unwrap()
    }

    fn uniform_conjunction(d: usize, dim: usize) -> Povm {
        Povm::new(vec![HermitianOperator::identity(dim).scale(1.0 / (d * d) as f64); d * d]).unwrap()
    }

    #[test]
    fn commuting_pvms_with_product_conjunction_reproduce_it() {
        let z = z_pvm();
        let c = product_conjunction(&z, &z);
        let w = WMeasure::from_conjunction(&z, &z, &c).unwrap();
        for (wij, cij) in w.grid().iter().zip(c.effects()) {
            assert!(wij.max_abs_diff(cij) < 1e-15);
        }
        assert_eq!(w.negativity().unwrap(), 0.0);
        match w.extract_joint().unwrap() {
            JointExtraction::Joint(j) => assert_eq!(j.outcomes(), 4),
            other => panic!("expected joint POVM, got {other:?}"),
        }
    }

    #[test]
    fn uniform_conjunction_matches_closed_form() {
        let a = dichotomic_from_spec(0.1, &Vector3::new(0.3, 0.2, -0.4)).unwrap();
        let b = dichotomic_from_spec(0.0, &Vector3::new(-0.5, 0.1, 0.6)).unwrap();
        let w = WMeasure::from_conjunction(&a, &b, &uniform_conjunction(2, 2)).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expected =
                    &(&a.effect(i).scale(0.5) + &b.effect(j).scale(0.5)) - &HermitianOperator::identity(2).scale(0.25);
                assert!(w.entry(i, j).max_abs_diff(&expected) < 1e-15);
            }
        }
        let via_theta = WMeasure::from_theta(&a, &b, &DifferentialSet::uniform(2, 2)).unwrap();
        for (x, y) in w.grid().iter().zip(via_theta.grid()) {
            assert!(x.max_abs_diff(y) < 1e-15);
        }
        assert!(w.marginal_residual() < 1e-15);
        assert!(w.completeness_residual() < 1e-15);
    }

    #[test]
    fn z_versus_x_uniform_is_negative() {
        let w = WMeasure::from_conjunction(&z_pvm(), &x_pvm(), &uniform_conjunction(2, 2)).unwrap();
        let (_, lmin) = w.min_eigenvalue().unwrap();
        assert!((lmin - (1.0 - SQRT_2) / 4.0).abs() < 1e-15);
        let n = w.negativity().unwrap();
        assert!((n - (SQRT_2 - 1.0)).abs() < 1e-15);
        assert!((w.negativity_from_trace_norms().unwrap() - (SQRT_2 - 1.0)).abs() < 1e-15);
        match w.extract_joint().unwrap() {
            JointExtraction::NotPositive(f) => assert!((f.eigenvalue - lmin).abs() < 1e-15),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn theta_with_scalar_entries_gives_supplement_eigenvalues() {
        let av = Vector3::new(0.4, 0.1, 0.3);
        let bv = Vector3::new(-0.2, 0.5, 0.1);
        let a = dichotomic_from_spec(0.0, &av).unwrap();
        let b = dichotomic_from_spec(0.0, &bv).unwrap();
        let theta0 = 0.8;
        let grid = vec![
            HermitianOperator::identity(2).scale(theta0 / 4.0),
            HermitianOperator::identity(2).scale((2.0 - theta0) / 4.0),
            HermitianOperator::identity(2).scale((2.0 - theta0) / 4.0),
            HermitianOperator::identity(2).scale(theta0 / 4.0),
        ];
        let theta = DifferentialSet::new(2, grid).unwrap();
        let w = WMeasure::from_theta(&a, &b, &theta).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let ai = av * crate::povm::omega_pow(i + 1);
                let bj = bv * crate::povm::omega_pow(j + 1);
                let t0 = if i == j { theta0 } else { 2.0 - theta0 };
                let r = (ai + bj).norm();
                let vals = w.entry(i, j).eigenvalues().unwrap();
                assert!((vals[0] - (2.0 - t0 - r) / 4.0).abs() < 1e-15);
                assert!((vals[1] - (2.0 - t0 + r) / 4.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn from_theta_rejects_constraint_violation() {
        let a = z_pvm();
        let mut grid = DifferentialSet::uniform(2, 2).grid().to_vec();
        grid[0] = grid[0].scale(1.1);
        assert!(matches!(DifferentialSet::new(2, grid.clone()), Err(Error::Domain(_))));
        let bad = DifferentialSet::from_grid_unchecked(2, grid);
        assert!(matches!(WMeasure::from_theta(&a, &a, &bad), Err(Error::Domain(_))));
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let a = z_pvm();
        let t = trichotomic_from_spec(0.5, 0.0, &Plane::default()).unwrap();
        assert!(matches!(
            WMeasure::from_conjunction(&a, &t, &uniform_conjunction(2, 2)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(WMeasure::from_conjunction(&a, &a, &uniform_conjunction(3, 2)).is_err());
        assert!(WMeasure::from_theta(&a, &a, &DifferentialSet::uniform(3, 2)).is_err());
        assert!(WMeasure::from_theta(&a, &a, &DifferentialSet::uniform(2, 3)).is_err());
    }

    #[test]
    fn boundary_pair_with_optimal_theta_extracts() {
        let mu = FRAC_1_SQRT_2;
        let a = dichotomic_from_spec(0.0, &Vector3::new(mu, 0.0, 0.0)).unwrap();
        let b = dichotomic_from_spec(0.0, &Vector3::new(0.0, mu, 0.0)).unwrap();
        // Feasibility window collapses to θ₀¹¹ = 1, i.e. the uniform Θ.
        let w = WMeasure::from_theta(&a, &b, &DifferentialSet::uniform(2, 2)).unwrap();
        assert!(w.negativity().unwrap() < 1e-15);
        let JointExtraction::Joint(j) = w.extract_joint().unwrap() else {
            panic!("boundary pair should extract");
        };
        let again = WMeasure::from_conjunction(&a, &b, &j).unwrap();
        for (x, y) in again.grid().iter().zip(w.grid()) {
            assert!(x.max_abs_diff(y) < 1e-15);
        }
    }

    #[test]
    fn unbiased_vector_extraction() {
        let t = trichotomic_from_spec(0.8, 0.3, &Plane::default()).unwrap();
        let v = unbiased_qubit_vectors(&t).unwrap();
        let sum: Vector3<f64> = v.iter().sum();
        assert!(sum.norm() < 1e-14);
        assert!(v.iter().all(|x| (x.norm() - 0.8).abs() < 1e-14));
        let biased = dichotomic_from_spec(0.2, &(Vector3::x() * 0.3)).unwrap();
        assert!(unbiased_qubit_vectors(&biased).is_none());
        let z = unbiased_qubit_vectors(&z_pvm()).unwrap();
        assert!((z[1] - Vector3::z()).norm() < 1e-15);
        assert!((z[0] + Vector3::z()).norm() < 1e-15);
    }
}
