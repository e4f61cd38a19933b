//! Generalized Gell-Mann basis and Bloch-coefficient views.
//!
//! Elements are normalized so that `Tr γ_k γ_l = D δ_kl`, which makes the
//! qubit basis exactly `{𝟙, σx, σy, σz}`.

use nalgebra::{DMatrix, Vector3};

use super::{ComplexMatrix, HermitianOperator, C64};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<HermitianOperator>,
}

/// Real coefficients of `op = (scalar·𝟙 + Σ_k vector[k]·γ_k) / normalization`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochCoefficients {
    pub scalar: f64,
    pub vector: Vec<f64>,
}

impl BlochCoefficients {
    pub fn zero(dim: usize) -> Self {
        Self { scalar: 0.0, vector: vec![0.0; dim * dim - 1] }
    }

    /// Flattened `[scalar, vector...]`, length D².
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.vector.len() + 1);
        out.push(self.scalar);
        out.extend_from_slice(&self.vector);
        out
    }

    pub fn from_flat(flat: &[f64]) -> Self {
        Self { scalar: flat[0], vector: flat[1..].to_vec() }
    }

    pub fn vector_norm(&self) -> f64 {
        self.vector.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

pub fn gell_mann_basis(dim: usize) -> Result<OperatorBasis> {
    if dim < 2 {
        return Err(Error::Domain(format!("basis dimension must be at least 2, got {dim}")));
    }
    let zero = C64::new(0.0, 0.0);
    // Standard Gell-Mann matrices have Tr λ² = 2; rescale to D.
    let rescale = (dim as f64 / 2.0).sqrt();
    let mut elements = Vec::with_capacity(dim * dim);
    elements.push(HermitianOperator::identity(dim));

    for j in 0..dim {
        for k in (j + 1)..dim {
            let mut sym = ComplexMatrix::from_element(dim, dim, zero);
            sym[(j, k)] = C64::new(rescale, 0.0);
            sym[(k, j)] = C64::new(rescale, 0.0);
            elements.push(HermitianOperator { matrix: sym });

            let mut anti = ComplexMatrix::from_element(dim, dim, zero);
            anti[(j, k)] = C64::new(0.0, -rescale);
            anti[(k, j)] = C64::new(0.0, rescale);
            elements.push(HermitianOperator { matrix: anti });
        }
    }
    for l in 1..dim {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt() * rescale;
        let mut diag = vec![0.0; dim];
        diag[..l].iter_mut().for_each(|x| *x = norm);
        diag[l] = -(l as f64) * norm;
        elements.push(HermitianOperator::from_real_diagonal(&diag));
    }
    Ok(OperatorBasis { dim, elements })
}

impl OperatorBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    /// Traceless part `γ_1 .. γ_{D²−1}`.
    pub fn traceless(&self) -> &[HermitianOperator] {
        &self.elements[1..]
    }

    pub fn encode(&self, op: &HermitianOperator, normalization: f64) -> Result<BlochCoefficients> {
        if op.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: op.dim() });
        }
        let d = self.dim as f64;
        Ok(BlochCoefficients {
            scalar: normalization * op.trace() / d,
            vector: self.traceless().iter().map(|g| normalization * op.hs_inner(g) / d).collect(),
        })
    }

    pub fn decode(&self, coeffs: &BlochCoefficients, normalization: f64) -> Result<HermitianOperator> {
        if coeffs.vector.len() + 1 != self.elements.len() {
            return Err(Error::DimensionMismatch { expected: self.elements.len() - 1, found: coeffs.vector.len() });
        }
        let mut op = HermitianOperator::identity(self.dim).scale(coeffs.scalar);
        for (g, &x) in self.traceless().iter().zip(&coeffs.vector) {
            op.axpy(x, g);
        }
        Ok(op.scale(1.0 / normalization))
    }

    /// Decodes a flat `[scalar, vector...]` slice without allocating coefficients.
    pub(crate) fn decode_flat_into(&self, flat: &[f64], normalization: f64, out: &mut HermitianOperator) {
        out.matrix.fill(C64::new(0.0, 0.0));
        for (g, &x) in self.elements.iter().zip(flat) {
            if x != 0.0 {
                out.axpy(x / normalization, g);
            }
        }
    }
}

/// `v·σ` for a real 3-vector.
pub fn pauli_dot(v: &Vector3<f64>) -> HermitianOperator {
    HermitianOperator {
        matrix: DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(v.z, 0.0), C64::new(v.x, -v.y), C64::new(v.x, v.y), C64::new(-v.z, 0.0)],
        ),
    }
}
