//! JSON documents for POVMs, states and measured statistics.
//!
//! A POVM is either dense, `{"dim": D, "effects": [[[[re, im], ...], ...], ...]}`
//! with each effect a row-major list of rows, or in Bloch form:
//!
//! ```json
//! {"bloch": {"outcomes": 2, "bias": 0.0, "vector": [0, 0, 1]}}
//! {"bloch": {"outcomes": 3, "mu": 0.8, "phi": 1.047}}
//! {"bloch": {"outcomes": 3, "vectors": [[..], [..], [..]]}}
//! ```

use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{HermitianOperator, C64};
use crate::povm::{BlochPovmSpec, DensityMatrix, Plane, Povm};

pub type ComplexEntry = [f64; 2];
pub type ComplexRows = Vec<Vec<ComplexEntry>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlochDocument {
    pub outcomes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effects: Option<Vec<ComplexRows>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bloch: Option<BlochDocument>,
}

fn matrix_from_rows(rows: &ComplexRows, dim: usize) -> Result<DMatrix<C64>> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Validation(format!("matrix must be {dim}×{dim}")));
    }
    Ok(DMatrix::from_fn(dim, dim, |r, c| C64::new(rows[r][c][0], rows[r][c][1])))
}

fn rows_from_matrix(m: &DMatrix<C64>) -> ComplexRows {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}

impl BlochDocument {
    pub fn to_spec(&self) -> Result<BlochPovmSpec> {
        match self.outcomes {
            2 => {
                if self.vectors.is_some() || self.mu.is_some() || self.phi.is_some() {
                    return Err(Error::Validation("two-outcome Bloch POVM takes only bias and vector".into()));
                }
                let v = self.vector.ok_or_else(|| Error::Validation("two-outcome Bloch POVM needs vector".into()))?;
                Ok(BlochPovmSpec::Dichotomic { bias: self.bias.unwrap_or(0.0), vector: Vector3::from(v) })
            }
            3 => {
                if self.bias.is_some_and(|b| b != 0.0) || self.vector.is_some() {
                    return Err(Error::Validation(
                        "three-outcome Bloch POVM is unbiased and takes vectors or mu/phi".into(),
                    ));
                }
                match (&self.vectors, self.mu, self.phi) {
                    (Some(vs), None, None) => {
                        let vs: [[f64; 3]; 3] = vs.clone().try_into().map_err(|_| {
                            Error::Validation("three-outcome Bloch POVM needs exactly 3 vectors".into())
                        })?;
                        Ok(BlochPovmSpec::Trichotomic { vectors: vs.map(Vector3::from) })
                    }
                    (None, Some(mu), phi) => {
                        BlochPovmSpec::trichotomic_equilateral(mu, phi.unwrap_or(0.0), &Plane::default())
                    }
                    _ => Err(Error::Validation("give either vectors or mu (and optional phi)".into())),
                }
            }
            n => Err(Error::Validation(format!("Bloch form supports 2 or 3 outcomes, got {n}"))),
        }
    }
}

impl PovmDocument {
    pub fn to_povm(&self) -> Result<Povm> {
        match (&self.bloch, self.dim, &self.effects) {
            (Some(b), None, None) => b.to_spec()?.to_povm(),
            (None, Some(dim), Some(effects)) => {
                if effects.is_empty() {
                    return Err(Error::Validation("POVM needs at least one effect".into()));
                }
                let ops = effects
                    .iter()
                    .map(|rows| HermitianOperator::new(matrix_from_rows(rows, dim)?))
                    .collect::<Result<Vec<_>>>()?;
                Povm::new(ops)
            }
            _ => Err(Error::Validation("POVM document needs either {dim, effects} or {bloch}".into())),
        }
    }

    pub fn from_povm(p: &Povm) -> Self {
        Self {
            dim: Some(p.dim()),
            effects: Some(p.effects().iter().map(|e| rows_from_matrix(e.matrix())).collect()),
            bloch: None,
        }
    }
}

/// A state as a density matrix, a pure state vector, or a qubit Bloch vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<ComplexRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<ComplexEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bloch: Option<[f64; 3]>,
}

impl StateDocument {
    pub fn to_state(&self) -> Result<DensityMatrix> {
        match (&self.matrix, &self.vector, &self.bloch) {
            (Some(rows), None, None) => {
                DensityMatrix::new(HermitianOperator::new(matrix_from_rows(rows, rows.len())?)?)
            }
            (None, Some(v), None) => {
                DensityMatrix::pure(&DVector::from_iterator(v.len(), v.iter().map(|z| C64::new(z[0], z[1]))))
            }
            (None, None, Some(r)) => {
                let r = Vector3::from(*r);
                DensityMatrix::new(crate::povm::qubit_operator(1.0, &r, 2.0))
            }
            _ => Err(Error::Validation("state document needs exactly one of matrix, vector, bloch".into())),
        }
    }
}

/// Measured statistics of `A`, `B` and the sequential conjunction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatisticsDocument {
    #[serde(rename = "pA")]
    pub p_a: Vec<f64>,
    #[serde(rename = "pB")]
    pub p_b: Vec<f64>,
    #[serde(rename = "pC")]
    pub p_c: Vec<Vec<f64>>,
}
