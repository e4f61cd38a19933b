//! Joint measurability of quantum measurements.
//!
//! Two POVMs `A` and `B` are jointly measurable exactly when some W-measure
//! `Ŵ_ij = (Â_i + B̂_j)/d − Θ̂_ij` with prescribed marginals is positive.
//! This crate builds W-measures, minimizes their negativity over the
//! differential operators `Θ`, and provides closed-form criteria for
//! two- and three-outcome qubit measurements together with the sequential
//! (Lüders) measurement test.

pub mod criteria;
pub mod error;
pub mod operator;
pub mod optimizer;
pub mod povm;
pub mod schema;
pub mod ssm;
pub mod wmeasure;

pub use error::{Error, Result};
