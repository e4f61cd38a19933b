//! Closed-form joint-measurability criteria for qubit POVM families.
//!
//! - two-outcome unbiased pairs: minimized negativity
//!   `max((|a⃗+b⃗| + |a⃗−b⃗|)/2 − 1, 0)`, zero exactly on Busch's criterion;
//! - two-outcome biased pairs: the product-form inequality in `F_A`, `F_B`;
//! - three-outcome unbiased pairs: minimized negativity from the solution
//!   matrix `θ⃗ˢ_ij = a⃗_{2(i+j)} + b⃗_{2(i+j)}` and the `μ_th`, `R_th` thresholds.

mod dichotomic;
mod thresholds;
mod trichotomic;

pub use dichotomic::{
    dichotomic_biased_criterion, dichotomic_optimal_theta, dichotomic_unbiased_negativity,
    theta0_feasibility_dichotomic, ThetaWindow,
};
pub use thresholds::{
    dichotomic_mu_threshold, dichotomic_r_threshold, dichotomic_unbiased_entropy, mu_for_dichotomic_entropy,
    mu_for_trichotomic_entropy, mu_threshold, r_threshold, trichotomic_entropy,
};
pub use trichotomic::{
    best_labeling, solution_index, trichotomic_negativity, trichotomic_solution, trichotomic_witness, Labeling,
    TrichotomicSolution,
};

/// Absolute tolerance on `criterion_margin` for a jointly-measurable verdict.
pub const CRITERION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JmVerdict {
    pub jointly_measurable: bool,
    /// Minimized negativity, when the criterion determines it.
    pub minimized_negativity: Option<f64>,
    /// Signed distance to the boundary; `≤ 0` means jointly measurable.
    pub criterion_margin: f64,
}

impl JmVerdict {
    pub fn from_margin(criterion_margin: f64, minimized_negativity: Option<f64>) -> Self {
        Self { jointly_measurable: criterion_margin <= CRITERION_TOL, minimized_negativity, criterion_margin }
    }
}
