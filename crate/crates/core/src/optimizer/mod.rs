//! Numerical minimization of the W-measure negativity over differential
//! operators, and a direct joint-POVM search used as an independent oracle.

mod joint_search;
mod landscape;
mod nelder_mead;
mod param;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{dichotomic_optimal_theta, trichotomic_witness};
use crate::error::{Error, Result};
use crate::povm::Povm;
use crate::wmeasure::{unbiased_qubit_vectors, DifferentialSet, WMeasure};

pub use joint_search::{joint_povm_search, JointSearchResult};
pub use landscape::{negativity_landscape, Axis, AxisRange, Family, LandscapePoint, SliceSpec};
pub use param::ThetaParameterization;

use nelder_mead::Settings;
use param::Objective;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub seed: u64,
    pub restarts: usize,
    /// Objective evaluations per restart.
    pub max_evals: usize,
    /// Simplex diameter (max-norm, parameter space) at which a run stops.
    pub simplex_tol: f64,
    /// `n_min` at or below this is reported as jointly measurable.
    pub jm_tolerance: f64,
    /// Seed one restart with the closed-form structure for unbiased qubit families.
    pub warm_start: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { seed: 0, restarts: 8, max_evals: 20_000, simplex_tol: 1e-9, jm_tolerance: 1e-7, warm_start: true }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_evals == 0 {
            return Err(Error::Validation("restarts and max_evals must be positive".into()));
        }
        if !(self.simplex_tol > 0.0 && self.jm_tolerance >= 0.0) {
            return Err(Error::Validation("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub n_min: f64,
    pub theta_star: DifferentialSet,
    pub evaluations: usize,
    pub converged: bool,
    pub restarts_used: usize,
}

impl OptimizationResult {
    pub fn jointly_measurable(&self, config: &OptimizerConfig) -> bool {
        self.n_min <= config.jm_tolerance
    }
}

/// Below this negativity a second pass maximizes the smallest W eigenvalue,
/// which both settles near-zero cases and moves the witness off the boundary.
const POLISH_THRESHOLD: f64 = 1e-3;

const INITIAL_STEP: f64 = 0.25;
const RESTART_SPREAD: f64 = 0.5;

fn warm_start_theta(a: &Povm, b: &Povm) -> Option<DifferentialSet> {
    let va = unbiased_qubit_vectors(a)?;
    let vb = unbiased_qubit_vectors(b)?;
    match a.outcomes() {
        2 => Some(dichotomic_optimal_theta(&va[1], &vb[1])),
        3 => Some(trichotomic_witness(&[va[0], va[1], va[2]], &[vb[0], vb[1], vb[2]])),
        _ => None,
    }
}

fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(restart as u64)
}

/// Smoothing widths for the surrogate passes that precede the exact objective.
const SMOOTHING: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// One restart. Single simplex passes over smoothed negativities of
/// decreasing width each start where the previous ended, with a simplex
/// sized to the previous width. The exact negativity then gets the rest of
/// the budget and repeated fresh simplices.
fn run_restart(objective: &Objective, x0: &[f64], settings: &Settings) -> Run {
    let exact = |x: &[f64]| objective.spectrum(x).negativity;
    let mut x = x0.to_vec();
    // Best point under the exact objective; a warm start may already be optimal.
    let (mut best, mut best_fx) = (x.clone(), exact(&x));
    let mut evals = 1;
    if best_fx <= settings.floor {
        return Run { x, fx: 0.0, evals, converged: true };
    }
    let mut step = settings.step;
    for (k, &eps) in SMOOTHING.iter().enumerate() {
        // A surrogate of width ε only locates the minimum to about ε.
        let stage = Settings {
            step,
            max_evals: settings.max_evals.saturating_sub(evals) / (SMOOTHING.len() + 1 - k),
            tol: settings.tol.max(eps),
            floor: f64::NEG_INFINITY,
            ..*settings
        };
        let mut f = |x: &[f64]| objective.smoothed_spectrum(x, eps).negativity;
        let out = nelder_mead::minimize(&mut f, &x, &stage);
        evals += out.evals + 1;
        x = out.x;
        let fx = exact(&x);
        if fx <= settings.floor {
            return Run { x, fx: 0.0, evals, converged: true };
        }
        if fx < best_fx {
            (best, best_fx) = (x.clone(), fx);
        }
        step = settings.step.min(10.0 * eps);
    }
    let stage = Settings { step, max_evals: settings.max_evals.saturating_sub(evals), ..*settings };
    let mut f = |x: &[f64]| exact(x);
    let out = nelder_mead::minimize_with_restarts(&mut f, &best, &stage);
    Run { x: out.x, fx: out.fx, evals: evals + out.evals, converged: out.converged }
}

struct Run {
    x: Vec<f64>,
    fx: f64,
    evals: usize,
    converged: bool,
}

/// Minimizes `N(Θ)` over the free block of differential operators.
///
/// Restart 0 starts at the uniform set; with `warm_start`, restart 1 starts at
/// the closed-form solution for unbiased two- and three-outcome qubit pairs.
/// Remaining restarts perturb the uniform point with seeded Gaussian noise.
/// Restarts run concurrently and are merged by minimum (ties: lowest index).
pub fn minimize_negativity(a: &Povm, b: &Povm, config: &OptimizerConfig) -> Result<OptimizationResult> {
    config.validate()?;
    let objective = Objective::new(a, b)?;
    let param = objective.param();
    let uniform = param.uniform_params();
    let warm = if config.warm_start { warm_start_theta(a, b) } else { None };
    let warm = warm.map(|t| param.params_from_theta(&t)).transpose()?;

    let starts: Vec<Vec<f64>> = (0..config.restarts)
        .map(|r| match (r, &warm) {
            (0, _) => uniform.clone(),
            (1, Some(w)) => w.clone(),
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(config.seed, r));
                let noise = Normal::new(0.0, RESTART_SPREAD).expect("finite spread");
                uniform.iter().map(|u| u + noise.sample(&mut rng)).collect()
            }
        })
        .collect();

    let settings = Settings {
        step: INITIAL_STEP,
        max_evals: config.max_evals,
        tol: config.simplex_tol,
        floor: 0.0,
        // N is Lipschitz in the coefficients, so gains below the simplex
        // tolerance are below the resolution that tolerance asks for.
        min_gain: config.simplex_tol,
    };
    let runs: Vec<Run> = starts.par_iter().map(|x0| run_restart(&objective, x0, &settings)).collect();

    let mut evaluations: usize = runs.iter().map(|r| r.evals).sum();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(i, r), (j, s)| r.fx.total_cmp(&s.fx).then(i.cmp(j)))
        .map(|(_, r)| r)
        .expect("at least one restart");
    let mut x_best = best.x.clone();
    let mut converged = best.converged;

    if best.fx <= POLISH_THRESHOLD {
        let polish = Settings { floor: f64::NEG_INFINITY, ..settings };
        let mut g = |x: &[f64]| -objective.spectrum(x).min_eigenvalue;
        let out = nelder_mead::minimize_with_restarts(&mut g, &x_best, &polish);
        evaluations += out.evals;
        let polished = objective.spectrum(&out.x).negativity;
        if polished <= best.fx {
            x_best = out.x;
            converged |= polished == 0.0;
        }
    }

    let theta_star = param.differential_set(&x_best)?;
    let n_min = WMeasure::from_theta(a, b, &theta_star)?.negativity()?;
    Ok(OptimizationResult { n_min, theta_star, evaluations, converged, restarts_used: config.restarts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::{dichotomic_unbiased_negativity, trichotomic_negativity};
    use crate::povm::{dichotomic_from_spec, trichotomic_from_spec, trichotomic_vectors, Plane};
    use crate::wmeasure::JointExtraction;
    use nalgebra::Vector3;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn dich(v: Vector3<f64>) -> Povm {
        dichotomic_from_spec(0.0, &v).unwrap()
    }

    #[test]
    fn parameterization_is_feasible_everywhere() {
        for (d, dim) in [(2, 2), (3, 2), (2, 3), (4, 2)] {
            let p = ThetaParameterization::new(d, dim).unwrap();
            assert_eq!(p.param_count(), (d - 1) * (d - 1) * dim * dim);
            let x: Vec<f64> = (0..p.param_count()).map(|k| ((k * 37 % 11) as f64 - 5.0) / 3.0).collect();
            let theta = p.differential_set(&x).unwrap();
            assert!(theta.constraint_residual() < 1e-13);
            let back = p.params_from_theta(&theta).unwrap();
            assert!(back.iter().zip(&x).all(|(u, v)| (u - v).abs() < 1e-13));
            let u = p.differential_set(&p.uniform_params()).unwrap();
            assert!(u.entry(d - 1, d - 1).max_abs_diff(DifferentialSet::uniform(d, dim).entry(0, 0)) < 1e-15);
        }
    }

    #[test]
    fn z_versus_x_matches_closed_form() {
        for warm_start in [true, false] {
            let cfg = OptimizerConfig { warm_start, ..Default::default() };
            let r = minimize_negativity(&dich(Vector3::z()), &dich(Vector3::x()), &cfg).unwrap();
            assert!((r.n_min - (SQRT_2 - 1.0)).abs() < 1e-6, "warm {warm_start}: {}", r.n_min);
            assert!(!r.jointly_measurable(&cfg));
            assert!(r.converged);
        }
    }

    #[test]
    fn commuting_pvms_reach_zero() {
        let cfg = OptimizerConfig::default();
        let r = minimize_negativity(&dich(Vector3::z()), &dich(-Vector3::z()), &cfg).unwrap();
        assert_eq!(r.n_min, 0.0);
        let w = WMeasure::from_theta(&dich(Vector3::z()), &dich(-Vector3::z()), &r.theta_star).unwrap();
        assert!(matches!(w.extract_joint().unwrap(), JointExtraction::Joint(_)));
    }

    #[test]
    fn boundary_pair_is_certified() {
        let cfg = OptimizerConfig { warm_start: false, ..Default::default() };
        let a = dich(Vector3::x() * FRAC_1_SQRT_2);
        let b = dich(Vector3::y() * FRAC_1_SQRT_2);
        let r = minimize_negativity(&a, &b, &cfg).unwrap();
        assert!(r.jointly_measurable(&cfg), "{}", r.n_min);
    }

    #[test]
    fn cold_start_matches_dichotomic_closed_form() {
        let cfg = OptimizerConfig { warm_start: false, ..Default::default() };
        let cases = [
            (Vector3::new(0.9, 0.1, 0.0), Vector3::new(0.1, 0.8, 0.3)),
            (Vector3::new(0.5, -0.5, 0.5), Vector3::new(0.0, 0.7, 0.7)),
            (Vector3::new(0.3, 0.2, 0.1), Vector3::new(-0.2, 0.3, 0.1)),
        ];
        for (va, vb) in cases {
            let r = minimize_negativity(&dich(va), &dich(vb), &cfg).unwrap();
            let closed = dichotomic_unbiased_negativity(&va, &vb).unwrap().minimized_negativity.unwrap();
            assert!((r.n_min - closed).abs() < 1e-6, "{va:?} {vb:?}: {} vs {closed}", r.n_min);
        }
    }

    #[test]
    fn trichotomic_above_threshold_matches_closed_form() {
        let plane = Plane::default();
        for warm_start in [true, false] {
            let cfg = OptimizerConfig { warm_start, ..Default::default() };
            let a = trichotomic_from_spec(0.9, 0.0, &plane).unwrap();
            let b = trichotomic_from_spec(0.9, PI / 3.0, &plane).unwrap();
            let r = minimize_negativity(&a, &b, &cfg).unwrap();
            let closed = trichotomic_negativity(
                &trichotomic_vectors(0.9, 0.0, &plane),
                &trichotomic_vectors(0.9, PI / 3.0, &plane),
            );
            let closed = closed.minimized_negativity.unwrap();
            assert!(closed > 0.0);
            assert!((r.n_min - closed).abs() < 1e-5, "warm {warm_start}: {} vs {closed}", r.n_min);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = OptimizerConfig { seed: 7, warm_start: false, ..Default::default() };
        let a = dich(Vector3::new(0.9, 0.1, 0.0));
        let b = dich(Vector3::new(0.1, 0.8, 0.3));
        let r1 = minimize_negativity(&a, &b, &cfg).unwrap();
        let r2 = minimize_negativity(&a, &b, &cfg).unwrap();
        assert_eq!(r1.n_min, r2.n_min);
        assert_eq!(r1.evaluations, r2.evaluations);
    }

    #[test]
    fn config_rejects_nonsense() {
        assert!(OptimizerConfig { restarts: 0, ..Default::default() }.validate().is_err());
        assert!(OptimizerConfig { simplex_tol: 0.0, ..Default::default() }.validate().is_err());
    }
}
