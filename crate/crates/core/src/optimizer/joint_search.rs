use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::{restart_seed, OptimizerConfig};
use crate::error::{Error, Result};
use crate::operator::{gell_mann_basis, sum_operators, ComplexMatrix, HermitianOperator, OperatorBasis, C64};
use crate::povm::Povm;
use crate::wmeasure::pair_index;

/// Marginal residual required for success.
const SUCCESS_RESIDUAL: f64 = 1e-7;
/// Weight on the squared marginal residual in the reported penalty.
const PENALTY_WEIGHT: f64 = 1e3;
const MAX_ITERATIONS: usize = 2000;

#[derive(Debug, Clone)]
pub struct JointSearchResult {
    /// The joint POVM over `d²` outcomes, row-major in `(i, j)`, on success.
    pub joint: Option<Povm>,
    /// Largest entry of any `Σ_j Ĵ_ij − Â_i` or `Σ_i Ĵ_ij − B̂_j`, best start.
    pub marginal_residual: f64,
    /// `10³ ‖r‖²` over the marginal residual coefficients, best start.
    pub penalty: f64,
    pub starts_used: usize,
}

impl JointSearchResult {
    pub fn success(&self) -> bool {
        self.joint.is_some()
    }
}

struct Problem<'a> {
    d: usize,
    dim: usize,
    gammas: Vec<ComplexMatrix>,
    a: &'a Povm,
    b: &'a Povm,
}

fn trace_product(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    let n = x.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..n {
        for q in 0..n {
            acc += x[(p, q)] * y[(q, p)];
        }
    }
    acc.re
}

impl Problem<'_> {
    fn block(&self) -> usize {
        self.dim * self.dim
    }

    fn factor(&self, x: &[f64], e: usize) -> ComplexMatrix {
        let b = self.block();
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for (g, &c) in self.gammas.iter().zip(&x[e * b..(e + 1) * b]) {
            m += g * C64::new(c, 0.0);
        }
        m
    }

    fn coefficients(&self, op: &ComplexMatrix) -> impl Iterator<Item = f64> + '_ {
        let inv = 1.0 / self.dim as f64;
        let op = op.clone();
        self.gammas.iter().map(move |g| trace_product(&op, g) * inv)
    }

    /// Marginal residual coefficients and their Jacobian.
    fn evaluate(&self, x: &[f64], with_jacobian: bool) -> (DVector<f64>, Option<DMatrix<f64>>) {
        let (d, b) = (self.d, self.block());
        let factors: Vec<ComplexMatrix> = (0..d * d).map(|e| self.factor(x, e)).collect();
        let squares: Vec<ComplexMatrix> = factors.iter().map(|m| m * m).collect();
        let mut r = DVector::zeros(2 * d * b);
        for i in 0..d {
            let mut row = -self.a.effect(i).matrix().clone();
            let mut col = -self.b.effect(i).matrix().clone();
            for j in 0..d {
                row += &squares[pair_index(d, i, j)];
                col += &squares[pair_index(d, j, i)];
            }
            for (k, c) in self.coefficients(&row).enumerate() {
                r[i * b + k] = c;
            }
            for (k, c) in self.coefficients(&col).enumerate() {
                r[(d + i) * b + k] = c;
            }
        }
        if !with_jacobian {
            return (r, None);
        }
        let mut jac = DMatrix::zeros(2 * d * b, d * d * b);
        for i in 0..d {
            for j in 0..d {
                let e = pair_index(d, i, j);
                let m = &factors[e];
                for (k, g) in self.gammas.iter().enumerate() {
                    let p = g * m + m * g;
                    for (l, c) in self.coefficients(&p).enumerate() {
                        jac[(i * b + l, e * b + k)] = c;
                        jac[((d + j) * b + l, e * b + k)] = c;
                    }
                }
            }
        }
        (r, Some(jac))
    }

    fn levenberg_marquardt(&self, mut x: Vec<f64>) -> Vec<f64> {
        let (mut r, jac) = self.evaluate(&x, true);
        let mut jac = jac.expect("jacobian requested");
        let mut cost = r.norm_squared();
        let mut lambda = 1e-3;
        for _ in 0..MAX_ITERATIONS {
            if r.amax() < 1e-14 {
                break;
            }
            let jt = jac.transpose();
            let grad = &jt * &r;
            let mut h = &jt * &jac;
            for k in 0..h.nrows() {
                h[(k, k)] += lambda;
            }
            let Some(chol) = h.cholesky() else {
                lambda *= 4.0;
                continue;
            };
            let step = chol.solve(&grad);
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a - s).collect();
            let (r_trial, _) = self.evaluate(&trial, false);
            let trial_cost = r_trial.norm_squared();
            if trial_cost < cost {
                x = trial;
                let (r_new, jac_new) = self.evaluate(&x, true);
                r = r_new;
                jac = jac_new.expect("jacobian requested");
                cost = trial_cost;
                lambda = (lambda / 3.0).max(1e-15);
            } else {
                lambda *= 4.0;
                if lambda > 1e10 {
                    break;
                }
            }
        }
        x
    }

    fn joint_effects(&self, x: &[f64]) -> Vec<HermitianOperator> {
        (0..self.d * self.d)
            .map(|e| {
                let m = self.factor(x, e);
                HermitianOperator::new(&m * &m).expect("square of a Hermitian matrix")
            })
            .collect()
    }

    fn marginal_residual(&self, effects: &[HermitianOperator]) -> f64 {
        let d = self.d;
        let mut worst: f64 = 0.0;
        for k in 0..d {
            let row = sum_operators(self.dim, (0..d).map(|j| &effects[pair_index(d, k, j)]));
            let col = sum_operators(self.dim, (0..d).map(|i| &effects[pair_index(d, i, k)]));
            worst = worst.max(row.max_abs_diff(self.a.effect(k))).max(col.max_abs_diff(self.b.effect(k)));
        }
        worst
    }

    /// Rescales `Ĵ_ij → S^{-1/2} Ĵ_ij S^{-1/2}` with `S = Σ Ĵ_ij` so that
    /// completeness holds to rounding.
    fn normalize(&self, effects: &[HermitianOperator]) -> Option<Vec<HermitianOperator>> {
        let total = sum_operators(self.dim, effects);
        let inv_sqrt = total.map_spectrum(|l| if l > 0.0 { 1.0 / l.sqrt() } else { f64::NAN }).ok()?;
        if inv_sqrt.matrix().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return None;
        }
        Some(effects.iter().map(|e| e.sandwich(&inv_sqrt)).collect())
    }
}

struct Attempt {
    joint: Option<Povm>,
    residual: f64,
    penalty: f64,
}

/// Searches directly for a joint POVM `Ĵ_ij = M̂_ij²` with `M̂_ij` Hermitian,
/// fitting the marginals by Levenberg–Marquardt from several seeded starts.
///
/// Start 0 uses `M̂_ij = (√Â_i B̂_j √Â_i)^{1/2}`; the rest are random. The
/// first successful start (in index order) wins.
pub fn joint_povm_search(a: &Povm, b: &Povm, config: &OptimizerConfig) -> Result<JointSearchResult> {
    config.validate()?;
    if a.outcomes() != b.outcomes() {
        return Err(Error::DimensionMismatch { expected: a.outcomes(), found: b.outcomes() });
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let (d, dim) = (a.outcomes(), a.dim());
    let basis: OperatorBasis = gell_mann_basis(dim)?;
    let gammas = basis.elements().iter().map(|g| g.matrix().clone()).collect();
    let problem = Problem { d, dim, gammas, a, b };

    let mut start0 = Vec::with_capacity(d * d * dim * dim);
    for i in 0..d {
        let root = a.effect(i).sqrt()?;
        for j in 0..d {
            let m = b.effect(j).sandwich(&root).sqrt()?;
            start0.extend(basis.encode(&m, 1.0)?.to_flat());
        }
    }
    let starts: Vec<Vec<f64>> = (0..config.restarts)
        .map(|s| {
            if s == 0 {
                return start0.clone();
            }
            let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(config.seed ^ 0x5EA4C4, s));
            let noise = Normal::new(0.0, 0.3 / d as f64).expect("finite spread");
            (0..start0.len())
                .map(|k| noise.sample(&mut rng) + if k % (dim * dim) == 0 { 1.0 / d as f64 } else { 0.0 })
                .collect()
        })
        .collect();

    let attempts: Vec<Attempt> = starts
        .into_par_iter()
        .map(|x0| {
            let x = problem.levenberg_marquardt(x0);
            let (r, _) = problem.evaluate(&x, false);
            let penalty = PENALTY_WEIGHT * r.norm_squared();
            let effects = problem.joint_effects(&x);
            let raw_residual = problem.marginal_residual(&effects);
            if raw_residual < SUCCESS_RESIDUAL {
                if let Some(normalized) = problem.normalize(&effects) {
                    let residual = problem.marginal_residual(&normalized);
                    if residual < SUCCESS_RESIDUAL {
                        if let Ok(joint) = Povm::new(normalized) {
                            return Attempt { joint: Some(joint), residual, penalty };
                        }
                    }
                }
            }
            Attempt { joint: None, residual: raw_residual, penalty }
        })
        .collect();

    let starts_used = attempts.len();
    if let Some(hit) = attempts.iter().find(|t| t.joint.is_some()) {
        return Ok(JointSearchResult {
            joint: hit.joint.clone(),
            marginal_residual: hit.residual,
            penalty: hit.penalty,
            starts_used,
        });
    }
    let best = attempts.iter().min_by(|x, y| x.penalty.total_cmp(&y.penalty)).expect("at least one start");
    Ok(JointSearchResult { joint: None, marginal_residual: best.residual, penalty: best.penalty, starts_used })
}
