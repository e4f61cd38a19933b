use nalgebra::Vector3;

use super::JmVerdict;
use crate::error::{Error, Result};
use crate::operator::{HermitianOperator, PSD_TOL};
use crate::wmeasure::DifferentialSet;

fn check_bloch_length(name: &str, v: &Vector3<f64>) -> Result<()> {
    if !v.iter().all(|x| x.is_finite()) || v.norm() > 1.0 + PSD_TOL {
        return Err(Error::Domain(format!("Bloch vector {name} must have length <= 1, got {}", v.norm())));
    }
    Ok(())
}

/// Two-outcome unbiased qubit POVMs with Bloch vectors `a⃗`, `b⃗`.
pub fn dichotomic_unbiased_negativity(a: &Vector3<f64>, b: &Vector3<f64>) -> Result<JmVerdict> {
    check_bloch_length("a", a)?;
    check_bloch_length("b", b)?;
    let margin = ((a + b).norm() + (a - b).norm()) / 2.0 - 1.0;
    Ok(JmVerdict::from_margin(margin, Some(margin.max(0.0))))
}

fn distinguishability(bias: f64, length: f64) -> f64 {
    [1.0, -1.0].iter().map(|f| ((1.0 + f * bias).powi(2) - length * length).max(0.0).sqrt()).sum::<f64>() / 2.0
}

fn bias_ratio(bias: f64, f: f64) -> Result<f64> {
    if bias == 0.0 {
        return Ok(0.0);
    }
    if f == 0.0 {
        return Err(Error::Domain("singular input: F vanishes with nonzero bias".into()));
    }
    Ok(bias * bias / (f * f))
}

/// Two-outcome biased qubit POVMs `Â_i = [(1 + ω^i a₀)𝟙 + ω^i a⃗·σ⃗]/2`.
///
/// Jointly measurable when
/// `(1 − F_A² − F_B²)(1 − a₀²/F_A² − b₀²/F_B²) ≤ (a⃗·b⃗ − a₀b₀)²`; the margin is
/// the left side minus the right side, evaluated as written.
pub fn dichotomic_biased_criterion(a_bias: f64, a: &Vector3<f64>, b_bias: f64, b: &Vector3<f64>) -> Result<JmVerdict> {
    for (name, bias, v) in [("A", a_bias, a), ("B", b_bias, b)] {
        if !bias.is_finite() || bias.abs() + v.norm() > 1.0 + PSD_TOL {
            return Err(Error::Domain(format!(
                "POVM {name} violates |bias| + |vector| <= 1 ({} + {})",
                bias.abs(),
                v.norm()
            )));
        }
    }
    let fa = distinguishability(a_bias, a.norm());
    let fb = distinguishability(b_bias, b.norm());
    let lhs = (1.0 - fa * fa - fb * fb) * (1.0 - bias_ratio(a_bias, fa)? - bias_ratio(b_bias, fb)?);
    let rhs = (a.dot(b) - a_bias * b_bias).powi(2);
    Ok(JmVerdict::from_margin(lhs - rhs, None))
}

/// Closed interval of feasible `θ₀¹¹` values for an optimal differential set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaWindow {
    pub lower: f64,
    pub upper: f64,
}

impl ThetaWindow {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// `2 − |a⃗+b⃗| ≤ θ₀¹¹ ≤ |a⃗−b⃗|`, or `None` when empty. An empty window
/// means a strictly positive W-measure exists.
pub fn theta0_feasibility_dichotomic(a: &Vector3<f64>, b: &Vector3<f64>) -> Option<ThetaWindow> {
    let lower = 2.0 - (a + b).norm();
    let upper = (a - b).norm();
    if lower > upper + 1e-12 {
        return None;
    }
    Some(ThetaWindow { lower: lower.min(upper), upper })
}

/// Explicit minimizer `Θ̂_ij = θ₀^{ij}𝟙/4` with `θ₀¹¹ = θ₀²² = (2 − |a⃗+b⃗| + |a⃗−b⃗|)/2`.
///
/// The value is the midpoint of the feasibility window when it is nonempty,
/// and the midpoint of the strictly-positive range otherwise.
pub fn dichotomic_optimal_theta(a: &Vector3<f64>, b: &Vector3<f64>) -> DifferentialSet {
    let t = (2.0 - (a + b).norm() + (a - b).norm()) / 2.0;
    let diag = HermitianOperator::identity(2).scale(t / 4.0);
    let off = HermitianOperator::identity(2).scale((2.0 - t) / 4.0);
    DifferentialSet::from_grid_unchecked(2, vec![diag.clone(), off.clone(), off, diag])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::dichotomic_from_spec;
    use crate::wmeasure::WMeasure;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    #[test]
    fn unbiased_examples() {
        let v = dichotomic_unbiased_negativity(&Vector3::x(), &Vector3::y()).unwrap();
        assert!(!v.jointly_measurable);
        assert!((v.minimized_negativity.unwrap() - (SQRT_2 - 1.0)).abs() < 1e-15);

        let v = dichotomic_unbiased_negativity(&(Vector3::z() * 0.9), &(Vector3::z() * -0.4)).unwrap();
        assert!(v.jointly_measurable);
        assert_eq!(v.minimized_negativity, Some(0.0));

        let v =
            dichotomic_unbiased_negativity(&(Vector3::x() * FRAC_1_SQRT_2), &(Vector3::y() * FRAC_1_SQRT_2)).unwrap();
        assert!(v.criterion_margin.abs() < 1e-15);
        assert!(v.jointly_measurable);
    }

    #[test]
    fn unbiased_rejects_long_vectors() {
        assert!(matches!(dichotomic_unbiased_negativity(&(Vector3::x() * 1.01), &Vector3::y()), Err(Error::Domain(_))));
    }

    #[test]
    fn biased_orthogonal_equal_length_reduces_to_inverse_root_two() {
        for mu in [0.3, 0.6, 0.7, FRAC_1_SQRT_2 - 1e-5, FRAC_1_SQRT_2 + 1e-5, 0.8, 1.0] {
            let v = dichotomic_biased_criterion(0.0, &(Vector3::x() * mu), 0.0, &(Vector3::y() * mu)).unwrap();
            // F_A = F_B = sqrt(1 − μ²) ⇒ margin = 2μ² − 1.
            assert!((v.criterion_margin - (2.0 * mu * mu - 1.0)).abs() < 1e-12);
            assert_eq!(v.jointly_measurable, mu <= FRAC_1_SQRT_2);
            assert!(v.minimized_negativity.is_none());
        }
    }

    #[test]
    fn biased_identical_sharp_measurements_are_compatible() {
        for (bias, len) in [(0.3, 0.7), (-0.5, 0.5), (0.0, 1.0), (0.9, 0.1)] {
            let a = Vector3::new(0.0, 0.6, 0.8) * len;
            let v = dichotomic_biased_criterion(bias, &a, bias, &a).unwrap();
            assert!(v.jointly_measurable, "bias {bias} len {len} margin {}", v.criterion_margin);
        }
    }

    #[test]
    fn biased_rejects_invalid_povm() {
        assert!(dichotomic_biased_criterion(0.5, &(Vector3::x() * 0.6), 0.0, &Vector3::y()).is_err());
    }

    #[test]
    fn feasibility_window_examples() {
        let w = theta0_feasibility_dichotomic(&Vector3::z(), &Vector3::x()).unwrap();
        assert!((w.lower - (2.0 - SQRT_2)).abs() < 1e-15);
        assert!((w.upper - SQRT_2).abs() < 1e-15);

        let half = Vector3::new(0.3, 0.4, 0.0);
        assert!(theta0_feasibility_dichotomic(&half, &half).is_none());

        // Identical sharp vectors collapse to the single point 0.
        let w = theta0_feasibility_dichotomic(&Vector3::z(), &Vector3::z()).unwrap();
        assert_eq!((w.lower, w.upper), (0.0, 0.0));

        let a = Vector3::x() * FRAC_1_SQRT_2;
        let b = Vector3::y() * FRAC_1_SQRT_2;
        let w = theta0_feasibility_dichotomic(&a, &b).unwrap();
        assert!((w.lower - 1.0).abs() < 1e-12 && (w.upper - 1.0).abs() < 1e-12);
    }

    #[test]
    fn optimal_theta_attains_closed_form() {
        let cases = [
            (Vector3::z(), Vector3::x()),
            (Vector3::new(0.3, 0.4, 0.0), Vector3::new(0.3, 0.4, 0.0)),
            (Vector3::new(0.9, 0.1, 0.0), Vector3::new(0.1, 0.8, 0.3)),
            (Vector3::new(0.2, 0.1, 0.0), Vector3::new(-0.1, 0.3, 0.2)),
        ];
        for (a, b) in cases {
            let theta = dichotomic_optimal_theta(&a, &b);
            assert!(theta.constraint_residual() < 1e-15);
            let pa = dichotomic_from_spec(0.0, &a).unwrap();
            let pb = dichotomic_from_spec(0.0, &b).unwrap();
            let n = WMeasure::from_theta(&pa, &pb, &theta).unwrap().negativity().unwrap();
            let closed = dichotomic_unbiased_negativity(&a, &b).unwrap().minimized_negativity.unwrap();
            assert!((n - closed).abs() < 1e-14, "{a:?} {b:?}: {n} vs {closed}");
        }
    }
}
