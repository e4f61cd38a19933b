use std::f64::consts::PI;

use crate::error::{Error, Result};

fn eta(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

/// Unsharpness entropy of an unbiased two-outcome qubit POVM with `|a⃗| = μ`.
pub fn dichotomic_unbiased_entropy(mu: f64) -> f64 {
    eta((1.0 + mu) / 2.0) + eta((1.0 - mu) / 2.0)
}

/// Unsharpness entropy of a three-outcome qubit POVM with `|a⃗_i| = μ`.
pub fn trichotomic_entropy(mu: f64) -> f64 {
    1.5 * (eta((1.0 + mu) / 3.0) + eta((1.0 - mu) / 3.0))
}

/// Inverts a strictly decreasing map on `[0, 1]` by bisection.
fn invert_decreasing(f: impl Fn(f64) -> f64, target: f64, what: &str) -> Result<f64> {
    let (hi_val, lo_val) = (f(0.0), f(1.0));
    if !(lo_val - 1e-12..=hi_val + 1e-12).contains(&target) {
        return Err(Error::Domain(format!("{what} entropy {target} outside achievable range [{lo_val}, {hi_val}]")));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sharpness `μ` whose unbiased dichotomic entropy equals `r`.
pub fn mu_for_dichotomic_entropy(r: f64) -> Result<f64> {
    invert_decreasing(dichotomic_unbiased_entropy, r, "dichotomic")
}

/// Sharpness `μ` whose trichotomic entropy equals `r`.
pub fn mu_for_trichotomic_entropy(r: f64) -> Result<f64> {
    invert_decreasing(trichotomic_entropy, r, "trichotomic")
}

/// `μ_th(φ) = √3 / [sin(φ/2) + √3 cos(φ/2)]` for two coplanar equilateral
/// three-outcome POVMs at relative angle `φ`.
///
/// The angle is reduced modulo `2π/3` (a third of a turn only relabels
/// outcomes); the result is capped at 1.
pub fn mu_threshold(phi: f64) -> f64 {
    let reduced = phi.rem_euclid(2.0 * PI / 3.0);
    let half = reduced / 2.0;
    let s3 = 3f64.sqrt();
    (s3 / (half.sin() + s3 * half.cos())).min(1.0)
}

/// Threshold unsharpness entropy: the trichotomic entropy at `μ_th(φ)`.
pub fn r_threshold(phi: f64) -> f64 {
    trichotomic_entropy(mu_threshold(phi))
}

/// Largest equal Bloch length `μ` at which two unbiased dichotomic POVMs at
/// relative angle `angle` are jointly measurable.
pub fn dichotomic_mu_threshold(angle: f64) -> f64 {
    let c = angle.cos();
    (2.0 / ((2.0 + 2.0 * c).max(0.0).sqrt() + (2.0 - 2.0 * c).max(0.0).sqrt())).min(1.0)
}

pub fn dichotomic_r_threshold(angle: f64) -> f64 {
    dichotomic_unbiased_entropy(dichotomic_mu_threshold(angle))
}
