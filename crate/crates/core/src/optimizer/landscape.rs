use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{minimize_negativity, OptimizerConfig};
use crate::criteria::{
    dichotomic_unbiased_negativity, mu_for_dichotomic_entropy, mu_for_trichotomic_entropy, trichotomic_negativity,
};
use crate::error::{Error, Result};
use crate::povm::{dichotomic_from_spec, trichotomic_from_spec, trichotomic_vectors, Plane, Povm};

/// Two-parameter families of qubit POVM pairs in the x–y plane.
///
/// Dichotomic: `a⃗ = μ_A x̂`, `b⃗ = μ_B (cos angle, sin angle, 0)`.
/// Trichotomic: equilateral triangles at orientations 0 and `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Dichotomic { mu_a: f64, mu_b: f64, bias_a: f64, bias_b: f64, angle: f64 },
    Trichotomic { mu_a: f64, mu_b: f64, phi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Both sharpnesses.
    Mu,
    MuA,
    MuB,
    /// Both unsharpness entropies; sets `μ` through the unbiased entropy.
    R,
    RA,
    RB,
    /// `angle` for dichotomic, `phi` for trichotomic.
    Angle,
    BiasA,
    BiasB,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::Mu => "mu",
            Axis::MuA => "mu_a",
            Axis::MuB => "mu_b",
            Axis::R => "r",
            Axis::RA => "r_a",
            Axis::RB => "r_b",
            Axis::Angle => "angle",
            Axis::BiasA => "bias_a",
            Axis::BiasB => "bias_b",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let all = [Axis::Mu, Axis::MuA, Axis::MuB, Axis::R, Axis::RA, Axis::RB, Axis::Angle, Axis::BiasA, Axis::BiasB];
        all.into_iter()
            .find(|a| a.name() == s || (s == "phi" && *a == Axis::Angle))
            .ok_or_else(|| Error::Validation(format!("unknown axis {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub axis: Axis,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl AxisRange {
    /// `steps` evenly spaced values including both ends.
    pub fn values(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n).map(|k| self.start + (self.stop - self.start) * k as f64 / (n - 1) as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceSpec {
    pub base: Family,
    pub axes: Vec<AxisRange>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandscapePoint {
    pub coords: Vec<f64>,
    /// `None` when the parameters do not describe valid POVMs.
    pub n_min: Option<f64>,
    pub closed_form: Option<f64>,
    pub converged: bool,
}

impl Family {
    pub fn with(mut self, axis: Axis, value: f64) -> Result<Self> {
        let dichotomic = matches!(self, Family::Dichotomic { .. });
        let entropy_mu = |r: f64| {
            if dichotomic {
                mu_for_dichotomic_entropy(r)
            } else {
                mu_for_trichotomic_entropy(r)
            }
        };
        let (mu_a, mu_b) = match &mut self {
            Family::Dichotomic { mu_a, mu_b, .. } | Family::Trichotomic { mu_a, mu_b, .. } => (mu_a, mu_b),
        };
        match axis {
            Axis::Mu => (*mu_a, *mu_b) = (value, value),
            Axis::MuA => *mu_a = value,
            Axis::MuB => *mu_b = value,
            Axis::R => {
                let mu = entropy_mu(value)?;
                (*mu_a, *mu_b) = (mu, mu);
            }
            Axis::RA => *mu_a = entropy_mu(value)?,
            Axis::RB => *mu_b = entropy_mu(value)?,
            Axis::Angle => match &mut self {
                Family::Dichotomic { angle, .. } => *angle = value,
                Family::Trichotomic { phi, .. } => *phi = value,
            },
            Axis::BiasA | Axis::BiasB => match &mut self {
                Family::Dichotomic { bias_a, bias_b, .. } => {
                    if axis == Axis::BiasA {
                        *bias_a = value
                    } else {
                        *bias_b = value
                    }
                }
                Family::Trichotomic { .. } => {
                    return Err(Error::Validation("trichotomic family has no bias axis".into()));
                }
            },
        }
        Ok(self)
    }

    fn dichotomic_vectors(mu_a: f64, mu_b: f64, angle: f64) -> (Vector3<f64>, Vector3<f64>) {
        (Vector3::x() * mu_a, Vector3::new(angle.cos(), angle.sin(), 0.0) * mu_b)
    }

    pub fn povms(&self) -> Result<(Povm, Povm)> {
        match *self {
            Family::Dichotomic { mu_a, mu_b, bias_a, bias_b, angle } => {
                let (a, b) = Self::dichotomic_vectors(mu_a, mu_b, angle);
                Ok((dichotomic_from_spec(bias_a, &a)?, dichotomic_from_spec(bias_b, &b)?))
            }
            Family::Trichotomic { mu_a, mu_b, phi } => {
                let plane = Plane::default();
                Ok((trichotomic_from_spec(mu_a, 0.0, &plane)?, trichotomic_from_spec(mu_b, phi, &plane)?))
            }
        }
    }

    /// Closed-form minimized negativity where one exists.
    pub fn closed_form(&self) -> Option<f64> {
        match *self {
            Family::Dichotomic { mu_a, mu_b, bias_a, bias_b, angle } if bias_a == 0.0 && bias_b == 0.0 => {
                let (a, b) = Self::dichotomic_vectors(mu_a, mu_b, angle);
                dichotomic_unbiased_negativity(&a, &b).ok()?.minimized_negativity
            }
            Family::Dichotomic { .. } => None,
            Family::Trichotomic { mu_a, mu_b, phi } => {
                if !(0.0..=1.0).contains(&mu_a) || !(0.0..=1.0).contains(&mu_b) {
                    return None;
                }
                let plane = Plane::default();
                let a = trichotomic_vectors(mu_a, 0.0, &plane);
                let b = trichotomic_vectors(mu_b, phi, &plane);
                trichotomic_negativity(&a, &b).minimized_negativity
            }
        }
    }
}

/// Minimized negativity on a 1- or 2-axis grid through `spec.base`.
///
/// Points are row-major with the first axis outermost. Cells are
/// independent and evaluated concurrently with the same configuration.
pub fn negativity_landscape(spec: &SliceSpec, config: &OptimizerConfig) -> Result<Vec<LandscapePoint>> {
    if spec.axes.is_empty() || spec.axes.len() > 2 {
        return Err(Error::Validation(format!("slice needs 1 or 2 axes, got {}", spec.axes.len())));
    }
    config.validate()?;
    let mut grid: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in &spec.axes {
        let values = axis.values();
        grid = grid
            .iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    if spec.axes.iter().any(|a| a.steps == 0) {
        return Ok(Vec::new());
    }
    grid.into_par_iter()
        .map(|coords| {
            let family = spec.axes.iter().zip(&coords).try_fold(spec.base, |f, (axis, &v)| f.with(axis.axis, v));
            let Some((family, (a, b))) = family.ok().and_then(|f| f.povms().ok().map(|p| (f, p))) else {
                return Ok(LandscapePoint { coords, n_min: None, closed_form: None, converged: true });
            };
            let r = minimize_negativity(&a, &b, config)?;
            Ok(LandscapePoint {
                coords,
                n_min: Some(r.n_min),
                closed_form: family.closed_form(),
                converged: r.converged,
            })
        })
        .collect()
}
