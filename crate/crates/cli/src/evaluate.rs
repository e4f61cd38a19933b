//! One verdict for one pair, shared by `check` and every `scan` cell.

use clap::ValueEnum;
use jm_core::criteria::{dichotomic_biased_criterion, dichotomic_unbiased_negativity, trichotomic_negativity};
use jm_core::optimizer::{minimize_negativity, OptimizerConfig};
use jm_core::povm::{qubit_components, Povm};
use jm_core::ssm::{ssm_jm_test, Guarantee};
use jm_core::wmeasure::unbiased_qubit_vectors;
use nalgebra::Vector3;
use serde::Serialize;

use crate::failure::{Failure, Outcome};

type V3 = Vector3<f64>;

/// Bias magnitudes below this are read as exactly unbiased.
const BIAS_TOL: f64 = 1e-12;
/// Tolerance for the equal-length and coplanarity checks on triangles.
const SHAPE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Auto,
    Closed,
    Optimizer,
    Ssm,
}

/// The procedure that produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Used {
    Busch,
    BiasedDichotomic,
    Trichotomic,
    Optimizer,
    Ssm,
}

impl Used {
    pub fn name(self) -> &'static str {
        match self {
            Used::Busch => "busch",
            Used::BiasedDichotomic => "biased-dichotomic",
            Used::Trichotomic => "trichotomic",
            Used::Optimizer => "optimizer",
            Used::Ssm => "ssm",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub method: Used,
    pub jointly_measurable: bool,
    /// `≤ 0` on the jointly measurable side. For the optimizer this is
    /// `n_min − tolerance`; for SSM it is `−λ_min(Ŵ^S)`.
    pub margin: f64,
    pub n_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guarantee: Option<&'static str>,
    /// False when a negative SSM verdict carries no guarantee.
    pub conclusive: bool,
}

enum ClosedForm {
    Unbiased(V3, V3),
    Biased(f64, V3, f64, V3),
    Trichotomic([V3; 3], [V3; 3]),
}

fn dichotomic_components(p: &Povm) -> Option<(f64, V3)> {
    // Effect 1 is ((1 + a₀)𝟙 + a⃗·σ⃗)/2.
    let (s, v) = qubit_components(p.effect(1)).ok()?;
    let bias = s - 1.0;
    Some((if bias.abs() <= BIAS_TOL { 0.0 } else { bias }, v))
}

fn triangle(p: &Povm) -> Option<[V3; 3]> {
    let v = unbiased_qubit_vectors(p)?;
    let t = [v[0], v[1], v[2]];
    let len = t[0].norm();
    t.iter().all(|x| (x.norm() - len).abs() <= SHAPE_TOL).then_some(t)
}

fn coplanar(a: &[V3; 3], b: &[V3; 3]) -> bool {
    let normal = |t: &[V3; 3]| {
        let n = t[0].cross(&t[1]);
        (n.norm() > SHAPE_TOL).then(|| n.normalize())
    };
    match (normal(a), normal(b)) {
        (Some(n), _) => b.iter().all(|v| n.dot(v).abs() <= SHAPE_TOL),
        _ => true,
    }
}

fn closed_form_family(a: &Povm, b: &Povm) -> Option<ClosedForm> {
    if a.dim() != 2 || b.dim() != 2 || a.outcomes() != b.outcomes() {
        return None;
    }
    match a.outcomes() {
        2 => {
            let (a0, va) = dichotomic_components(a)?;
            let (b0, vb) = dichotomic_components(b)?;
            if a0 == 0.0 && b0 == 0.0 {
                Some(ClosedForm::Unbiased(va, vb))
            } else {
                Some(ClosedForm::Biased(a0, va, b0, vb))
            }
        }
        3 => {
            let (ta, tb) = (triangle(a)?, triangle(b)?);
            coplanar(&ta, &tb).then_some(ClosedForm::Trichotomic(ta, tb))
        }
        _ => None,
    }
}

fn closed(form: ClosedForm) -> Outcome<Evaluation> {
    let (used, v) = match form {
        ClosedForm::Unbiased(a, b) => (Used::Busch, dichotomic_unbiased_negativity(&a, &b)?),
        ClosedForm::Biased(a0, a, b0, b) => (Used::BiasedDichotomic, dichotomic_biased_criterion(a0, &a, b0, &b)?),
        ClosedForm::Trichotomic(a, b) => (Used::Trichotomic, trichotomic_negativity(&a, &b)),
    };
    Ok(Evaluation {
        method: used,
        jointly_measurable: v.jointly_measurable,
        margin: v.criterion_margin,
        n_min: v.minimized_negativity,
        converged: None,
        evaluations: None,
        guarantee: None,
        conclusive: true,
    })
}

fn optimizer(a: &Povm, b: &Povm, config: &OptimizerConfig) -> Outcome<Evaluation> {
    let r = minimize_negativity(a, b, config)?;
    Ok(Evaluation {
        method: Used::Optimizer,
        jointly_measurable: r.jointly_measurable(config),
        margin: r.n_min - config.jm_tolerance,
        n_min: Some(r.n_min),
        converged: Some(r.converged),
        evaluations: Some(r.evaluations),
        guarantee: None,
        conclusive: true,
    })
}

fn guarantee_name(g: Guarantee) -> &'static str {
    match g {
        Guarantee::Iff => "iff",
        Guarantee::SufficientOnly => "sufficient-only",
    }
}

fn ssm(a: &Povm, b: &Povm) -> Outcome<Evaluation> {
    let s = ssm_jm_test(a, b)?;
    Ok(Evaluation {
        method: Used::Ssm,
        jointly_measurable: s.verdict.jointly_measurable,
        margin: s.verdict.criterion_margin,
        n_min: None,
        converged: None,
        evaluations: None,
        guarantee: Some(guarantee_name(s.guarantee)),
        conclusive: s.verdict.jointly_measurable || s.guarantee == Guarantee::Iff,
    })
}

pub fn evaluate(a: &Povm, b: &Povm, method: Method, config: &OptimizerConfig) -> Outcome<Evaluation> {
    if a.dim() != b.dim() || a.outcomes() != b.outcomes() {
        return Err(Failure::Input(format!(
            "POVMs must share dimension and outcome count ({}×{} vs {}×{})",
            a.outcomes(),
            a.dim(),
            b.outcomes(),
            b.dim()
        )));
    }
    match method {
        Method::Auto => match closed_form_family(a, b) {
            Some(form) => closed(form),
            None => optimizer(a, b, config),
        },
        Method::Closed => closed(
            closed_form_family(a, b)
                .ok_or_else(|| Failure::Input("no closed form covers this pair; use --method optimizer".into()))?,
        ),
        Method::Optimizer => optimizer(a, b, config),
        Method::Ssm => ssm(a, b),
    }
}
