//! `scan`: verdicts on a one- or two-axis grid through a POVM family.

use std::f64::consts::FRAC_PI_2;

use clap::{Args, ValueEnum};
use jm_core::optimizer::{Axis, AxisRange, Family};
use rayon::prelude::*;

use crate::evaluate::{evaluate, Evaluation, Method};
use crate::failure::{Failure, Outcome};
use crate::output::{float, Run};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    DichotomicUnbiased,
    DichotomicBiased,
    Trichotomic,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    family: FamilyName,
    /// `name=start:stop[:steps]`; give one or two. Names: mu, mu_a, mu_b,
    /// r, r_a, r_b, angle (alias phi), bias_a, bias_b.
    #[arg(long = "axis", required = true)]
    axes: Vec<String>,
    /// Fixes a base parameter, `name=value`.
    #[arg(long = "set")]
    sets: Vec<String>,
    /// Points per axis when an axis gives no step count.
    #[arg(long, default_value_t = 51)]
    resolution: usize,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    method: Method,
}

fn number(s: &str, what: &str) -> Outcome<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Failure::Input(format!("{what}: {s:?} is not a finite number")))
}

fn split_assignment(s: &str) -> Outcome<(Axis, &str)> {
    let (name, rest) = s.split_once('=').ok_or_else(|| Failure::Input(format!("expected name=value, got {s:?}")))?;
    Ok((Axis::parse(name.trim())?, rest))
}

fn parse_axis(s: &str, resolution: usize) -> Outcome<AxisRange> {
    let (axis, rest) = split_assignment(s)?;
    let parts: Vec<&str> = rest.split(':').collect();
    let steps = match parts.len() {
        2 => resolution,
        3 => parts[2].trim().parse().map_err(|_| Failure::Input(format!("bad step count in {s:?}")))?,
        _ => return Err(Failure::Input(format!("axis range must be start:stop[:steps], got {s:?}"))),
    };
    Ok(AxisRange { axis, start: number(parts[0], s)?, stop: number(parts[1], s)?, steps })
}

fn base(name: FamilyName) -> Family {
    match name {
        FamilyName::DichotomicUnbiased | FamilyName::DichotomicBiased => {
            Family::Dichotomic { mu_a: 1.0, mu_b: 1.0, bias_a: 0.0, bias_b: 0.0, angle: FRAC_PI_2 }
        }
        FamilyName::Trichotomic => Family::Trichotomic { mu_a: 1.0, mu_b: 1.0, phi: 0.0 },
    }
}

fn check_axis(family: FamilyName, axis: Axis) -> Outcome<()> {
    if family != FamilyName::DichotomicBiased && matches!(axis, Axis::BiasA | Axis::BiasB) {
        return Err(Failure::Input(format!("{} is only available for dichotomic-biased", axis.name())));
    }
    Ok(())
}

pub fn run(args: &ScanArgs, run: Run) -> Outcome<()> {
    if args.axes.len() > 2 {
        return Err(Failure::Input(format!("give one or two axes, got {}", args.axes.len())));
    }
    let mut family = base(args.family);
    for s in &args.sets {
        let (axis, value) = split_assignment(s)?;
        check_axis(args.family, axis)?;
        family = family.with(axis, number(value, s)?)?;
    }
    let ranges = args.axes.iter().map(|s| parse_axis(s, args.resolution)).collect::<Outcome<Vec<_>>>()?;
    for r in &ranges {
        check_axis(args.family, r.axis)?;
    }

    let mut cells: Vec<Vec<f64>> = vec![Vec::new()];
    for r in &ranges {
        let values = r.values();
        cells = cells.iter().flat_map(|p| values.iter().map(move |&v| [p.as_slice(), &[v]].concat())).collect();
    }
    let config = run.config().clone();
    // Cells whose parameters describe no valid pair (|bias| + |vector| > 1,
    // or an entropy out of range) are reported as `no-povm` rows.
    let results: Vec<Option<Evaluation>> = cells
        .par_iter()
        .map(|coords| {
            let cell = ranges.iter().zip(coords).try_fold(family, |f, (r, &v)| f.with(r.axis, v));
            match cell.and_then(|f| f.povms()) {
                Ok((a, b)) => evaluate(&a, &b, args.method, &config).map(Some),
                Err(_) => Ok(None),
            }
        })
        .collect::<Outcome<_>>()?;

    let mut writer = csv::Writer::from_writer(Vec::new());
    let column = |axis: Axis| match (axis, args.family) {
        (Axis::Angle, FamilyName::Trichotomic) => "phi",
        _ => axis.name(),
    };
    let mut header: Vec<&str> = ranges.iter().map(|r| column(r.axis)).collect();
    header.extend(["jointly_measurable", "margin", "n_min", "method"]);
    writer.write_record(&header)?;
    for (coords, e) in cells.iter().zip(&results) {
        let mut row: Vec<String> = coords.iter().map(|&c| float(Some(c))).collect();
        match e {
            Some(e) => row.extend([
                e.jointly_measurable.to_string(),
                float(Some(e.margin)),
                float(e.n_min),
                e.method.name().into(),
            ]),
            None => row.extend([String::new(), String::new(), String::new(), "no-povm".into()]),
        }
        writer.write_record(&row)?;
    }
    let payload = writer.into_inner().map_err(|e| Failure::Input(e.to_string()))?;
    run.finish(&payload)?;

    let unsettled = results.iter().flatten().filter(|e| e.converged == Some(false)).count();
    if unsettled > 0 {
        return Err(Failure::Numerical(format!("{unsettled} of {} cells did not converge", results.len())));
    }
    Ok(())
}
