use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use jm_core::criteria::{mu_threshold, r_threshold};
use jm_core::povm::Povm;
use jm_core::schema::{PovmDocument, StateDocument, StatisticsDocument};
use jm_core::ssm::{
    min_quasiprob_over_states, quasiprob_from_state, quasiprob_from_statistics, ssm_jm_test, ssm_wmeasure_ordered,
    worst_case_state, Quasiprobability, SequenceOrder,
};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::evaluate::{evaluate, Evaluation, Method};
use crate::failure::{Failure, Outcome};
use crate::output::{float, json, Run};

fn read_json<T: DeserializeOwned>(path: &Path) -> Outcome<T> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_povm(path: &Path, run: &mut Run) -> Outcome<Povm> {
    run.input(path);
    let doc: PovmDocument = read_json(path)?;
    doc.to_povm().map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct ValidateEntry {
    path: String,
    valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    outcomes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pvm: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    unsharpness_entropy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    worst_eigenvalue: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    completeness_residual: Option<f64>,
}

pub fn validate(files: &[PathBuf], mut run: Run) -> Outcome<()> {
    let mut entries = Vec::new();
    for path in files {
        let path_name = path.display().to_string();
        let entry = match load_povm(path, &mut run).and_then(|p| Ok((p.validate()?, p.unsharpness_entropy()?, p))) {
            Ok((report, entropy, p)) => ValidateEntry {
                path: path_name,
                valid: true,
                error: None,
                outcomes: Some(p.outcomes()),
                dim: Some(p.dim()),
                pvm: Some(p.is_pvm()),
                unsharpness_entropy: Some(entropy),
                worst_eigenvalue: Some(report.worst_eigenvalue),
                completeness_residual: Some(report.completeness_residual),
            },
            Err(e) => ValidateEntry {
                path: path_name,
                valid: false,
                error: Some(e.to_string()),
                outcomes: None,
                dim: None,
                pvm: None,
                unsharpness_entropy: None,
                worst_eigenvalue: None,
                completeness_residual: None,
            },
        };
        entries.push(entry);
    }
    let invalid = entries.iter().filter(|e| !e.valid).count();
    run.finish(&json(&entries)?)?;
    if invalid > 0 {
        return Err(Failure::Input(format!("{invalid} of {} files are not valid POVMs", entries.len())));
    }
    Ok(())
}

#[derive(Serialize)]
struct CheckReport {
    outcomes: usize,
    dim: usize,
    #[serde(flatten)]
    evaluation: Evaluation,
}

pub fn check(a: &Path, b: &Path, method: Method, mut run: Run) -> Outcome<()> {
    let (pa, pb) = (load_povm(a, &mut run)?, load_povm(b, &mut run)?);
    let evaluation = evaluate(&pa, &pb, method, run.config())?;
    let converged = evaluation.converged;
    let report = CheckReport { outcomes: pa.outcomes(), dim: pa.dim(), evaluation };
    run.finish(&json(&report)?)?;
    if converged == Some(false) {
        return Err(Failure::Numerical("optimizer hit its evaluation cap before the simplex settled".into()));
    }
    Ok(())
}

pub fn table1(resolution: usize, run: Run) -> Outcome<()> {
    if resolution < 2 {
        return Err(Failure::Input("resolution must be at least 2".into()));
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["source", "phi", "mu_th", "r_th"])?;
    let table = [0.0, FRAC_PI_6, FRAC_PI_4, FRAC_PI_3].map(|phi| ("table", phi));
    let period = 2.0 * FRAC_PI_3;
    let grid = (0..resolution).map(|k| ("grid", period * k as f64 / (resolution - 1) as f64));
    for (source, phi) in table.into_iter().chain(grid) {
        writer.write_record([
            source.to_string(),
            float(Some(phi)),
            float(Some(mu_threshold(phi))),
            float(Some(r_threshold(phi))),
        ])?;
    }
    let payload = writer.into_inner().map_err(|e| Failure::Input(e.to_string()))?;
    run.finish(&payload)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Order {
    AFirst,
    BFirst,
}

#[derive(Debug, Args)]
pub struct SsmArgs {
    povm_a: PathBuf,
    povm_b: PathBuf,
    /// State to evaluate `Q` on; the worst-case eigenstate when omitted.
    #[arg(long, conflicts_with = "statistics")]
    state: Option<PathBuf>,
    /// Measured `{pA, pB, pC}` statistics instead of a state.
    #[arg(long)]
    statistics: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Order::AFirst)]
    order: Order,
    /// Also report the smallest `Q` entry over this many random pure states.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Serialize)]
struct MinEntry {
    i: usize,
    j: usize,
    value: f64,
}

#[derive(Serialize)]
struct QuasiReport {
    source: &'static str,
    table: Vec<Vec<f64>>,
    min_entry: MinEntry,
    marginal_a: Vec<f64>,
    marginal_b: Vec<f64>,
}

impl QuasiReport {
    fn new(source: &'static str, q: &Quasiprobability) -> Self {
        let ((i, j), value) = q.min_entry();
        Self {
            source,
            table: q.table().chunks(q.d()).map(<[f64]>::to_vec).collect(),
            min_entry: MinEntry { i, j, value },
            marginal_a: q.marginal_a(),
            marginal_b: q.marginal_b(),
        }
    }
}

#[derive(Serialize)]
struct SsmReport {
    verdict: Evaluation,
    min_eigenvalue: f64,
    negativity: f64,
    quasiprobability: QuasiReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    sampled_min: Option<f64>,
}

pub fn ssm(args: &SsmArgs, mut run: Run) -> Outcome<()> {
    let (a, b) = (load_povm(&args.povm_a, &mut run)?, load_povm(&args.povm_b, &mut run)?);
    let verdict = evaluate(&a, &b, Method::Ssm, run.config())?;
    let test = ssm_jm_test(&a, &b)?;
    let order = match args.order {
        Order::AFirst => SequenceOrder::AFirst,
        Order::BFirst => SequenceOrder::BFirst,
    };
    let w = ssm_wmeasure_ordered(&a, &b, order)?;
    let quasi = match (&args.state, &args.statistics) {
        (Some(path), _) => {
            run.input(path);
            let state = read_json::<StateDocument>(path)?.to_state()?;
            QuasiReport::new("state", &quasiprob_from_state(&w, &state)?)
        }
        (None, Some(path)) => {
            run.input(path);
            let st: StatisticsDocument = read_json(path)?;
            if st.p_a.len() != a.outcomes() {
                return Err(Failure::Input(format!(
                    "statistics have {} outcomes, POVMs have {}",
                    st.p_a.len(),
                    a.outcomes()
                )));
            }
            QuasiReport::new("statistics", &quasiprob_from_statistics(&st.p_a, &st.p_b, &st.p_c)?)
        }
        (None, None) => {
            let (state, _, _) = worst_case_state(&w)?;
            QuasiReport::new("worst-case", &quasiprob_from_state(&w, &state)?)
        }
    };
    let sampled_min = match args.samples {
        Some(n) => Some(min_quasiprob_over_states(&w, n, run.config().seed)?),
        None => None,
    };
    let report = SsmReport {
        verdict,
        min_eigenvalue: test.min_eigenvalue,
        negativity: test.negativity,
        quasiprobability: quasi,
        sampled_min,
    };
    run.finish(&json(&report)?)
}
