//! Acceptance criteria 1–10. Each test prints one PASS/FAIL line.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use jm_core::criteria::{
    dichotomic_biased_criterion, dichotomic_r_threshold, dichotomic_unbiased_negativity, mu_threshold, r_threshold,
    trichotomic_negativity,
};
use jm_core::operator::HermitianOperator;
use jm_core::optimizer::{
    joint_povm_search, minimize_negativity, negativity_landscape, Axis, AxisRange, Family, OptimizationResult,
    OptimizerConfig, SliceSpec, ThetaParameterization,
};
use jm_core::povm::{
    dichotomic_from_spec, trichotomic_from_spec, trichotomic_from_vectors, trichotomic_vectors, Plane, Povm,
};
use jm_core::ssm::{ssm_jm_test, ssm_wmeasure};
use jm_core::wmeasure::{qubit_unbiased_eigenvalues, JointExtraction, WMeasure};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};

/// Writes straight to stdout so the line shows up without `--nocapture`.
fn report(n: usize, pass: bool, detail: String) {
    let line = format!("criterion {n}: {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {n} failed: {detail}");
}

fn ball_vector(rng: &mut ChaCha8Rng, max_len: f64) -> Vector3<f64> {
    let dir: [f64; 3] = UnitSphere.sample(rng);
    Vector3::from(dir) * (max_len * rng.random::<f64>())
}

fn unbiased(v: &Vector3<f64>) -> Povm {
    dichotomic_from_spec(0.0, v).unwrap()
}

struct Case {
    a: Povm,
    b: Povm,
    closed: f64,
    closed_jm: bool,
    result: OptimizationResult,
}

struct Suite {
    cases: Vec<Case>,
    elapsed: Duration,
}

fn config() -> OptimizerConfig {
    OptimizerConfig { seed: 2024, ..Default::default() }
}

fn dichotomic_suite() -> &'static Suite {
    static SUITE: OnceLock<Suite> = OnceLock::new();
    SUITE.get_or_init(|| {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cases = (0..100)
            .map(|_| {
                let (va, vb) = (ball_vector(&mut rng, 1.0), ball_vector(&mut rng, 1.0));
                let verdict = dichotomic_unbiased_negativity(&va, &vb).unwrap();
                let (a, b) = (unbiased(&va), unbiased(&vb));
                let result = minimize_negativity(&a, &b, &config()).unwrap();
                Case {
                    a,
                    b,
                    closed: verdict.minimized_negativity.unwrap(),
                    closed_jm: verdict.jointly_measurable,
                    result,
                }
            })
            .collect();
        Suite { cases, elapsed: start.elapsed() }
    })
}

fn trichotomic_suite() -> &'static Suite {
    static SUITE: OnceLock<Suite> = OnceLock::new();
    SUITE.get_or_init(|| {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let plane = Plane::default();
        let cases = (0..50)
            .map(|_| {
                let mu = rng.random_range(0.5..1.0);
                let phi = rng.random_range(0.0..2.0 * PI);
                let verdict = trichotomic_negativity(
                    &trichotomic_vectors(mu, 0.0, &plane),
                    &trichotomic_vectors(mu, phi, &plane),
                );
                let a = trichotomic_from_spec(mu, 0.0, &plane).unwrap();
                let b = trichotomic_from_spec(mu, phi, &plane).unwrap();
                let result = minimize_negativity(&a, &b, &config()).unwrap();
                Case {
                    a,
                    b,
                    closed: verdict.minimized_negativity.unwrap(),
                    closed_jm: verdict.jointly_measurable,
                    result,
                }
            })
            .collect();
        Suite { cases, elapsed: start.elapsed() }
    })
}

fn closed_form_agreement(n: usize, suite: &Suite, tol: f64, limit: Duration) {
    let cfg = config();
    let max_diff = suite.cases.iter().map(|c| (c.result.n_min - c.closed).abs()).fold(0.0, f64::max);
    let mismatches = suite.cases.iter().filter(|c| c.result.jointly_measurable(&cfg) != c.closed_jm).count();
    let jm = suite.cases.iter().filter(|c| c.closed_jm).count();
    let unconverged = suite.cases.iter().filter(|c| !c.result.converged).count();
    report(
        n,
        max_diff <= tol && mismatches == 0 && suite.elapsed < limit,
        format!(
            "{} pairs ({jm} JM), max |N_opt - N_closed| = {max_diff:.2e}, {mismatches} verdict mismatches, {unconverged} unconverged, {:.2?}",
            suite.cases.len(),
            suite.elapsed
        ),
    );
}

#[test]
fn criterion_01_table_one() {
    let start = Instant::now();
    let rows = [
        (0.0, 1.0, 1.5f64.ln()),
        (PI / 6.0, 0.896575, 0.608989),
        (PI / 4.0, 0.873498, 0.641283),
        (PI / 3.0, 3f64.sqrt() / 2.0, 0.651238),
    ];
    let (mut dmu, mut dr) = (0.0f64, 0.0f64);
    for (phi, mu, r) in rows {
        dmu = dmu.max((mu_threshold(phi) - mu).abs());
        dr = dr.max((r_threshold(phi) - r).abs());
    }
    let elapsed = start.elapsed();
    report(
        1,
        dmu <= 1e-5 && dr <= 1e-4 && elapsed < Duration::from_secs(1),
        format!("max |dmu| = {dmu:.2e}, max |dR| = {dr:.2e}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_02_dichotomic_closed_form_vs_optimizer() {
    closed_form_agreement(2, dichotomic_suite(), 1e-6, Duration::from_secs(60));
}

#[test]
fn criterion_03_trichotomic_closed_form_vs_optimizer() {
    closed_form_agreement(3, trichotomic_suite(), 1e-5, Duration::from_secs(300));
}

#[test]
fn criterion_04_busch_matches_biased_criterion_at_zero_bias() {
    let mut disagreements = 0;
    for k in 0..50 {
        let mu = k as f64 / 49.0;
        for j in 0..50 {
            let angle = PI * j as f64 / 49.0;
            let a = Vector3::x() * mu;
            let b = Vector3::new(angle.cos(), angle.sin(), 0.0) * mu;
            let busch = dichotomic_unbiased_negativity(&a, &b).unwrap().jointly_measurable;
            let biased = dichotomic_biased_criterion(0.0, &a, 0.0, &b).unwrap().jointly_measurable;
            disagreements += usize::from(busch != biased);
        }
    }
    report(4, disagreements == 0, format!("50x50 (mu, angle) grid, {disagreements} disagreements"));
}

#[test]
fn criterion_05_joint_povm_round_trip() {
    let cfg = config();
    let (mut checked, mut failures) = (0, Vec::new());
    let (mut worst_marginal, mut worst_rebuild) = (0.0f64, 0.0f64);
    for (suite, name) in [(dichotomic_suite(), "dichotomic"), (trichotomic_suite(), "trichotomic")] {
        for (k, c) in suite.cases.iter().enumerate() {
            if !c.result.jointly_measurable(&cfg) {
                continue;
            }
            checked += 1;
            let w = WMeasure::from_theta(&c.a, &c.b, &c.result.theta_star).unwrap();
            match w.extract_joint().unwrap() {
                JointExtraction::Joint(joint) => {
                    let ok = joint.validate().unwrap().ok;
                    let rebuilt = WMeasure::from_conjunction(&c.a, &c.b, &joint).unwrap();
                    let marginal = rebuilt.marginal_residual();
                    let rebuild =
                        w.grid().iter().zip(rebuilt.grid()).map(|(x, y)| x.max_abs_diff(y)).fold(0.0, f64::max);
                    worst_marginal = worst_marginal.max(marginal);
                    worst_rebuild = worst_rebuild.max(rebuild);
                    if !ok || marginal > 1e-7 || rebuild > 1e-9 {
                        failures.push(format!("{name}#{k}"));
                    }
                }
                JointExtraction::NotPositive(f) => {
                    failures.push(format!("{name}#{k} (eigenvalue {:.1e})", f.eigenvalue))
                }
            }
        }
    }
    report(
        5,
        failures.is_empty() && checked > 0,
        format!(
            "{checked} certified pairs, worst marginal residual {worst_marginal:.1e}, worst W rebuild {worst_rebuild:.1e}, failures {failures:?}"
        ),
    );
}

#[test]
fn criterion_06_ssm_matches_busch() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let (va, vb) = (ball_vector(&mut rng, 1.0), ball_vector(&mut rng, 1.0));
        let busch = dichotomic_unbiased_negativity(&va, &vb).unwrap().jointly_measurable;
        let ssm = ssm_jm_test(&unbiased(&va), &unbiased(&vb)).unwrap().verdict.jointly_measurable;
        mismatches += usize::from(busch != ssm);
    }
    let w = ssm_wmeasure(&unbiased(&Vector3::z()), &unbiased(&Vector3::x())).unwrap();
    let min = w.min_eigenvalue().unwrap().1;
    let err = (min - (1.0 - SQRT_2) / 4.0).abs();
    report(
        6,
        mismatches == 0 && err <= 1e-10,
        format!("1000 pairs, {mismatches} mismatches; z vs x min eigenvalue error {err:.1e}"),
    );
}

fn random_trichotomic_vectors(rng: &mut ChaCha8Rng) -> [Vector3<f64>; 3] {
    loop {
        let a1 = ball_vector(rng, 1.0);
        let a2 = ball_vector(rng, 1.0);
        let a3 = -a1 - a2;
        if a3.norm() <= 1.0 {
            return [a1, a2, a3];
        }
    }
}

#[test]
fn criterion_07_supplement_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for d in [2usize, 3] {
        let param = ThetaParameterization::new(d, 2).unwrap();
        for _ in 0..1000 {
            let (va, vb): (Vec<_>, Vec<_>) = if d == 2 {
                let (a, b) = (ball_vector(&mut rng, 1.0), ball_vector(&mut rng, 1.0));
                (vec![-a, a], vec![-b, b])
            } else {
                (random_trichotomic_vectors(&mut rng).to_vec(), random_trichotomic_vectors(&mut rng).to_vec())
            };
            let (a, b) = if d == 2 {
                (unbiased(&va[1]), unbiased(&vb[1]))
            } else {
                (
                    trichotomic_from_vectors(&[va[0], va[1], va[2]]).unwrap(),
                    trichotomic_from_vectors(&[vb[0], vb[1], vb[2]]).unwrap(),
                )
            };
            let x: Vec<f64> = param.uniform_params().iter().map(|u| u + rng.random_range(-1.0..1.0)).collect();
            let theta = param.differential_set(&x).unwrap();
            let formula = qubit_unbiased_eigenvalues(&va, &vb, &theta).unwrap();
            let w = WMeasure::from_theta(&a, &b, &theta).unwrap();
            for (entry, closed) in w.grid().iter().zip(&formula) {
                let dense = entry.eigenvalues().unwrap();
                worst = worst.max((dense[0] - closed[0]).abs()).max((dense[1] - closed[1]).abs());
            }
        }
    }
    report(7, worst <= 1e-10, format!("2000 configurations (d = 2, 3), max eigenvalue error {worst:.1e}"));
}

#[test]
fn criterion_08_entropy_anchors() {
    let pvm = unbiased(&Vector3::z()).unsharpness_entropy().unwrap();
    let mut uniform_err = 0.0f64;
    for (d, dim) in [(2usize, 2usize), (3, 2), (4, 3)] {
        let effects = vec![HermitianOperator::identity(dim).scale(1.0 / d as f64); d];
        let h = Povm::new(effects).unwrap().unsharpness_entropy().unwrap();
        uniform_err = uniform_err.max((h - (d as f64).ln()).abs());
    }
    let tri = trichotomic_from_spec(1.0, 0.0, &Plane::default()).unwrap().unsharpness_entropy().unwrap();
    let tri_err = (tri - 1.5f64.ln()).abs();
    report(
        8,
        pvm.abs() <= 1e-12 && uniform_err <= 1e-12 && tri_err <= 1e-10,
        format!("PVM {pvm:.1e}, uniform error {uniform_err:.1e}, trichotomic error {tri_err:.1e}"),
    );
}

#[test]
fn criterion_09_figure_shapes() {
    let cfg = config();
    let mut slice_ok = true;
    let mut notes = Vec::new();
    for r_b in [0.2, 0.4, 0.6] {
        let base = Family::Dichotomic { mu_a: 1.0, mu_b: 1.0, bias_a: 0.0, bias_b: 0.0, angle: PI / 2.0 }
            .with(Axis::RB, r_b)
            .unwrap();
        let spec = SliceSpec { base, axes: vec![AxisRange { axis: Axis::RA, start: 0.0, stop: 2f64.ln(), steps: 40 }] };
        let values: Vec<f64> = negativity_landscape(&spec, &cfg).unwrap().iter().map(|p| p.n_min.unwrap()).collect();
        let monotone = values.windows(2).all(|w| w[1] <= w[0] + 1e-9);
        let hits_zero = values.last() == Some(&0.0);
        slice_ok &= monotone && hits_zero;
        notes.push(format!("R_B={r_b}: monotone {monotone}, reaches 0 {hits_zero}"));
    }

    let phis: Vec<f64> = (0..=240).map(|k| 2.0 * PI / 3.0 * k as f64 / 240.0).collect();
    let r: Vec<f64> = phis.iter().map(|&p| r_threshold(p)).collect();
    let (imax, rmax) = r.iter().enumerate().fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let rmin = r.iter().cloned().fold(f64::MAX, f64::min);
    let tri_ok = (rmax - 0.651238).abs() < 1e-5
        && (phis[imax] - PI / 3.0).abs() < 1e-9
        && (rmin - 1.5f64.ln()).abs() < 1e-12
        && (r[0] - rmin).abs() < 1e-12
        && (r[240] - rmin).abs() < 1e-9;
    notes.push(format!("trichotomic boundary max {rmax:.6} at {:.4}, min {rmin:.6}", phis[imax]));

    let angles: Vec<f64> = (0..=180).map(|k| PI * k as f64 / 180.0).collect();
    let (jmax, dmax) = angles
        .iter()
        .map(|&a| dichotomic_r_threshold(a))
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let dich_ok = (dmax - 0.42).abs() <= 0.01 && (angles[jmax] - PI / 2.0).abs() < 1e-9;
    notes.push(format!("dichotomic boundary max {dmax:.4} at {:.4}", angles[jmax]));

    report(9, slice_ok && tri_ok && dich_ok, notes.join("; "));
}

#[test]
fn criterion_10_oracle_consistency() {
    let start = Instant::now();
    let cfg = config();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut pairs: Vec<(String, Povm, Povm)> = Vec::new();
    // Lengths drawn from the outer half of the allowed range, so that both
    // verdicts are well represented.
    let shell = |rng: &mut ChaCha8Rng, max_len: f64| {
        let dir: [f64; 3] = UnitSphere.sample(rng);
        Vector3::from(dir) * rng.random_range(0.5 * max_len..=max_len)
    };
    for k in 0..50 {
        let (va, vb) = (shell(&mut rng, 1.0), shell(&mut rng, 1.0));
        pairs.push((format!("unbiased#{k}"), unbiased(&va), unbiased(&vb)));
    }
    for k in 0..50 {
        let (ba, bb) = (rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
        let va = shell(&mut rng, 1.0 - f64::abs(ba));
        let vb = shell(&mut rng, 1.0 - f64::abs(bb));
        pairs.push((
            format!("biased#{k}"),
            dichotomic_from_spec(ba, &va).unwrap(),
            dichotomic_from_spec(bb, &vb).unwrap(),
        ));
    }
    let triangle = |rng: &mut ChaCha8Rng| loop {
        let (a1, a2) = (shell(rng, 1.0), shell(rng, 1.0));
        let a3 = -a1 - a2;
        if (0.5..=1.0).contains(&a3.norm()) {
            return [a1, a2, a3];
        }
    };
    for k in 0..100 {
        let a = trichotomic_from_vectors(&triangle(&mut rng)).unwrap();
        let b = trichotomic_from_vectors(&triangle(&mut rng)).unwrap();
        pairs.push((format!("trichotomic#{k}"), a, b));
    }
    let mut disagreements = Vec::new();
    let mut jm = 0;
    for (name, a, b) in &pairs {
        let opt = minimize_negativity(a, b, &cfg).unwrap();
        let search = joint_povm_search(a, b, &cfg).unwrap();
        jm += usize::from(opt.jointly_measurable(&cfg));
        if opt.jointly_measurable(&cfg) != search.success() {
            disagreements.push(format!("{name} (N = {:.2e}, residual {:.2e})", opt.n_min, search.marginal_residual));
        }
    }
    report(
        10,
        disagreements.is_empty(),
        format!("{} pairs ({jm} JM), disagreements {disagreements:?}, {:.2?}", pairs.len(), start.elapsed()),
    );
}

#[test]
fn boundary_anchor_is_jointly_measurable_everywhere() {
    let a = unbiased(&(Vector3::x() * FRAC_1_SQRT_2));
    let b = unbiased(&(Vector3::y() * FRAC_1_SQRT_2));
    let cfg = config();
    assert!(minimize_negativity(&a, &b, &cfg).unwrap().jointly_measurable(&cfg));
    assert!(joint_povm_search(&a, &b, &cfg).unwrap().success());
    assert!(ssm_jm_test(&a, &b).unwrap().verdict.jointly_measurable);
}
