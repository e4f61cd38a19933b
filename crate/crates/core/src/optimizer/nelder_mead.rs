//! Adaptive Nelder–Mead (dimension-dependent coefficients of Gao and Han).

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Settings {
    pub step: f64,
    pub max_evals: usize,
    pub tol: f64,
    /// Stop as soon as the objective reaches this value.
    pub floor: f64,
    /// Gains below this on a fresh simplex count as a stall.
    pub min_gain: f64,
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let best = &simplex[0];
    simplex[1..].iter().flat_map(|v| v.iter().zip(best).map(|(a, b)| (a - b).abs())).fold(0.0, f64::max)
}

fn combine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b − a)
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

pub(crate) fn minimize(f: &mut impl FnMut(&[f64]) -> f64, x0: &[f64], s: &Settings) -> Outcome {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
    let (gamma, delta) = if n == 1 { (0.5, 0.5) } else { (gamma, delta) };

    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for k in 0..n {
        let mut v = x0.to_vec();
        v[k] += s.step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();

    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if values[0] <= s.floor || diameter(&simplex) < s.tol {
            return Outcome { x: simplex[0].clone(), fx: values[0], evals, converged: true };
        }
        if evals >= s.max_evals {
            return Outcome { x: simplex[0].clone(), fx: values[0], evals, converged: false };
        }

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            centroid.iter_mut().zip(v).for_each(|(c, x)| *c += x / nf);
        }
        let worst = simplex[n].clone();
        let reflected = combine(&centroid, &worst, -alpha);
        let fr = eval(&reflected, &mut evals);

        if fr < values[0] {
            let expanded = combine(&centroid, &worst, -alpha * beta);
            let fe = eval(&expanded, &mut evals);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (candidate, fc) = if fr < values[n] {
            let c = combine(&centroid, &worst, -alpha * gamma);
            let fc = eval(&c, &mut evals);
            (c, if fc <= fr { fc } else { f64::INFINITY })
        } else {
            let c = combine(&centroid, &worst, gamma);
            let fc = eval(&c, &mut evals);
            (c, if fc < values[n] { fc } else { f64::INFINITY })
        };
        if fc.is_finite() {
            simplex[n] = candidate;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for k in 1..=n {
            simplex[k] = combine(&best, &simplex[k], delta);
            values[k] = eval(&simplex[k], &mut evals);
        }
    }
}

/// Consecutive fresh simplices without improvement before giving up.
const PATIENCE: usize = 4;

/// Repeats [`minimize`] from the incumbent with fresh simplices of varying
/// size until several in a row fail to improve it or the budget runs out.
/// Converged means the incumbent survived `PATIENCE` fresh simplices in a
/// row or reached the floor; running out of budget first does not count.
pub(crate) fn minimize_with_restarts(f: &mut impl FnMut(&[f64]) -> f64, x0: &[f64], s: &Settings) -> Outcome {
    let mut best = minimize(f, x0, s);
    let mut stalls = 0;
    let mut round = 0;
    while best.fx > s.floor && best.evals < s.max_evals && stalls < PATIENCE {
        round += 1;
        // Alternate shrinking and full-size simplices: 1/2, 1, 1/4, 1, 1/8, ...
        let step = if round % 2 == 0 { s.step } else { s.step * 0.5f64.powi((round + 1) / 2) };
        let inner = Settings { step: step.max(1e-7), max_evals: s.max_evals - best.evals, ..*s };
        let next = minimize(f, &best.x, &inner);
        let evals = best.evals + next.evals;
        stalls = if next.fx < best.fx - s.min_gain { 0 } else { stalls + 1 };
        if next.fx < best.fx {
            best = Outcome { x: next.x, fx: next.fx, evals, converged: next.converged };
        } else {
            best.evals = evals;
        }
    }
    best.converged = stalls >= PATIENCE || best.fx <= s.floor;
    best
}
