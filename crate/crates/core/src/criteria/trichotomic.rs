use nalgebra::Vector3;

use super::JmVerdict;
use crate::povm::qubit_operator;
use crate::wmeasure::{pair_index, DifferentialSet};

type V3 = Vector3<f64>;

/// One-based index `k ≡ 2(i + j) (mod 3)`, taken in `{1, 2, 3}`.
pub fn solution_index(i: usize, j: usize) -> usize {
    match (2 * (i + j)) % 3 {
        0 => 3,
        r => r,
    }
}

/// Solution matrix for a pair of unbiased three-outcome qubit POVMs.
///
/// Grids are row-major and zero-based: entry `[3 * i + j]` belongs to
/// outcome pair `(i + 1, j + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrichotomicSolution {
    pub theta_vectors: [V3; 9],
    pub theta_scalars: [f64; 9],
    pub phi_vectors: [V3; 9],
}

impl TrichotomicSolution {
    /// `|φ⃗_ij − θ⃗ˢ_ij|`, row-major.
    pub fn residual_norms(&self) -> [f64; 9] {
        std::array::from_fn(|k| (self.phi_vectors[k] - self.theta_vectors[k]).norm())
    }

    /// `Σ_ij |φ⃗_ij − θ⃗ˢ_ij|`; the pair is jointly measurable when this is at most 9.
    pub fn residual_sum(&self) -> f64 {
        self.residual_norms().iter().sum()
    }

    /// Per-pair windows for the off-diagonal `θ₀` entries in the negative regime:
    /// `|φ⃗_ij − θ⃗ˢ_ij| + |φ⃗_ji − θ⃗ˢ_ji| ≥ 3` for `(i, j) ∈ {(1,2), (2,3), (3,1)}`.
    pub fn plus_windows(&self) -> [bool; 3] {
        let v = self.residual_norms();
        [(0, 1), (1, 2), (2, 0)].map(|(i, j)| v[pair_index(3, i, j)] + v[pair_index(3, j, i)] >= 3.0 - 1e-12)
    }

    /// `Θ̂_ij = (θ₀^{ij} 𝟙 + θ⃗ˢ_ij·σ⃗)/9`.
    pub fn differential_set(&self) -> DifferentialSet {
        let grid = (0..9).map(|k| qubit_operator(self.theta_scalars[k], &self.theta_vectors[k], 9.0)).collect();
        DifferentialSet::from_grid_unchecked(3, grid)
    }
}

/// Off-diagonal split `c_ij = 2 − θ₀^{ij}` with `c_12 = c_23 = c_31 = s` and
/// `c_13 = c_21 = c_32 = 3 − s`, chosen so that `|c_ij|` tracks `|φ⃗_ij − θ⃗ˢ_ij|`.
fn theta_scalars(v: &[f64; 9]) -> [f64; 9] {
    let forward = [v[pair_index(3, 0, 1)], v[pair_index(3, 1, 2)], v[pair_index(3, 2, 0)]];
    let backward = [v[pair_index(3, 0, 2)], v[pair_index(3, 1, 0)], v[pair_index(3, 2, 1)]];
    let min = |x: [f64; 3]| x.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = |x: [f64; 3]| x.iter().cloned().fold(0.0, f64::max);
    let (p, q) =
        if max(forward) + max(backward) <= 3.0 { (max(forward), max(backward)) } else { (min(forward), min(backward)) };
    let s = if p + q > 0.0 { 3.0 * p / (p + q) } else { 1.5 };
    let mut out = [2.0; 9];
    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
        out[pair_index(3, i, j)] = 2.0 - s;
        out[pair_index(3, j, i)] = s - 1.0;
    }
    out
}

/// Solution matrix `θ⃗ˢ_ij = a⃗_k + b⃗_k`, `k = 2(i + j) mod 3`, in the given labeling.
pub fn trichotomic_solution(a: &[V3; 3], b: &[V3; 3]) -> TrichotomicSolution {
    let phi_vectors: [V3; 9] = std::array::from_fn(|k| a[k / 3] + b[k % 3]);
    let theta_vectors: [V3; 9] = std::array::from_fn(|k| {
        let s = solution_index(k / 3 + 1, k % 3 + 1) - 1;
        a[s] + b[s]
    });
    let mut sol = TrichotomicSolution { theta_vectors, theta_scalars: [0.0; 9], phi_vectors };
    sol.theta_scalars = theta_scalars(&sol.residual_norms());
    sol
}

/// Outcome relabeling: relabeled outcome `i` of A is original outcome `a[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Labeling {
    pub a: [usize; 3],
    pub b: [usize; 3],
}

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Relabeling of both POVMs with the smallest solution-matrix residual sum.
///
/// The solution matrix depends on how outcomes are numbered; each labeling
/// gives a feasible differential set, so the smallest sum is the tightest.
/// Ties keep the first labeling in lexicographic order.
pub fn best_labeling(a: &[V3; 3], b: &[V3; 3]) -> (Labeling, TrichotomicSolution) {
    let mut best: Option<(Labeling, TrichotomicSolution, f64)> = None;
    for pa in PERMUTATIONS {
        for pb in PERMUTATIONS {
            let sol = trichotomic_solution(&pa.map(|i| a[i]), &pb.map(|j| b[j]));
            let sum = sol.residual_sum();
            if best.as_ref().is_none_or(|(_, _, s)| sum < s - 1e-14) {
                best = Some((Labeling { a: pa, b: pb }, sol, sum));
            }
        }
    }
    let (labeling, sol, _) = best.expect("permutation list is nonempty");
    (labeling, sol)
}

/// Minimized negativity `max(Σ_ij |φ⃗_ij − θ⃗ˢ_ij|/9 − 1, 0)` over outcome labelings.
pub fn trichotomic_negativity(a: &[V3; 3], b: &[V3; 3]) -> JmVerdict {
    let (_, sol) = best_labeling(a, b);
    let margin = sol.residual_sum() / 9.0 - 1.0;
    JmVerdict::from_margin(margin, Some(margin.max(0.0)))
}

/// Differential set attaining [`trichotomic_negativity`], in the caller's labeling.
pub fn trichotomic_witness(a: &[V3; 3], b: &[V3; 3]) -> DifferentialSet {
    let (labeling, sol) = best_labeling(a, b);
    let relabeled = sol.differential_set();
    let mut grid = relabeled.grid().to_vec();
    for i in 0..3 {
        for j in 0..3 {
            grid[pair_index(3, labeling.a[i], labeling.b[j])] = relabeled.entry(i, j).clone();
        }
    }
    DifferentialSet::from_grid_unchecked(3, grid)
}
