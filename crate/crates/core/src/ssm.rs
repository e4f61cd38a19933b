//! Selective and sequential measurements: measure `A` with the Lüders
//! instrument, then `B`, and build the W-measure from the resulting
//! conjunction `Ĉ_ij = K̂_i† B̂_j K̂_i`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::criteria::JmVerdict;
use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, HermitianOperator};
use crate::povm::{DensityMatrix, Povm, COMPLETENESS_TOL};
use crate::wmeasure::{pair_index, unbiased_qubit_vectors, WMeasure};

fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Kraus operators `K̂_i` of an instrument with `Σ K̂_i†K̂_i = 𝟙`.
#[derive(Debug, Clone)]
pub struct KrausSet {
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::Validation("empty Kraus set".into()));
        };
        let dim = first.nrows();
        let mut total = ComplexMatrix::zeros(dim, dim);
        for k in &operators {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: k.nrows() });
            }
            total += k.adjoint() * k;
        }
        let residual = max_abs(&(total - ComplexMatrix::identity(dim, dim)));
        if residual > COMPLETENESS_TOL {
            return Err(Error::Validation(format!("Kraus completeness violated by {residual:e}")));
        }
        Ok(Self { operators })
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    /// Effects `K̂_i†K̂_i` of the induced POVM.
    pub fn effects(&self) -> Result<Vec<HermitianOperator>> {
        self.operators.iter().map(|k| HermitianOperator::new(k.adjoint() * k)).collect()
    }
}

/// `K̂_i = √Â_i`.
pub fn luders_kraus(a: &Povm) -> Result<KrausSet> {
    let ops = a.effects().iter().map(|e| e.sqrt().map(HermitianOperator::into_matrix)).collect::<Result<_>>()?;
    KrausSet::new(ops)
}

/// `Ĉ_ij = K̂_i† B̂_j K̂_i`, row-major in `(i, j)`.
pub fn sequential_conjunction(kraus: &KrausSet, b: &Povm) -> Result<Povm> {
    if kraus.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: kraus.dim(), found: b.dim() });
    }
    let mut effects = Vec::with_capacity(kraus.operators.len() * b.outcomes());
    for k in &kraus.operators {
        for bj in b.effects() {
            effects.push(HermitianOperator::new(k.adjoint() * bj.matrix() * k)?);
        }
    }
    Povm::new(effects)
}

/// Which measurement acts first in the sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SequenceOrder {
    #[default]
    AFirst,
    BFirst,
}

/// W-measure of the Lüders sequence with `A` measured first.
pub fn ssm_wmeasure(a: &Povm, b: &Povm) -> Result<WMeasure> {
    ssm_wmeasure_ordered(a, b, SequenceOrder::AFirst)
}

/// As [`ssm_wmeasure`], optionally measuring `B` first. The conjunction is
/// always indexed `(i, j)` with `i` an outcome of `A`.
pub fn ssm_wmeasure_ordered(a: &Povm, b: &Povm, order: SequenceOrder) -> Result<WMeasure> {
    if a.outcomes() != b.outcomes() {
        return Err(Error::DimensionMismatch { expected: a.outcomes(), found: b.outcomes() });
    }
    let conjunction = match order {
        SequenceOrder::AFirst => sequential_conjunction(&luders_kraus(a)?, b)?,
        SequenceOrder::BFirst => {
            let swapped = sequential_conjunction(&luders_kraus(b)?, a)?;
            let d = a.outcomes();
            let order: Vec<usize> = (0..d * d).map(|e| pair_index(d, e % d, e / d)).collect();
            swapped.permuted(&order)
        }
    };
    WMeasure::from_conjunction(a, b, &conjunction)
}

/// Whether a verdict is a full characterization or only a sufficient condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guarantee {
    /// Two-outcome unbiased qubit pairs: `Ŵ^S ≥ 0` iff jointly measurable.
    Iff,
    /// Elsewhere `Ŵ^S ≥ 0` implies joint measurability; a negative entry is inconclusive.
    SufficientOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsmVerdict {
    /// `criterion_margin` is `−λ_min(Ŵ^S)`.
    pub verdict: JmVerdict,
    pub guarantee: Guarantee,
    pub min_eigenvalue: f64,
    /// Negativity of `Ŵ^S`; an upper bound on the minimized negativity.
    pub negativity: f64,
}

pub fn ssm_jm_test(a: &Povm, b: &Povm) -> Result<SsmVerdict> {
    let w = ssm_wmeasure(a, b)?;
    let (_, min_eigenvalue) = w.min_eigenvalue()?;
    let negativity = w.negativity()?;
    let covered = a.outcomes() == 2 && unbiased_qubit_vectors(a).is_some() && unbiased_qubit_vectors(b).is_some();
    Ok(SsmVerdict {
        verdict: JmVerdict::from_margin(-min_eigenvalue, None),
        guarantee: if covered { Guarantee::Iff } else { Guarantee::SufficientOnly },
        min_eigenvalue,
        negativity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuasiSource {
    FromOperators,
    FromProbabilities,
}

/// Operational quasiprobability `Q(i, j)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Quasiprobability {
    d: usize,
    table: Vec<f64>,
    source: QuasiSource,
}

impl Quasiprobability {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.table[pair_index(self.d, i, j)]
    }

    pub fn source(&self) -> QuasiSource {
        self.source
    }

    /// Smallest entry with its cell.
    pub fn min_entry(&self) -> ((usize, usize), f64) {
        let (k, v) = self.table.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty table");
        ((k / self.d, k % self.d), *v)
    }

    pub fn marginal_a(&self) -> Vec<f64> {
        (0..self.d).map(|i| (0..self.d).map(|j| self.entry(i, j)).sum()).collect()
    }

    pub fn marginal_b(&self) -> Vec<f64> {
        (0..self.d).map(|j| (0..self.d).map(|i| self.entry(i, j)).sum()).collect()
    }
}

/// `Q(i, j) = Tr Ŵ_ij ϱ̂`.
pub fn quasiprob_from_state(w: &WMeasure, state: &DensityMatrix) -> Result<Quasiprobability> {
    if w.dim() != state.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), found: state.dim() });
    }
    let table = w.grid().iter().map(|e| e.expectation(state.operator())).collect();
    Ok(Quasiprobability { d: w.d(), table, source: QuasiSource::FromOperators })
}

/// Tolerance on probability normalization for measured statistics.
pub const STATISTICS_TOL: f64 = 1e-9;

fn check_distribution(name: &str, p: &[f64]) -> Result<()> {
    if p.iter().any(|x| !x.is_finite() || *x < -STATISTICS_TOL) {
        return Err(Error::Validation(format!("{name} has negative or non-finite entries")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > STATISTICS_TOL {
        return Err(Error::Validation(format!("{name} sums to {total}, expected 1")));
    }
    Ok(())
}

/// `Q(i,j) = p_C(i,j) + (p_A(i) − Σ_j p_C(i,j))/d + (p_B(j) − Σ_i p_C(i,j))/d`.
pub fn quasiprob_from_statistics(p_a: &[f64], p_b: &[f64], p_c: &[Vec<f64>]) -> Result<Quasiprobability> {
    let d = p_a.len();
    if d < 2 || p_b.len() != d || p_c.len() != d || p_c.iter().any(|r| r.len() != d) {
        return Err(Error::Validation(format!("statistics must be d, d and d×d with d >= 2 (d = {d})")));
    }
    check_distribution("pA", p_a)?;
    check_distribution("pB", p_b)?;
    let flat: Vec<f64> = p_c.iter().flatten().copied().collect();
    check_distribution("pC", &flat)?;
    let inv = 1.0 / d as f64;
    let rows: Vec<f64> = p_c.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..d).map(|j| p_c.iter().map(|r| r[j]).sum()).collect();
    let mut table = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            table.push(p_c[i][j] + (p_a[i] - rows[i]) * inv + (p_b[j] - cols[j]) * inv);
        }
    }
    Ok(Quasiprobability { d, table, source: QuasiSource::FromProbabilities })
}

/// Eigenstate of the most negative eigenvalue across all entries of `w`.
pub fn worst_case_state(w: &WMeasure) -> Result<(DensityMatrix, (usize, usize), f64)> {
    let (cell, value) = w.min_eigenvalue()?;
    let eig = w.entry(cell.0, cell.1).eig()?;
    let state = DensityMatrix::pure(&eig.vectors.column(0).into_owned())?;
    Ok((state, cell, value))
}

/// Smallest `Q(i, j)` over `samples` Haar-random pure states. Sample `k`
/// draws from its own generator seeded by `(seed, k)`.
pub fn min_quasiprob_over_states(w: &WMeasure, samples: usize, seed: u64) -> Result<f64> {
    (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let state = DensityMatrix::random_pure(w.dim(), &mut rng);
            Ok(quasiprob_from_state(w, &state)?.min_entry().1)
        })
        .try_reduce(|| f64::INFINITY, |a, b| Ok(a.min(b)))
}
