use crate::error::{Error, Result};
use crate::operator::{gell_mann_basis, BlochCoefficients, HermitianOperator, OperatorBasis};
use crate::povm::Povm;
use crate::wmeasure::{pair_index, DifferentialSet};

/// Maps the `(d−1)²` free differential operators to a full [`DifferentialSet`].
///
/// Each free entry carries `D²` Bloch coefficients `[θ₀, θ⃗]` with
/// normalization `d²`. The last row and column are solved from the sum
/// constraints, so every parameter vector is feasible.
#[derive(Debug, Clone)]
pub struct ThetaParameterization {
    d: usize,
    dim: usize,
}

impl ThetaParameterization {
    pub fn new(d: usize, dim: usize) -> Result<Self> {
        if d < 2 || dim < 2 {
            return Err(Error::Domain(format!("need d >= 2 and D >= 2, got d={d}, D={dim}")));
        }
        Ok(Self { d, dim })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn param_count(&self) -> usize {
        (self.d - 1) * (self.d - 1) * self.block()
    }

    fn block(&self) -> usize {
        self.dim * self.dim
    }

    /// Parameters of the uniform set `Θ̂_ij = 𝟙/d²` (`θ₀ = 1`, `θ⃗ = 0`).
    pub fn uniform_params(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.param_count()];
        x.chunks_mut(self.block()).for_each(|c| c[0] = 1.0);
        x
    }

    /// Free-block coefficients of an existing set.
    pub fn params_from_theta(&self, theta: &DifferentialSet) -> Result<Vec<f64>> {
        if theta.d() != self.d || theta.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.d, found: theta.d() });
        }
        let coeffs = theta.coefficients();
        let mut x = Vec::with_capacity(self.param_count());
        for i in 0..self.d - 1 {
            for j in 0..self.d - 1 {
                x.extend(coeffs[pair_index(self.d, i, j)].to_flat());
            }
        }
        Ok(x)
    }

    /// Flat row-major coefficients of all `d²` entries, `D²` each.
    pub fn full_coefficients(&self, x: &[f64]) -> Vec<f64> {
        let (d, b) = (self.d, self.block());
        let mut out = vec![0.0; d * d * b];
        let d_f = d as f64;
        for i in 0..d - 1 {
            for j in 0..d - 1 {
                let src = &x[(i * (d - 1) + j) * b..][..b];
                out[pair_index(d, i, j) * b..][..b].copy_from_slice(src);
            }
        }
        // 𝟙/d has scalar coefficient d at normalization d².
        for k in 0..d - 1 {
            let (row_last, col_last) = (pair_index(d, k, d - 1) * b, pair_index(d, d - 1, k) * b);
            out[row_last] = d_f;
            out[col_last] = d_f;
            for m in 0..d - 1 {
                for c in 0..b {
                    out[row_last + c] -= out[pair_index(d, k, m) * b + c];
                    out[col_last + c] -= out[pair_index(d, m, k) * b + c];
                }
            }
        }
        let corner = pair_index(d, d - 1, d - 1) * b;
        out[corner] = d_f;
        for m in 0..d - 1 {
            for c in 0..b {
                out[corner + c] -= out[pair_index(d, d - 1, m) * b + c];
            }
        }
        out
    }

    pub fn differential_set(&self, x: &[f64]) -> Result<DifferentialSet> {
        let full = self.full_coefficients(x);
        let coeffs: Vec<_> = full.chunks(self.block()).map(BlochCoefficients::from_flat).collect();
        DifferentialSet::from_coefficients(self.d, self.dim, &coeffs)
    }
}

/// Negativity evaluator for a fixed pair `(A, B)` in coefficient space.
pub(crate) struct Objective {
    param: ThetaParameterization,
    basis: OperatorBasis,
    /// Coefficients of `(Â_i + B̂_j)/d` at normalization 1.
    offsets: Vec<f64>,
}

/// Spectrum summary of one W-measure.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Spectrum {
    pub negativity: f64,
    pub min_eigenvalue: f64,
}

impl Objective {
    pub fn new(a: &Povm, b: &Povm) -> Result<Self> {
        if a.outcomes() != b.outcomes() {
            return Err(Error::DimensionMismatch { expected: a.outcomes(), found: b.outcomes() });
        }
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
        }
        let (d, dim) = (a.outcomes(), a.dim());
        let param = ThetaParameterization::new(d, dim)?;
        let basis = gell_mann_basis(dim)?;
        let mut offsets = Vec::with_capacity(d * d * dim * dim);
        for i in 0..d {
            for j in 0..d {
                let sum = &(a.effect(i) + b.effect(j)) * (1.0 / d as f64);
                offsets.extend(basis.encode(&sum, 1.0)?.to_flat());
            }
        }
        Ok(Self { param, basis, offsets })
    }

    pub fn param(&self) -> &ThetaParameterization {
        &self.param
    }

    pub fn spectrum(&self, x: &[f64]) -> Spectrum {
        self.smoothed_spectrum(x, 0.0)
    }

    /// As [`spectrum`](Self::spectrum) with each `|λ| − λ` replaced by
    /// `√(λ² + ε²) − λ`, a smooth convex upper bound that is tight at `ε = 0`.
    pub fn smoothed_spectrum(&self, x: &[f64], eps: f64) -> Spectrum {
        let eps2 = eps * eps;
        let penalty = |l: f64| {
            if eps2 == 0.0 {
                if l < 0.0 {
                    -2.0 * l
                } else {
                    0.0
                }
            } else {
                (l * l + eps2).sqrt() - l
            }
        };
        let d = self.param.d;
        let dim = self.param.dim;
        let b = dim * dim;
        let inv = 1.0 / (d * d) as f64;
        let theta = self.param.full_coefficients(x);
        let mut w = vec![0.0; b];
        let mut buf = HermitianOperator::zeros(dim);
        let mut neg = 0.0;
        let mut min_eig = f64::INFINITY;
        for e in 0..d * d {
            for c in 0..b {
                w[c] = self.offsets[e * b + c] - theta[e * b + c] * inv;
            }
            if dim == 2 {
                let r = (w[1] * w[1] + w[2] * w[2] + w[3] * w[3]).sqrt();
                let lo = w[0] - r;
                neg += penalty(lo) + penalty(w[0] + r);
                min_eig = min_eig.min(lo);
            } else {
                self.basis.decode_flat_into(&w, 1.0, &mut buf);
                match buf.eigenvalues() {
                    Ok(values) => {
                        neg += values.iter().map(|&l| penalty(l)).sum::<f64>();
                        min_eig = min_eig.min(values[0]);
                    }
                    Err(_) => return Spectrum { negativity: f64::INFINITY, min_eigenvalue: f64::NEG_INFINITY },
                }
            }
        }
        Spectrum { negativity: neg / dim as f64, min_eigenvalue: min_eig }
    }
}
