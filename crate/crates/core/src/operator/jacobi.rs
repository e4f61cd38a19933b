//! Cyclic Jacobi eigensolver for small dense Hermitian matrices.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

type C64 = Complex<f64>;

pub(crate) const MAX_SWEEPS: usize = 100;
pub(crate) const OFF_DIAGONAL_THRESHOLD: f64 = 1e-14;

fn off_diagonal_norm(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for q in 0..n {
        for p in 0..n {
            if p != q {
                acc += a[(p, q)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Diagonalizes a Hermitian matrix. The input is assumed Hermitian; only
/// callers that already validated it reach this function.
///
/// Returns eigenvalues in ascending order and the unitary whose columns are
/// the matching eigenvectors.
pub(crate) fn eigh(input: &DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let n = input.nrows();
    let mut a = input.clone();
    let mut v = DMatrix::<C64>::identity(n, n);
    let scale = a.norm().max(1.0);
    let threshold = OFF_DIAGONAL_THRESHOLD * scale;

    let mut converged = off_diagonal_norm(&a) <= threshold;
    let mut sweep = 0;
    while !converged {
        if sweep == MAX_SWEEPS {
            return Err(Error::Numerical(format!(
                "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps \
                 (off-diagonal norm {:e})",
                off_diagonal_norm(&a)
            )));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweep += 1;
        converged = off_diagonal_norm(&a) <= threshold;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok((values, vectors))
}

/// One two-sided Jacobi rotation annihilating entry (p, q).
fn rotate(a: &mut DMatrix<C64>, v: &mut DMatrix<C64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 { 1.0 / (tau + (1.0 + tau * tau).sqrt()) } else { -1.0 / (-tau + (1.0 + tau * tau).sqrt()) };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // U = [[c, s e], [-s conj(e), c]] acting on columns p, q.
    let u_pq = phase * s;
    let u_qp = -phase.conj() * s;
    let n = a.nrows();

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * c;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * u_qp.conj();
        a[(q, k)] = apk * u_pq.conj() + aqk * c;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * c;
    }

    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonalizes_complex_two_by_two() {
        // [[1, 1-i], [1+i, 2]] has eigenvalues (3 ± sqrt(9))/2 = 0, 3.
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, -1.0), c(1.0, 1.0), c(2.0, 0.0)]);
        let (vals, vecs) = eigh(&m).unwrap();
        assert!((vals[0] - 0.0).abs() < 1e-14);
        assert!((vals[1] - 3.0).abs() < 1e-14);
        let recon = &vecs
            * DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(2, vals.iter().map(|&x| c(x, 0.0))))
            * vecs.adjoint();
        assert!((recon - m).norm() < 1e-13);
    }

    #[test]
    fn already_diagonal_input_returns_sorted() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0, 0.0), c(-1.0, 0.0), c(2.0, 0.0)]));
        let (vals, vecs) = eigh(&m).unwrap();
        assert_eq!(vals, vec![-1.0, 2.0, 3.0]);
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-15);
    }
}
