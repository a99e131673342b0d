use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::{CMatrix, CVector};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Cholesky factor of a Hermitian positive definite matrix.
///
/// On failure the diagonal is loaded with `1e-10 · tr(A) / n` and the
/// factorization retried once.
pub(crate) fn cholesky_with_jitter(a: CMatrix) -> Result<Cholesky<Complex64, Dyn>> {
    let n = a.nrows();
    let trace: f64 = (0..n).map(|i| a[(i, i)].re).sum();
    match Cholesky::new(a.clone()) {
        Some(c) => Ok(c),
        None => {
            let jitter = 1e-10 * trace.abs() / n.max(1) as f64;
            let mut loaded = a;
            for i in 0..n {
                loaded[(i, i)] += Complex64::new(jitter, 0.0);
            }
            Cholesky::new(loaded).ok_or_else(|| {
                Error::Singular(format!(
                    "{n}x{n} Hermitian system not positive definite after jitter {jitter:e}"
                ))
            })
        }
    }
}

/// Products below this many multiply-adds stay on the generic complex path.
const SPLIT_GEMM_MIN: usize = 4096;
/// Thin products do not amortize splitting the large operand either.
const SPLIT_GEMM_MIN_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Op {
    None,
    Adjoint,
}

fn split(m: &CMatrix, op: Op) -> (DMatrix<f64>, DMatrix<f64>) {
    match op {
        Op::None => (m.map(|z| z.re), m.map(|z| z.im)),
        Op::Adjoint => (
            DMatrix::from_fn(m.ncols(), m.nrows(), |i, j| m[(j, i)].re),
            DMatrix::from_fn(m.ncols(), m.nrows(), |i, j| -m[(j, i)].im),
        ),
    }
}

/// `op(a) · op(b)`, done as four real products (which hit the blocked real
/// kernel) once the product is large enough to pay for the split.
pub(crate) fn gemm(a: &CMatrix, op_a: Op, b: &CMatrix, op_b: Op) -> CMatrix {
    let (m, k) = match op_a {
        Op::None => a.shape(),
        Op::Adjoint => (a.ncols(), a.nrows()),
    };
    let n = match op_b {
        Op::None => b.ncols(),
        Op::Adjoint => b.nrows(),
    };
    if m * k * n < SPLIT_GEMM_MIN || m.min(k).min(n) < SPLIT_GEMM_MIN_DIM {
        return match (op_a, op_b) {
            (Op::None, Op::None) => a * b,
            (Op::Adjoint, Op::None) => a.ad_mul(b),
            (Op::None, Op::Adjoint) => a * b.adjoint(),
            (Op::Adjoint, Op::Adjoint) => a.adjoint() * b.adjoint(),
        };
    }
    let (ar, ai) = split(a, op_a);
    let (br, bi) = split(b, op_b);
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, Complex64::new)
}

/// Inverse of a Hermitian positive definite matrix via its Cholesky factor:
/// `L⁻¹` by column-oriented forward substitution, then `L⁻ᴴ L⁻¹`.
pub(crate) fn hpd_inverse(a: CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    let l = cholesky_with_jitter(a)?.unpack();
    let mut inv = DMatrix::from_element(n, n, ZERO);
    let l_data = l.as_slice();
    for j in 0..n {
        let col = &mut inv.as_mut_slice()[j * n..(j + 1) * n];
        col[j] = Complex64::new(1.0, 0.0);
        for k in j..n {
            let xk = col[k] / l_data[k * n + k];
            col[k] = xk;
            if xk == ZERO {
                continue;
            }
            let l_col = &l_data[k * n + k + 1..(k + 1) * n];
            for (x, &lik) in col[k + 1..].iter_mut().zip(l_col) {
                *x -= lik * xk;
            }
        }
    }
    let mut out = gemm(&inv, Op::Adjoint, &inv, Op::None);
    for i in 0..n {
        out[(i, i)].im = 0.0;
    }
    Ok(out)
}

/// `‖v‖²`.
#[inline]
pub(crate) fn norm_sqr(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Least-squares solution of `A x ≈ b` for a tall, full-column-rank `A`.
///
/// Returns `None` when the Gram matrix is not numerically positive definite.
pub(crate) fn least_squares(a: &CMatrix, b: &CVector) -> Option<CVector> {
    let gram = a.ad_mul(a);
    let rhs = a.ad_mul(b);
    let chol = Cholesky::new(gram)?;
    let diag_min = (0..chol.l_dirty().nrows())
        .map(|i| chol.l_dirty()[(i, i)].re)
        .fold(f64::INFINITY, f64::min);
    let diag_max = (0..chol.l_dirty().nrows())
        .map(|i| chol.l_dirty()[(i, i)].re)
        .fold(0.0, f64::max);
    if !(diag_min > 1e-7 * diag_max) {
        return None;
    }
    Some(chol.solve(&rhs))
}

/// Columns `cols` of `m`.
pub(crate) fn select_columns(m: &CMatrix, cols: &[usize]) -> CMatrix {
    let mut out = DMatrix::from_element(m.nrows(), cols.len(), ZERO);
    for (j, &c) in cols.iter().enumerate() {
        out.set_column(j, &m.column(c));
    }
    out
}

/// Relative Frobenius distance `‖a − b‖ / ‖b‖`.
pub fn relative_frobenius(a: &CMatrix, b: &CMatrix) -> f64 {
    let denom = b.norm();
    if denom == 0.0 {
        return a.norm();
    }
    (a - b).norm() / denom
}
