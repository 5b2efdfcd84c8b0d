//! Small dense symmetric positive-definite solves.
//!
//! Everything in this crate factors matrices of modest size (regression
//! coefficient blocks, one kernel matrix per quantile level), so a plain
//! row-major Cholesky with contiguous row dot products is fast enough and
//! keeps the crate free of a linear-algebra dependency.

use crate::error::Error;
use crate::fmath;
use alloc::format;

/// Four-lane dot product. The split accumulators break the serial
/// floating-point dependency chain, which is the bottleneck of the
/// factorization; the summation order is fixed, so results stay
/// deterministic.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (mut s0, mut s1, mut s2, mut s3) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut i = 0;
    while i + 4 <= n {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
        i += 4;
    }
    let mut s = (s0 + s2) + (s1 + s3);
    while i < n {
        s += a[i] * b[i];
        i += 1;
    }
    s
}

/// In-place Cholesky factorization of the lower triangle of a row-major
/// symmetric matrix. On success the strict upper triangle is left untouched
/// and must be ignored by callers.
pub(crate) fn cholesky_in_place(a: &mut [f64], n: usize) -> Result<(), Error> {
    debug_assert_eq!(a.len(), n * n);
    for i in 0..n {
        let (before, row_i) = a.split_at_mut(i * n);
        for j in 0..i {
            let s = row_i[j] - dot(&row_i[..j], &before[j * n..j * n + j]);
            let ljj = before[j * n + j];
            row_i[j] = s / ljj;
        }
        let d = row_i[i] - dot(&row_i[..i], &row_i[..i]);
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Numerical(format!(
                "Cholesky pivot {i} is non-positive ({d:e}); matrix is not positive definite"
            )));
        }
        row_i[i] = fmath::sqrt(d);
    }
    Ok(())
}

/// Solve `L y = b` in place (forward substitution on the factored lower triangle).
pub(crate) fn solve_lower_in_place(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let s = b[i] - dot(&l[i * n..i * n + i], &b[..i]);
        b[i] = s / l[i * n + i];
    }
}

/// Solve `L^T x = b` in place (back substitution; reads column `i` of `L`).
pub(crate) fn solve_lower_transpose_in_place(l: &[f64], n: usize, b: &mut [f64]) {
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in (i + 1)..n {
            s -= l[j * n + i] * b[j];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Solve `A x = b` in place given the Cholesky factor of `A`.
pub(crate) fn solve_spd_in_place(l: &[f64], n: usize, b: &mut [f64]) {
    solve_lower_in_place(l, n, b);
    solve_lower_transpose_in_place(l, n, b);
}
