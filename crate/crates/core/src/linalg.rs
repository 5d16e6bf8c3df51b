//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::DMatrix;

use crate::scalar::{cast, Real};

pub fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    let half = cast::<T>(0.5);
    (m + m.transpose()) * half
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (x, y)| acc.max((*x - *y).abs()))
}

pub fn max_asymmetry<T: Real>(m: &DMatrix<T>) -> T {
    max_abs_diff(m, &m.transpose())
}

pub fn max_offdiag_abs<T: Real>(m: &DMatrix<T>) -> T {
    let n = m.nrows();
    let mut best = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                best = best.max(m[(i, j)].abs());
            }
        }
    }
    best
}

pub fn cholesky_lower<T: Real>(m: &DMatrix<T>) -> Option<DMatrix<T>> {
    nalgebra::Cholesky::new(m.clone()).map(|c| c.l())
}

/// `log det` of a symmetric positive definite matrix, `None` if the Cholesky
/// factorization fails.
pub fn log_det_spd<T: Real>(m: &DMatrix<T>) -> Option<T> {
    let chol = nalgebra::Cholesky::new(m.clone())?;
    let l = chol.l_dirty();
    let two = cast::<T>(2.0);
    Some((0..m.nrows()).map(|i| two * l[(i, i)].ln()).sum())
}

pub fn inverse_spd<T: Real>(m: &DMatrix<T>) -> Option<DMatrix<T>> {
    nalgebra::Cholesky::new(m.clone()).map(|c| symmetrize(&c.inverse()))
}

/// `tr(A B)` without forming the product.
pub fn trace_product<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    let n = a.nrows();
    let mut acc = T::zero();
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn frobenius_diff<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (*x - *y) * (*x - *y))
        .sum::<T>()
        .sqrt()
}
