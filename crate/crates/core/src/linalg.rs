//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Thin QR factor of `a` with the sign convention `diag(R) > 0`.
///
/// With this convention the orthonormal factor is a deterministic function of
/// `a`, so a Gaussian `a` yields a Haar-distributed frame.
pub fn orthonormal_factor<T: Real>(a: DMatrix<T>) -> DMatrix<T> {
    let cols = a.ncols();
    let qr = a.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..cols.min(q.ncols()) {
        if r[(j, j)] < T::zero() {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Symmetric eigendecomposition with eigenvalues sorted ascending.
pub fn sym_eigen<T: Real>(m: &DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
    let eig = m.clone().symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// `m^power` for a symmetric positive semi-definite matrix.
///
/// Eigenvalues below `1e-12 · λ_max` are floored to that value so that
/// whitening never amplifies numerically-null directions without bound.
pub fn sym_power<T: Real>(m: &DMatrix<T>, power: T) -> Result<DMatrix<T>> {
    let (values, vectors) = sym_eigen(m);
    let top = values.iter().fold(T::zero(), |a, &b| a.max(b));
    if top <= T::zero() {
        return Err(Error::Singular("matrix has no positive eigenvalue".into()));
    }
    let floor = top * T::of(1e-12);
    let scaled = DVector::from_iterator(values.len(), values.iter().map(|&v| v.max(floor).powf(power)));
    Ok(&vectors * DMatrix::from_diagonal(&scaled) * vectors.transpose())
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn sym_op_norm<T: Real>(m: &DMatrix<T>) -> T {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(T::zero(), |a, &b| a.max(b.abs()))
}

/// Spectral norm of a general matrix.
pub fn spectral_norm<T: Real>(m: &DMatrix<T>) -> T {
    m.clone()
        .singular_values()
        .iter()
        .fold(T::zero(), |a, &b| a.max(b))
}

/// Largest and smallest singular values.
pub fn singular_extremes<T: Real>(m: &DMatrix<T>) -> (T, T) {
    let sv = m.clone().singular_values();
    let hi = sv.iter().fold(T::zero(), |a, &b| a.max(b));
    let lo = sv.iter().fold(T::infinity(), |a, &b| a.min(b));
    (hi, lo)
}

/// True when `t = c·U` for an orthogonal `U` and scalar `c > 0`; returns `c`.
pub fn conformal_factor<T: Real>(t: &DMatrix<T>) -> Option<T> {
    let n = t.nrows();
    let gram = t.transpose() * t;
    let c2 = gram.trace() / T::of_usize(n);
    if c2 <= T::zero() {
        return None;
    }
    let tol = T::of(1e-12).max(T::default_epsilon() * T::of(256.0)) * c2;
    let dev = (gram - DMatrix::identity(n, n) * c2).abs().max();
    (dev <= tol).then(|| c2.sqrt())
}

/// Cayley transform `(I − A/2)⁻¹ (I + A/2)` of a skew-symmetric `A`.
pub fn cayley<T: Real>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = a.nrows();
    let half = a * T::of(0.5);
    let id = DMatrix::<T>::identity(n, n);
    let lhs = &id - &half;
    let inv = lhs
        .try_inverse()
        .ok_or_else(|| Error::Singular("Cayley denominator".into()))?;
    Ok(inv * (id + half))
}

/// Orthogonal projector onto the column span of an orthonormal `basis`.
pub fn projector<T: Real>(basis: &DMatrix<T>) -> DMatrix<T> {
    basis * basis.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal_factor_has_positive_r_diagonal() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -3.0, 0.5, 0.25, -1.0]);
        let q = orthonormal_factor(a.clone());
        let r = q.transpose() * &a;
        assert!(r[(0, 0)] > 0.0 && r[(1, 1)] > 0.0);
        let gram = q.transpose() * &q;
        assert!((gram - DMatrix::identity(2, 2)).abs().max() < 1e-14);
    }

    #[test]
    fn sym_power_inverts_sqrt() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let s = sym_power(&m, 0.5).unwrap();
        assert!((&s * &s - &m).abs().max() < 1e-12);
        let si = sym_power(&m, -0.5).unwrap();
        assert!((&si * &s - DMatrix::identity(2, 2)).abs().max() < 1e-12);
    }

    #[test]
    fn cayley_of_skew_is_orthogonal() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 0.3, -0.2, -0.3, 0.0, 0.1, 0.2, -0.1, 0.0]);
        let q = cayley(&a).unwrap();
        assert!((q.transpose() * &q - DMatrix::identity(3, 3)).abs().max() < 1e-14);
    }

    #[test]
    fn conformal_factor_detects_scaled_rotations() {
        let r = DMatrix::<f64>::from_row_slice(2, 2, &[0.6, -0.8, 0.8, 0.6]) * 3.0;
        assert!((conformal_factor(&r).unwrap() - 3.0).abs() < 1e-14);
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        assert!(conformal_factor(&s).is_none());
    }
}
