use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// A point of the unit sphere `S^{n-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction<T: Real>(DVector<T>);

impl<T: Real> Direction<T> {
    /// Wraps `v`, which must have Euclidean norm 1 within `1e-12`.
    pub fn new(v: DVector<T>) -> Result<Self> {
        let norm = v.norm();
        if (norm - T::one()).abs() > T::unit_tolerance() {
            return Err(Error::NonUnitDirection { norm: norm.as_f64() });
        }
        Ok(Direction(v))
    }

    /// Normalizes a non-zero vector.
    pub fn normalize(v: DVector<T>) -> Result<Self> {
        let norm = v.norm();
        if norm <= T::zero() || !norm.is_finite() {
            return Err(Error::invalid("cannot normalize a zero vector"));
        }
        Ok(Direction(v / norm))
    }

    pub fn axis(n: usize, i: usize) -> Self {
        let mut v = DVector::zeros(n);
        v[i] = T::one();
        Direction(v)
    }

    pub(crate) fn new_unchecked(v: DVector<T>) -> Self {
        Direction(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &DVector<T> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<T> {
        self.0
    }
}

/// An `m`-dimensional linear subspace of `R^n`, stored as an `n×m` matrix with
/// orthonormal columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace<T: Real> {
    basis: DMatrix<T>,
}

impl<T: Real> Subspace<T> {
    /// Accepts a basis whose columns are orthonormal within `1e-10`.
    pub fn from_orthonormal(basis: DMatrix<T>) -> Result<Self> {
        let (n, m) = basis.shape();
        if m == 0 || m > n {
            return Err(Error::invalid(format!("subspace dimension {m} outside 1..={n}")));
        }
        let tol = T::of(1e-10).max(T::default_epsilon() * T::of(256.0));
        let gram = basis.transpose() * &basis;
        if (gram - DMatrix::identity(m, m)).abs().max() > tol {
            return Err(Error::invalid("subspace basis is not orthonormal"));
        }
        Ok(Subspace { basis })
    }

    /// Orthonormalizes the columns of `spanning` (which must be independent).
    pub fn span(spanning: DMatrix<T>) -> Result<Self> {
        let (n, m) = spanning.shape();
        if m == 0 || m > n {
            return Err(Error::invalid(format!("subspace dimension {m} outside 1..={n}")));
        }
        let q = linalg::orthonormal_factor(spanning.clone());
        let r = q.transpose() * &spanning;
        let scale = spanning.abs().max();
        for j in 0..m {
            if r[(j, j)].abs() <= T::of(1e-12) * scale {
                return Err(Error::invalid("spanning vectors are linearly dependent"));
            }
        }
        Subspace::from_orthonormal(q)
    }

    /// The whole space `R^n`.
    pub fn full(n: usize) -> Self {
        Subspace { basis: DMatrix::identity(n, n) }
    }

    /// `span{e_i : i ∈ axes}`.
    pub fn coordinate(n: usize, axes: &[usize]) -> Result<Self> {
        let mut basis = DMatrix::zeros(n, axes.len());
        for (j, &i) in axes.iter().enumerate() {
            if i >= n {
                return Err(Error::invalid(format!("axis {i} out of range for R^{n}")));
            }
            basis[(i, j)] = T::one();
        }
        Subspace::from_orthonormal(basis)
    }

    /// The hyperplane `ξ^⊥`.
    pub fn hyperplane(normal: &Direction<T>) -> Result<Self> {
        let n = normal.dim();
        if n < 2 {
            return Err(Error::invalid("hyperplane needs n ≥ 2"));
        }
        let line = Subspace { basis: DMatrix::from_column_slice(n, 1, normal.as_vector().as_slice()) };
        line.complement()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<T> {
        &self.basis
    }

    pub fn projector(&self) -> DMatrix<T> {
        linalg::projector(&self.basis)
    }

    /// Maps intrinsic coordinates `y ∈ R^m` to the ambient point `B y`.
    pub fn embed(&self, y: &DVector<T>) -> DVector<T> {
        &self.basis * y
    }

    /// Orthonormal basis of `E^⊥`.
    pub fn complement(&self) -> Result<Self> {
        let (n, m) = self.basis.shape();
        if m >= n {
            return Err(Error::invalid("the complement of the whole space is trivial"));
        }
        let mut aug = DMatrix::zeros(n, m + n);
        aug.columns_mut(0, m).copy_from(&self.basis);
        aug.columns_mut(m, n).fill_with_identity();
        let q = aug.qr().q();
        let perp = q.columns(m, n - m).into_owned();
        Ok(Subspace { basis: perp })
    }

    /// `E ∩ ξ^⊥` for a unit `ξ` lying in `E`.
    pub fn without(&self, xi: &Direction<T>) -> Result<Self> {
        Error::check_dim(self.ambient_dim(), xi.dim())?;
        if self.dim() < 2 {
            return Err(Error::invalid("cannot remove a direction from a line"));
        }
        let coords = self.basis.transpose() * xi.as_vector();
        let tol = T::of(1e-9);
        if (coords.norm() - T::one()).abs() > tol {
            return Err(Error::invalid("direction does not lie in the subspace"));
        }
        let line = Subspace { basis: DMatrix::from_column_slice(self.dim(), 1, coords.as_slice()) };
        let rest = line.complement()?;
        Ok(Subspace { basis: &self.basis * rest.basis })
    }

    /// Spectral distance `‖P_E − P_F‖`, the sine of the largest principal angle.
    pub fn distance(&self, other: &Subspace<T>) -> T {
        linalg::spectral_norm(&(self.projector() - other.projector()))
    }

    /// Whether this subspace is spanned by a subset of the standard basis.
    pub fn coordinate_axes(&self) -> Option<Vec<usize>> {
        let p = self.projector();
        let n = p.nrows();
        let tol = T::of(1e-10);
        let mut axes = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = p[(i, j)];
                let target = if i == j && v > T::of(0.5) { T::one() } else { T::zero() };
                if (v - target).abs() > tol {
                    return None;
                }
            }
            if p[(i, i)] > T::of(0.5) {
                axes.push(i);
            }
        }
        Some(axes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_rejects_non_unit() {
        assert!(Direction::new(DVector::from_vec(vec![1.0, 1.0])).is_err());
        assert!(Direction::new(DVector::from_vec(vec![0.6, 0.8])).is_ok());
    }

    #[test]
    fn complement_of_axis() {
        let e1 = Subspace::<f64>::coordinate(3, &[0]).unwrap();
        let c = e1.complement().unwrap();
        assert_eq!(c.dim(), 2);
        assert!((e1.basis().transpose() * c.basis()).abs().max() < 1e-12);
        let want = Subspace::coordinate(3, &[1, 2]).unwrap();
        assert!(c.distance(&want) < 1e-12);
        assert!(c.complement().unwrap().distance(&e1) < 1e-9);
    }

    #[test]
    fn coordinate_detection_ignores_rotation_within_plane() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let b = DMatrix::from_row_slice(3, 2, &[s, s, -s, s, 0.0, 0.0]);
        let e = Subspace::from_orthonormal(b).unwrap();
        assert_eq!(e.coordinate_axes(), Some(vec![0, 1]));
        let h = Subspace::hyperplane(&Direction::normalize(DVector::from_vec(vec![1.0, 1.0, 0.0])).unwrap()).unwrap();
        assert_eq!(h.coordinate_axes(), None);
    }

    #[test]
    fn without_removes_direction() {
        let e = Subspace::<f64>::full(4);
        let xi = Direction::axis(4, 2);
        let f = e.without(&xi).unwrap();
        assert_eq!(f.dim(), 3);
        assert!((f.basis().transpose() * xi.as_vector()).norm() < 1e-12);
    }
}
