//! Star and convex bodies described by exact oracles.
//!
//! A [`Body`] is an immutable, cheaply clonable descriptor. Derived bodies
//! (linear images, sections, radial sums, translates) hold references to
//! their components, so oracle composition is exact and no discretization
//! error accumulates.

mod desc;
mod subspace;

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};

pub use desc::{BodyDesc, Facet, PValue};
pub use subspace::{Direction, Subspace};

use crate::error::{Error, Result};
use crate::linalg;
use crate::sampling::{self, RngStream};
use crate::scalar::Real;

/// Number of random starts used by the numerical extremal-radius search.
pub const RADIUS_SEARCH_STARTS: usize = 10_000;
const RADIUS_SEARCH_REFINED: usize = 16;
const RADIUS_SEARCH_STEPS: usize = 400;
const RADIUS_SEARCH_SEED: u64 = 0x7261_6469_7573;

const BISECTION_MAX_ITERS: usize = 200;
const BISECTION_REL_TOL: f64 = 1e-12;

/// A geometric quantity together with whether it came from a closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measured<T> {
    pub value: T,
    /// `false` when the value is a numerical (sampled) approximation.
    pub exact: bool,
}

impl<T> Measured<T> {
    pub fn exact(value: T) -> Self {
        Measured { value, exact: true }
    }

    pub fn numerical(value: T) -> Self {
        Measured { value, exact: false }
    }
}

#[derive(Debug)]
pub struct Ellipsoid<T: Real> {
    matrix: DMatrix<T>,
    inverse: DMatrix<T>,
}

impl<T: Real> Ellipsoid<T> {
    /// The quadratic form `M` with `K = {x : xᵀMx ≤ 1}`.
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }
}

/// Regular simplex with unit circumradius and barycenter at the origin.
///
/// Vertices are the standard basis of `R^{n+1}`, centered and expressed in
/// the Helmert orthonormal basis of the hyperplane `Σxᵢ = 0`, then scaled to
/// unit length. Facet `i` is `{x : ⟨−vᵢ, x⟩ ≤ 1/n}`.
#[derive(Debug)]
pub struct Simplex<T: Real> {
    dim: usize,
    vertices: Vec<DVector<T>>,
}

impl<T: Real> Simplex<T> {
    fn new(n: usize) -> Self {
        let scale = ((n as f64 + 1.0) / n as f64).sqrt();
        let mut vertices = vec![DVector::zeros(n); n + 1];
        // Helmert basis u_k = (1,…,1,−k,0,…)/√(k(k+1)), k = 1..n.
        for k in 1..=n {
            let norm = ((k * (k + 1)) as f64).sqrt();
            for (i, v) in vertices.iter_mut().enumerate() {
                let coord = if i < k {
                    1.0
                } else if i == k {
                    -(k as f64)
                } else {
                    0.0
                };
                v[k - 1] = T::of(scale * coord / norm);
            }
        }
        Simplex { dim: n, vertices }
    }

    pub fn vertices(&self) -> &[DVector<T>] {
        &self.vertices
    }
}

#[derive(Debug)]
pub struct HPolytope<T: Real> {
    dim: usize,
    normals: Vec<DVector<T>>,
    offsets: Vec<T>,
}

impl<T: Real> HPolytope<T> {
    pub fn facets(&self) -> impl Iterator<Item = (&DVector<T>, T)> {
        self.normals.iter().zip(self.offsets.iter().copied())
    }
}

#[derive(Debug)]
pub struct LinearImage<T: Real> {
    map: DMatrix<T>,
    inverse: DMatrix<T>,
    det: T,
    inner: Body<T>,
}

impl<T: Real> LinearImage<T> {
    pub fn map(&self) -> &DMatrix<T> {
        &self.map
    }

    pub fn inverse(&self) -> &DMatrix<T> {
        &self.inverse
    }

    pub fn det(&self) -> T {
        self.det
    }

    pub fn inner(&self) -> &Body<T> {
        &self.inner
    }
}

#[derive(Debug)]
pub struct Section<T: Real> {
    inner: Body<T>,
    subspace: Subspace<T>,
}

impl<T: Real> Section<T> {
    pub fn inner(&self) -> &Body<T> {
        &self.inner
    }

    pub fn subspace(&self) -> &Subspace<T> {
        &self.subspace
    }
}

#[derive(Debug)]
pub struct Translate<T: Real> {
    inner: Body<T>,
    shift: DVector<T>,
}

impl<T: Real> Translate<T> {
    pub fn inner(&self) -> &Body<T> {
        &self.inner
    }

    pub fn shift(&self) -> &DVector<T> {
        &self.shift
    }
}

/// The variant data of a [`Body`].
#[derive(Debug)]
pub enum Shape<T: Real> {
    Ball { dim: usize, radius: T },
    Ellipsoid(Ellipsoid<T>),
    /// Centered cube `[-h, h]^n`.
    Cube { dim: usize, half_side: T },
    /// `{x : Σ|xᵢ| ≤ scale}`.
    CrossPolytope { dim: usize, scale: T },
    RegularSimplex(Simplex<T>),
    /// `{x : ‖x‖_p ≤ scale}`; `p` may be infinite.
    LpBall { dim: usize, p: T, scale: T },
    HPolytope(HPolytope<T>),
    LinearImage(LinearImage<T>),
    /// `K ∩ E` in the intrinsic coordinates of `E`'s basis.
    Section(Section<T>),
    RadialSum(Body<T>, Body<T>),
    /// `K + v`; the origin must stay interior.
    Translate(Translate<T>),
}

#[derive(Debug)]
struct BodyInner<T: Real> {
    shape: Shape<T>,
    circumradius: OnceLock<Measured<T>>,
    inradius: OnceLock<Measured<T>>,
}

/// A star body about the origin, given by exact oracles.
#[derive(Clone, Debug)]
pub struct Body<T: Real> {
    inner: Arc<BodyInner<T>>,
}

fn positive<T: Real>(name: &str, x: T) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {}", x.as_f64())))
    }
}

fn valid_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::invalid("dimension must be at least 1"))
    } else {
        Ok(())
    }
}

fn lp_norm<T: Real>(v: &DVector<T>, p: T) -> T {
    if !p.is_finite() {
        v.amax()
    } else if p == T::one() {
        v.iter().fold(T::zero(), |a, &x| a + x.abs())
    } else if p == T::of(2.0) {
        v.norm()
    } else {
        let m = v.amax();
        if m == T::zero() {
            return T::zero();
        }
        // Scaling by the max entry keeps large p from overflowing.
        let s = v.iter().fold(T::zero(), |a, &x| a + (x.abs() / m).powf(p));
        m * s.powf(T::one() / p)
    }
}

fn conjugate_exponent<T: Real>(p: T) -> T {
    if !p.is_finite() {
        T::one()
    } else if p == T::one() {
        T::infinity()
    } else {
        p / (p - T::one())
    }
}

impl<T: Real> Body<T> {
    fn from_shape(shape: Shape<T>) -> Self {
        Body {
            inner: Arc::new(BodyInner { shape, circumradius: OnceLock::new(), inradius: OnceLock::new() }),
        }
    }

    pub fn ball(dim: usize, radius: T) -> Result<Self> {
        valid_dim(dim)?;
        positive("radius", radius)?;
        Ok(Self::from_shape(Shape::Ball { dim, radius }))
    }

    /// `{x : xᵀMx ≤ 1}` for symmetric positive-definite `M`.
    pub fn ellipsoid(matrix: DMatrix<T>) -> Result<Self> {
        let (n, c) = matrix.shape();
        if n != c {
            return Err(Error::invalid("ellipsoid matrix must be square"));
        }
        valid_dim(n)?;
        let scale = matrix.abs().max();
        let asym = (&matrix - matrix.transpose()).abs().max();
        if asym > T::of(1e-12).max(T::default_epsilon() * T::of(16.0)) * scale {
            return Err(Error::invalid("ellipsoid matrix must be symmetric"));
        }
        let sym = (&matrix + matrix.transpose()) * T::of(0.5);
        let (values, _) = linalg::sym_eigen(&sym);
        if !(values[0] > T::zero()) {
            return Err(Error::invalid("ellipsoid matrix must be positive definite"));
        }
        let inverse = sym
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("ellipsoid matrix".into()))?;
        Ok(Self::from_shape(Shape::Ellipsoid(Ellipsoid { matrix: sym, inverse })))
    }

    /// Axis-parallel ellipsoid with the given semi-axes.
    pub fn ellipsoid_with_axes(semi_axes: &[T]) -> Result<Self> {
        for &a in semi_axes {
            positive("semi-axis", a)?;
        }
        let diag = DVector::from_iterator(semi_axes.len(), semi_axes.iter().map(|&a| T::one() / (a * a)));
        Self::ellipsoid(DMatrix::from_diagonal(&diag))
    }

    pub fn cube(dim: usize, half_side: T) -> Result<Self> {
        valid_dim(dim)?;
        positive("half-side", half_side)?;
        Ok(Self::from_shape(Shape::Cube { dim, half_side }))
    }

    pub fn cross_polytope(dim: usize, scale: T) -> Result<Self> {
        valid_dim(dim)?;
        positive("scale", scale)?;
        Ok(Self::from_shape(Shape::CrossPolytope { dim, scale }))
    }

    pub fn regular_simplex(dim: usize) -> Result<Self> {
        valid_dim(dim)?;
        Ok(Self::from_shape(Shape::RegularSimplex(Simplex::new(dim))))
    }

    /// `p ∈ [1, ∞]`; pass `T::infinity()` for the cube norm.
    pub fn lp_ball(dim: usize, p: T, scale: T) -> Result<Self> {
        valid_dim(dim)?;
        positive("scale", scale)?;
        if !(p >= T::one()) {
            return Err(Error::invalid(format!("p must lie in [1, ∞], got {}", p.as_f64())));
        }
        Ok(Self::from_shape(Shape::LpBall { dim, p, scale }))
    }

    /// `{x : ⟨aᵢ, x⟩ ≤ bᵢ}` with every `bᵢ > 0`.
    pub fn h_polytope(facets: Vec<(DVector<T>, T)>) -> Result<Self> {
        let dim = facets.first().map(|f| f.0.len()).ok_or_else(|| Error::invalid("polytope needs facets"))?;
        valid_dim(dim)?;
        let mut normals = Vec::with_capacity(facets.len());
        let mut offsets = Vec::with_capacity(facets.len());
        for (a, b) in facets {
            Error::check_dim(dim, a.len())?;
            positive("facet offset", b)?;
            if a.norm() == T::zero() {
                return Err(Error::invalid("facet normal must be non-zero"));
            }
            normals.push(a);
            offsets.push(b);
        }
        let body = Self::from_shape(Shape::HPolytope(HPolytope { dim, normals, offsets }));
        // Boundedness probe: every tested direction must leave through a facet.
        let mut rng = RngStream::new(RADIUS_SEARCH_SEED, 1);
        let mut probes: Vec<DVector<T>> = Vec::new();
        for i in 0..dim {
            for s in [T::one(), -T::one()] {
                let mut v = DVector::zeros(dim);
                v[i] = s;
                probes.push(v);
            }
        }
        for _ in 0..256 {
            probes.push(sampling::sphere_point::<T>(dim, &mut rng).into_inner());
        }
        if probes.iter().any(|v| !body.radial_unit(v).is_finite()) {
            return Err(Error::Unbounded);
        }
        Ok(body)
    }

    /// Builds `T(K)`. The map must be square with `|det T|` non-negligible
    /// relative to its entries. The identity returns `K` itself.
    pub fn linear_image(&self, map: DMatrix<T>) -> Result<Self> {
        let n = self.dim();
        if map.shape() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, found: map.nrows() });
        }
        if map == DMatrix::identity(n, n) {
            return Ok(self.clone());
        }
        let scale = map.abs().max();
        let det = map.determinant();
        if scale == T::zero() || !(det.abs() / scale.powi(n as i32) > T::of(1e-12)) {
            return Err(Error::Singular("linear map".into()));
        }
        let inverse = map.clone().try_inverse().ok_or_else(|| Error::Singular("linear map".into()))?;
        Ok(Self::from_shape(Shape::LinearImage(LinearImage { map, inverse, det, inner: self.clone() })))
    }

    /// `λK` for `λ > 0`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        positive("scale factor", factor)?;
        let n = self.dim();
        self.linear_image(DMatrix::identity(n, n) * factor)
    }

    /// `K ∩ E` as an `m`-dimensional body in the coordinates of `E`'s basis.
    pub fn section(&self, subspace: &Subspace<T>) -> Result<Self> {
        Error::check_dim(self.dim(), subspace.ambient_dim())?;
        if let Shape::Section(s) = self.shape() {
            let composed = Subspace::from_orthonormal(s.subspace.basis() * subspace.basis())?;
            return s.inner.section(&composed);
        }
        Ok(Self::from_shape(Shape::Section(Section { inner: self.clone(), subspace: subspace.clone() })))
    }

    /// Radial sum `K +̃ D`, with `ρ = ρ_K + ρ_D`.
    pub fn radial_sum(&self, other: &Body<T>) -> Result<Self> {
        Error::check_dim(self.dim(), other.dim())?;
        Ok(Self::from_shape(Shape::RadialSum(self.clone(), other.clone())))
    }

    /// `K + v`. Fails if the origin would leave the body.
    pub fn translate(&self, shift: DVector<T>) -> Result<Self> {
        Error::check_dim(self.dim(), shift.len())?;
        let back = -&shift * (T::one() + T::of(1e-9));
        if !self.contains_unchecked(&back) {
            return Err(Error::invalid("translation moves the origin outside the body"));
        }
        Ok(Self::from_shape(Shape::Translate(Translate { inner: self.clone(), shift })))
    }

    pub fn shape(&self) -> &Shape<T> {
        &self.inner.shape
    }

    pub fn dim(&self) -> usize {
        match self.shape() {
            Shape::Ball { dim, .. }
            | Shape::Cube { dim, .. }
            | Shape::CrossPolytope { dim, .. }
            | Shape::LpBall { dim, .. } => *dim,
            Shape::Ellipsoid(e) => e.matrix.nrows(),
            Shape::RegularSimplex(s) => s.dim,
            Shape::HPolytope(h) => h.dim,
            Shape::LinearImage(l) => l.map.nrows(),
            Shape::Section(s) => s.subspace.dim(),
            Shape::RadialSum(a, _) => a.dim(),
            Shape::Translate(t) => t.shift.len(),
        }
    }

    /// Membership of the closed body.
    pub fn contains(&self, x: &DVector<T>) -> Result<bool> {
        Error::check_dim(self.dim(), x.len())?;
        Ok(self.contains_unchecked(x))
    }

    pub(crate) fn contains_unchecked(&self, x: &DVector<T>) -> bool {
        match self.shape() {
            Shape::Ball { radius, .. } => x.norm() <= *radius,
            Shape::Ellipsoid(e) => (x.transpose() * &e.matrix * x)[(0, 0)] <= T::one(),
            Shape::Cube { half_side, .. } => x.amax() <= *half_side,
            Shape::CrossPolytope { scale, .. } => x.iter().fold(T::zero(), |a, &v| a + v.abs()) <= *scale,
            Shape::LpBall { p, scale, .. } => lp_norm(x, *p) <= *scale,
            Shape::RegularSimplex(s) => {
                let bound = T::one() / T::of_usize(s.dim);
                s.vertices.iter().all(|v| -v.dot(x) <= bound)
            }
            Shape::HPolytope(h) => h.facets().all(|(a, b)| a.dot(x) <= b),
            Shape::LinearImage(l) => l.inner.contains_unchecked(&(&l.inverse * x)),
            Shape::Section(s) => s.inner.contains_unchecked(&s.subspace.embed(x)),
            Shape::RadialSum(..) => {
                let r = x.norm();
                r == T::zero() || r <= self.radial_unit(&(x / r))
            }
            Shape::Translate(t) => t.inner.contains_unchecked(&(x - &t.shift)),
        }
    }

    /// Radial function `ρ_K(θ) = max{λ > 0 : λθ ∈ K}`.
    pub fn radial(&self, theta: &Direction<T>) -> Result<T> {
        Error::check_dim(self.dim(), theta.dim())?;
        let r = self.radial_unit(theta.as_vector());
        if r.is_finite() {
            Ok(r)
        } else {
            Err(Error::Unbounded)
        }
    }

    /// Radial function at a vector assumed to be a unit vector of the right
    /// dimension. Returns infinity for unbounded polytopes.
    pub(crate) fn radial_unit(&self, theta: &DVector<T>) -> T {
        match self.shape() {
            Shape::Ball { radius, .. } => *radius,
            Shape::Ellipsoid(e) => {
                let q = (theta.transpose() * &e.matrix * theta)[(0, 0)];
                T::one() / q.sqrt()
            }
            Shape::Cube { half_side, .. } => *half_side / theta.amax(),
            Shape::CrossPolytope { scale, .. } => *scale / theta.iter().fold(T::zero(), |a, &v| a + v.abs()),
            Shape::LpBall { p, scale, .. } => *scale / lp_norm(theta, *p),
            Shape::RegularSimplex(s) => {
                let bound = T::one() / T::of_usize(s.dim);
                s.vertices.iter().fold(T::infinity(), |acc, v| {
                    let d = -v.dot(theta);
                    if d > T::zero() {
                        acc.min(bound / d)
                    } else {
                        acc
                    }
                })
            }
            Shape::HPolytope(h) => h.facets().fold(T::infinity(), |acc, (a, b)| {
                let d = a.dot(theta);
                if d > T::zero() {
                    acc.min(b / d)
                } else {
                    acc
                }
            }),
            Shape::LinearImage(l) => {
                let u = &l.inverse * theta;
                let s = u.norm();
                l.inner.radial_unit(&(u / s)) / s
            }
            Shape::Section(s) => s.inner.radial_unit(&s.subspace.embed(theta)),
            Shape::RadialSum(a, b) => a.radial_unit(theta) + b.radial_unit(theta),
            Shape::Translate(_) => self.radial_by_bisection(theta),
        }
    }

    /// Radial function from the membership oracle alone: bisection with
    /// relative tolerance `1e-12` and at most 200 iterations.
    pub fn radial_by_bisection(&self, theta: &DVector<T>) -> T {
        let mut lo = T::zero();
        let mut hi = T::one();
        let mut grow = 0;
        while self.contains_unchecked(&(theta * hi)) {
            lo = hi;
            hi *= T::of(2.0);
            grow += 1;
            if grow > 1100 {
                return T::infinity();
            }
        }
        let tol = T::of(BISECTION_REL_TOL).max(T::default_epsilon() * T::of(4.0));
        for _ in 0..BISECTION_MAX_ITERS {
            if hi - lo <= tol * hi {
                break;
            }
            let mid = (lo + hi) * T::of(0.5);
            if self.contains_unchecked(&(theta * mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Support function `h_K(θ) = max{⟨x, θ⟩ : x ∈ K}` for convex variants.
    pub fn support(&self, theta: &Direction<T>) -> Result<T> {
        Error::check_dim(self.dim(), theta.dim())?;
        self.support_unit(theta.as_vector())
    }

    pub(crate) fn support_unit(&self, theta: &DVector<T>) -> Result<T> {
        match self.shape() {
            Shape::Ball { radius, .. } => Ok(*radius),
            Shape::Ellipsoid(e) => Ok((theta.transpose() * &e.inverse * theta)[(0, 0)].sqrt()),
            Shape::Cube { half_side, .. } => Ok(*half_side * theta.iter().fold(T::zero(), |a, &v| a + v.abs())),
            Shape::CrossPolytope { scale, .. } => Ok(*scale * theta.amax()),
            Shape::LpBall { p, scale, .. } => Ok(*scale * lp_norm(theta, conjugate_exponent(*p))),
            Shape::RegularSimplex(s) => {
                Ok(s.vertices.iter().fold(-T::infinity(), |acc, v| acc.max(v.dot(theta))))
            }
            Shape::HPolytope(_) => Err(Error::Unsupported("support function of an H-polytope needs an LP solver".into())),
            Shape::LinearImage(l) => {
                let u = l.map.transpose() * theta;
                let s = u.norm();
                Ok(l.inner.support_unit(&(u / s))? * s)
            }
            Shape::Section(_) => Err(Error::Unsupported("support function of a section".into())),
            Shape::RadialSum(..) => Err(Error::Unsupported("support function of a radial sum".into())),
            Shape::Translate(t) => Ok(t.inner.support_unit(theta)? + t.shift.dot(theta)),
        }
    }

    /// Whether a support oracle is available.
    pub fn has_support(&self) -> bool {
        match self.shape() {
            Shape::HPolytope(_) | Shape::Section(_) | Shape::RadialSum(..) => false,
            Shape::LinearImage(l) => l.inner.has_support(),
            Shape::Translate(t) => t.inner.has_support(),
            _ => true,
        }
    }

    /// Vertex list, for polytopes that know it.
    pub fn vertices(&self) -> Option<Vec<DVector<T>>> {
        match self.shape() {
            Shape::Cube { dim, half_side } => {
                if *dim > 16 {
                    return None;
                }
                Some(
                    (0..1usize << dim)
                        .map(|mask| {
                            DVector::from_iterator(
                                *dim,
                                (0..*dim).map(|i| if mask >> i & 1 == 1 { *half_side } else { -*half_side }),
                            )
                        })
                        .collect(),
                )
            }
            Shape::CrossPolytope { dim, scale } => Some(
                (0..2 * dim)
                    .map(|k| {
                        let mut v = DVector::zeros(*dim);
                        v[k / 2] = if k % 2 == 0 { *scale } else { -*scale };
                        v
                    })
                    .collect(),
            ),
            Shape::RegularSimplex(s) => Some(s.vertices.clone()),
            Shape::LinearImage(l) => l.inner.vertices().map(|vs| vs.iter().map(|v| &l.map * v).collect()),
            Shape::Translate(t) => t.inner.vertices().map(|vs| vs.iter().map(|v| v + &t.shift).collect()),
            _ => None,
        }
    }

    /// Facet list `(a, b)` with `K = {⟨a, x⟩ ≤ b}`, for polytopes that know it.
    pub fn facets(&self) -> Option<Vec<(DVector<T>, T)>> {
        match self.shape() {
            Shape::Cube { dim, half_side } => Some(
                (0..2 * dim)
                    .map(|k| {
                        let mut a = DVector::zeros(*dim);
                        a[k / 2] = if k % 2 == 0 { T::one() } else { -T::one() };
                        (a, *half_side)
                    })
                    .collect(),
            ),
            Shape::CrossPolytope { dim, scale } => {
                if *dim > 16 {
                    return None;
                }
                Some(
                    (0..1usize << dim)
                        .map(|mask| {
                            let a = DVector::from_iterator(
                                *dim,
                                (0..*dim).map(|i| if mask >> i & 1 == 1 { T::one() } else { -T::one() }),
                            );
                            (a, *scale)
                        })
                        .collect(),
                )
            }
            Shape::RegularSimplex(s) => {
                let bound = T::one() / T::of_usize(s.dim);
                Some(s.vertices.iter().map(|v| (-v, bound)).collect())
            }
            Shape::HPolytope(h) => Some(h.facets().map(|(a, b)| (a.clone(), b)).collect()),
            Shape::LinearImage(l) => {
                let inv_t = l.inverse.transpose();
                l.inner.facets().map(|fs| fs.into_iter().map(|(a, b)| (&inv_t * a, b)).collect())
            }
            Shape::Translate(t) => t
                .inner
                .facets()
                .map(|fs| fs.into_iter().map(|(a, b)| { let shift = a.dot(&t.shift); (a, b + shift) }).collect()),
            _ => None,
        }
    }

    /// The matrix `M` when the body is an origin-centered ellipsoid
    /// `{xᵀMx ≤ 1}` (balls, ellipsoids, and their linear images and sections).
    pub fn ellipsoid_matrix(&self) -> Option<DMatrix<T>> {
        match self.shape() {
            Shape::Ball { dim, radius } => Some(DMatrix::identity(*dim, *dim) / (*radius * *radius)),
            Shape::Ellipsoid(e) => Some(e.matrix.clone()),
            Shape::LinearImage(l) => {
                let m = l.inner.ellipsoid_matrix()?;
                Some(l.inverse.transpose() * m * &l.inverse)
            }
            Shape::Section(s) => {
                let m = s.inner.ellipsoid_matrix()?;
                let b = s.subspace.basis();
                Some(b.transpose() * m * b)
            }
            _ => None,
        }
    }

    /// `Some(r)` when the radial function is identically `r`.
    pub fn ball_radius(&self) -> Option<T> {
        match self.shape() {
            Shape::Ball { radius, .. } => Some(*radius),
            Shape::Section(s) => s.inner.ball_radius(),
            Shape::LinearImage(l) => Some(l.inner.ball_radius()? * linalg::conformal_factor(&l.map)?),
            Shape::RadialSum(a, b) => Some(a.ball_radius()? + b.ball_radius()?),
            _ => None,
        }
    }

    /// For a coordinate section of a canonical body, the equivalent canonical
    /// body of the section's dimension (equal up to a rotation of `E`).
    pub fn canonical_section(&self) -> Option<Body<T>> {
        let Shape::Section(s) = self.shape() else {
            return None;
        };
        let m = s.subspace.dim();
        let _axes = s.subspace.coordinate_axes()?;
        match s.inner.shape() {
            Shape::Ball { radius, .. } => Body::ball(m, *radius).ok(),
            Shape::Cube { half_side, .. } => Body::cube(m, *half_side).ok(),
            Shape::CrossPolytope { scale, .. } => Body::cross_polytope(m, *scale).ok(),
            Shape::LpBall { p, scale, .. } => Body::lp_ball(m, *p, *scale).ok(),
            _ => None,
        }
    }

    /// `K = −K`, decided structurally.
    pub fn is_origin_symmetric(&self) -> bool {
        match self.shape() {
            Shape::Ball { .. }
            | Shape::Ellipsoid(_)
            | Shape::Cube { .. }
            | Shape::CrossPolytope { .. }
            | Shape::LpBall { .. } => true,
            Shape::RegularSimplex(s) => s.dim == 1,
            Shape::HPolytope(h) => {
                let tol = T::of(1e-12);
                h.facets().all(|(a, b)| {
                    h.facets().any(|(c, d)| ((a + c).amax() <= tol * a.amax()) && (b - d).abs() <= tol * b)
                })
            }
            Shape::LinearImage(l) => l.inner.is_origin_symmetric(),
            Shape::Section(s) => s.inner.is_origin_symmetric(),
            Shape::RadialSum(a, b) => a.is_origin_symmetric() && b.is_origin_symmetric(),
            Shape::Translate(t) => t.shift.amax() == T::zero() && t.inner.is_origin_symmetric(),
        }
    }

    /// Convexity decided structurally; radial sums count as convex only when
    /// both summands are balls.
    pub fn is_convex(&self) -> bool {
        match self.shape() {
            Shape::LpBall { p, .. } => *p >= T::one(),
            Shape::LinearImage(l) => l.inner.is_convex(),
            Shape::Section(s) => s.inner.is_convex(),
            Shape::Translate(t) => t.inner.is_convex(),
            Shape::RadialSum(a, b) => a.ball_radius().is_some() && b.ball_radius().is_some(),
            _ => true,
        }
    }

    /// Circumradius `R(K)`: the smallest `R` with `K ⊆ R·B`.
    pub fn circumradius(&self) -> Measured<T> {
        *self.inner.circumradius.get_or_init(|| self.compute_radius(true))
    }

    /// Inradius about the origin: the largest `r` with `r·B ⊆ K`.
    pub fn inradius(&self) -> Measured<T> {
        *self.inner.inradius.get_or_init(|| self.compute_radius(false))
    }

    fn compute_radius(&self, outer: bool) -> Measured<T> {
        let n = self.dim();
        let nf = T::of_usize(n);
        let pick = |a: T, b: T| if outer { a } else { b };
        match self.shape() {
            Shape::Ball { radius, .. } => return Measured::exact(*radius),
            Shape::Cube { half_side, .. } => return Measured::exact(pick(*half_side * nf.sqrt(), *half_side)),
            Shape::CrossPolytope { scale, .. } => return Measured::exact(pick(*scale, *scale / nf.sqrt())),
            Shape::LpBall { p, scale, .. } => {
                // ρ(θ) = s/‖θ‖_p ranges between s and s·n^{1/2 − 1/p}.
                let expo = T::of(0.5) - if p.is_finite() { T::one() / *p } else { T::zero() };
                let other = *scale * nf.powf(expo);
                let (hi, lo) = if other > *scale { (other, *scale) } else { (*scale, other) };
                return Measured::exact(pick(hi, lo));
            }
            Shape::RegularSimplex(s) => return Measured::exact(pick(T::one(), T::one() / T::of_usize(s.dim))),
            Shape::LinearImage(l) => {
                if let Some(c) = linalg::conformal_factor(&l.map) {
                    let inner = if outer { l.inner.circumradius() } else { l.inner.inradius() };
                    return Measured { value: inner.value * c, exact: inner.exact };
                }
            }
            Shape::RadialSum(a, b) => {
                if let (Some(x), Some(y)) = (a.ball_radius(), b.ball_radius()) {
                    return Measured::exact(x + y);
                }
            }
            _ => {}
        }
        if let Some(m) = self.ellipsoid_matrix() {
            let (values, _) = linalg::sym_eigen(&m);
            let lam = if outer { values[0] } else { values[values.len() - 1] };
            return Measured::exact(T::one() / lam.sqrt());
        }
        if let Some(c) = self.canonical_section() {
            return if outer { c.circumradius() } else { c.inradius() };
        }
        if outer {
            if let Some(vs) = self.vertices() {
                return Measured::exact(vs.iter().fold(T::zero(), |a, v| a.max(v.norm())));
            }
        } else if let Some(fs) = self.facets() {
            return Measured::exact(fs.iter().fold(T::infinity(), |a, (n, b)| a.min(*b / n.norm())));
        }
        let mut rng = RngStream::new(RADIUS_SEARCH_SEED, 0);
        let value = extreme_radial(self, outer, RADIUS_SEARCH_STARTS, &mut rng);
        Measured::numerical(value)
    }

    /// Sampled approximation of the radial metric
    /// `d_r(K, D) = sup_ξ |ρ_K(ξ) − ρ_D(ξ)|`; a lower bound on the true value.
    pub fn radial_distance(&self, other: &Body<T>, samples: usize, rng: &mut RngStream) -> Result<Measured<T>> {
        Error::check_dim(self.dim(), other.dim())?;
        if samples == 0 {
            return Err(Error::invalid("radial distance needs at least one sample"));
        }
        let gap = |u: &DVector<T>| (self.radial_unit(u) - other.radial_unit(u)).abs();
        let value = maximize_on_sphere(self.dim(), samples, rng, gap);
        Ok(Measured::numerical(value))
    }
}

/// Maximum (or minimum) of the radial function by random starts plus local
/// ascent. Always returns an attained value, i.e. a bound from the inside.
fn extreme_radial<T: Real>(body: &Body<T>, outer: bool, starts: usize, rng: &mut RngStream) -> T {
    let sign = if outer { T::one() } else { -T::one() };
    let best = maximize_on_sphere(body.dim(), starts, rng, |u| sign * body.radial_unit(u));
    best * sign
}

pub(crate) fn maximize_on_sphere<T: Real, F>(n: usize, starts: usize, rng: &mut RngStream, f: F) -> T
where
    F: Fn(&DVector<T>) -> T,
{
    let mut scored: Vec<(T, DVector<T>)> = Vec::with_capacity(starts + 4 * n);
    for i in 0..n {
        for s in [T::one(), -T::one()] {
            let mut v = DVector::zeros(n);
            v[i] = s;
            scored.push((f(&v), v));
        }
    }
    for _ in 0..starts {
        let u = sampling::sphere_point::<T>(n, rng).into_inner();
        scored.push((f(&u), u));
    }
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    scored.truncate(RADIUS_SEARCH_REFINED);
    let mut best = scored[0].0;
    for (mut value, mut u) in scored {
        let mut step = T::of(0.1);
        for _ in 0..RADIUS_SEARCH_STEPS {
            let g = sampling::gaussian_vector::<T>(n, rng);
            let cand = &u + g * step;
            let cand = &cand / cand.norm();
            let v = f(&cand);
            if v > value {
                value = v;
                u = cand;
                step *= T::of(1.5);
            } else {
                step *= T::of(0.8);
            }
            if step < T::of(1e-12) {
                break;
            }
        }
        best = best.max(value);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_vec(x.to_vec())
    }

    fn dir(x: &[f64]) -> Direction<f64> {
        Direction::normalize(v(x)).unwrap()
    }

    #[test]
    fn contains_examples() {
        let cube = Body::cube(3, 0.5).unwrap();
        assert!(cube.contains(&v(&[0.4, 0.0, 0.0])).unwrap());
        let ball = Body::ball(3, 1.0).unwrap();
        assert!(!ball.contains(&v(&[1.0000001, 0.0, 0.0])).unwrap());
        let big = ball.scaled(2.0).unwrap();
        assert!(big.contains(&v(&[1.5, 0.0, 0.0])).unwrap());
        assert!(matches!(cube.contains(&v(&[0.0, 0.0])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn radial_examples() {
        let cube3 = Body::cube(3, 0.5).unwrap();
        assert_relative_eq!(cube3.radial(&Direction::axis(3, 0)).unwrap(), 0.5);
        let cube4 = Body::cube(4, 0.5).unwrap();
        assert_relative_eq!(cube4.radial(&dir(&[1.0, 1.0, 1.0, 1.0])).unwrap(), 1.0, epsilon = 1e-15);
        let ell = Body::ellipsoid(DMatrix::from_diagonal(&v(&[1.0, 4.0]))).unwrap();
        assert_relative_eq!(ell.radial(&Direction::axis(2, 1)).unwrap(), 0.5);
        assert!(matches!(
            cube3.radial(&Direction::new_unchecked(v(&[1.0, 1.0, 0.0]))),
            Ok(_)
        ));
        assert!(Direction::new(v(&[1.0, 1.0, 0.0])).is_err());
    }

    #[test]
    fn support_examples() {
        let ball = Body::ball(3, 2.5).unwrap();
        assert_relative_eq!(ball.support(&dir(&[1.0, 2.0, 3.0])).unwrap(), 2.5);
        let cube = Body::cube(3, 0.5).unwrap();
        assert_relative_eq!(cube.support(&dir(&[1.0, 1.0, 1.0])).unwrap(), 3f64.sqrt() / 2.0, epsilon = 1e-15);
        let cross = Body::cross_polytope(2, 1.0).unwrap();
        assert_relative_eq!(cross.support(&dir(&[1.0, 1.0])).unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
        let poly = Body::h_polytope(vec![
            (v(&[1.0, 0.0]), 1.0),
            (v(&[-1.0, 0.0]), 1.0),
            (v(&[0.0, 1.0]), 1.0),
            (v(&[0.0, -1.0]), 1.0),
        ])
        .unwrap();
        assert!(matches!(poly.support(&dir(&[1.0, 0.0])), Err(Error::Unsupported(_))));
    }

    #[test]
    fn radii_examples() {
        assert_relative_eq!(Body::cube(4, 0.5).unwrap().circumradius().value, 1.0);
        let ell = Body::ellipsoid(DMatrix::from_diagonal(&v(&[1.0, 1.0 / 9.0]))).unwrap();
        let r = ell.circumradius();
        assert!(r.exact);
        assert_relative_eq!(r.value, 3.0, epsilon = 1e-12);
        assert_relative_eq!(Body::ball(5, 2.0).unwrap().circumradius().value, 2.0);
        assert_relative_eq!(Body::cube(7, 0.5).unwrap().inradius().value, 0.5);
        assert_relative_eq!(Body::cross_polytope(3, 1.0).unwrap().inradius().value, 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(Body::ball(2, 2.0).unwrap().inradius().value, 2.0);
    }

    #[test]
    fn simplex_is_regular_and_centered() {
        for n in 1..=7 {
            let s = Body::<f64>::regular_simplex(n).unwrap();
            let vs = s.vertices().unwrap();
            let sum = vs.iter().fold(DVector::zeros(n), |a, b| a + b);
            assert!(sum.norm() < 1e-12);
            for (i, a) in vs.iter().enumerate() {
                assert_relative_eq!(a.norm(), 1.0, epsilon = 1e-12);
                for b in &vs[i + 1..] {
                    assert_relative_eq!(a.dot(b), -1.0 / n as f64, epsilon = 1e-12);
                }
                // Vertices lie on the boundary.
                let d = Direction::normalize(a.clone()).unwrap();
                assert_relative_eq!(s.radial(&d).unwrap(), 1.0, epsilon = 1e-12);
            }
            assert_relative_eq!(s.inradius().value, 1.0 / n as f64, epsilon = 1e-12);
            assert!(n == 1 || !s.is_origin_symmetric());
        }
    }

    #[test]
    fn linear_image_radii_are_exact_for_polytopes_and_ellipsoids() {
        let t = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.0, 1.0, 0.5, 0.1, 0.0, 1.5]);
        let cube = Body::cube(3, 0.5).unwrap().linear_image(t.clone()).unwrap();
        let r = cube.circumradius();
        assert!(r.exact);
        let sampled = extreme_radial(&cube, true, 20_000, &mut RngStream::new(3, 3));
        assert!(sampled <= r.value * (1.0 + 1e-12));
        assert!(sampled >= r.value * 0.99);
        let ball = Body::ball(3, 1.0).unwrap().linear_image(t.clone()).unwrap();
        let (hi, lo) = linalg::singular_extremes(&t);
        assert_relative_eq!(ball.circumradius().value, hi, epsilon = 1e-12);
        assert_relative_eq!(ball.inradius().value, lo, epsilon = 1e-12);
        let inr = cube.inradius();
        assert!(inr.exact);
        let sampled_in = extreme_radial(&cube, false, 20_000, &mut RngStream::new(4, 4));
        assert!(sampled_in >= inr.value * (1.0 - 1e-12));
    }

    #[test]
    fn numerical_radius_is_flagged() {
        let lp = Body::lp_ball(3, 3.0, 1.0).unwrap();
        let t = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let img = lp.linear_image(t).unwrap();
        let r = img.circumradius();
        assert!(!r.exact);
        assert!(r.value > 0.0);
    }

    #[test]
    fn section_of_ellipsoid_restricts_form() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 3.0]);
        let ell = Body::ellipsoid(m.clone()).unwrap();
        let e = Subspace::span(DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 2.0])).unwrap();
        let sec = ell.section(&e).unwrap();
        assert_eq!(sec.dim(), 2);
        let b = e.basis();
        let restricted = b.transpose() * &m * b;
        for phi in [dir(&[1.0, 0.0]), dir(&[0.3, -0.7]), dir(&[-1.0, 2.0])] {
            let q = (phi.as_vector().transpose() * &restricted * phi.as_vector())[(0, 0)];
            assert_relative_eq!(sec.radial(&phi).unwrap(), q.powf(-0.5), epsilon = 1e-12);
        }
    }

    #[test]
    fn coordinate_section_of_cube() {
        let cube = Body::cube(3, 0.5).unwrap();
        let e = Subspace::coordinate(3, &[0, 1]).unwrap();
        let sec = cube.section(&e).unwrap();
        let square = Body::cube(2, 0.5).unwrap();
        for phi in [dir(&[1.0, 0.2]), dir(&[-0.5, 1.0]), dir(&[1.0, 1.0])] {
            assert_relative_eq!(sec.radial(&phi).unwrap(), square.radial(&phi).unwrap());
        }
        assert!(sec.canonical_section().is_some());
    }

    #[test]
    fn radial_sum_examples() {
        let a = Body::ball(3, 1.0).unwrap();
        let b = Body::ball(3, 2.0).unwrap();
        let s = a.radial_sum(&b).unwrap();
        assert_relative_eq!(s.radial(&dir(&[1.0, 2.0, -1.0])).unwrap(), 3.0);
        assert_eq!(s.ball_radius(), Some(3.0));
        let cube = Body::cube(3, 0.5).unwrap();
        let cc = cube.radial_sum(&cube).unwrap();
        let th = dir(&[0.2, -0.9, 0.4]);
        assert_relative_eq!(cc.radial(&th).unwrap(), 2.0 * cube.radial(&th).unwrap());
        assert!(a.radial_sum(&Body::ball(2, 1.0).unwrap()).is_err());
    }

    #[test]
    fn radial_distance_examples() {
        let mut rng = RngStream::new(1, 0);
        let cube = Body::cube(2, 0.5).unwrap();
        assert_eq!(cube.radial_distance(&cube, 100, &mut rng).unwrap().value, 0.0);
        let b1 = Body::ball(3, 1.0).unwrap();
        let b2 = Body::ball(3, 2.0).unwrap();
        assert_relative_eq!(b1.radial_distance(&b2, 10, &mut rng).unwrap().value, 1.0);
        // Oracle: 1-D grid search of |ρ_cube(φ) − 1/2| over the circle.
        let disc = Body::ball(2, 0.5).unwrap();
        let oracle = (0..=200_000)
            .map(|i| {
                let a = i as f64 / 200_000.0 * std::f64::consts::PI * 2.0;
                let th = v(&[a.cos(), a.sin()]);
                (cube.radial_unit(&th) - 0.5).abs()
            })
            .fold(0.0, f64::max);
        assert_relative_eq!(oracle, (2f64.sqrt() - 1.0) / 2.0, epsilon = 1e-9);
        let d = cube.radial_distance(&disc, 2000, &mut rng).unwrap();
        assert!(!d.exact);
        assert!(d.value <= oracle + 1e-12);
        assert!((d.value - oracle).abs() < 1e-6);
    }

    #[test]
    fn translate_uses_bisection() {
        let cube = Body::cube(2, 1.0).unwrap();
        let t = cube.translate(v(&[0.25, 0.0])).unwrap();
        assert_relative_eq!(t.radial(&Direction::axis(2, 0)).unwrap(), 1.25, epsilon = 1e-11);
        assert_relative_eq!(t.radial(&dir(&[-1.0, 0.0])).unwrap(), 0.75, epsilon = 1e-11);
        assert!(cube.translate(v(&[2.0, 0.0])).is_err());
    }

    #[test]
    fn constructor_errors() {
        assert!(Body::ball(3, -1.0).is_err());
        assert!(Body::ellipsoid(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0])).is_err());
        assert!(Body::ellipsoid(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).is_err());
        assert!(Body::lp_ball(3, 0.5, 1.0).is_err());
        assert!(Body::cube(3, 1.0).unwrap().linear_image(DMatrix::zeros(3, 3)).is_err());
        assert_eq!(
            Body::h_polytope(vec![(v(&[1.0, 0.0]), 1.0), (v(&[0.0, 1.0]), 1.0)]).unwrap_err(),
            Error::Unbounded
        );
        assert!(Body::h_polytope(vec![(v(&[1.0, 0.0]), -1.0)]).is_err());
    }
}
