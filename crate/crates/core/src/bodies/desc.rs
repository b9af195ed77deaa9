//! JSON descriptors for bodies: `{"type": "...", "dim": n, parameters...}`.
//!
//! Matrices are row-major nested arrays. `dim` may be omitted from a
//! primitive descriptor and filled in later with [`BodyDesc::with_dim`], which
//! is how suite configurations instantiate one template in several
//! dimensions.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::Body;
use crate::error::{Error, Result};
use crate::sampling::{self, RngStream};
use crate::scalar::Real;

/// Stream id reserved for generating seeded rotations.
const ROTATION_STREAM: u64 = 0x526f_7461_7465;

/// The exponent of an `ℓ_p` ball: a number or the string `"inf"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PValue {
    Finite(f64),
    Named(String),
}

impl PValue {
    pub fn value(&self) -> Result<f64> {
        match self {
            PValue::Finite(p) => Ok(*p),
            PValue::Named(s) if matches!(s.as_str(), "inf" | "infinity" | "∞") => Ok(f64::INFINITY),
            PValue::Named(s) => Err(Error::Malformed(format!("unknown p value {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BodyDesc {
    Ball {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
        #[serde(default = "one")]
        radius: f64,
    },
    /// Either an explicit `matrix` or `semi_axes`.
    Ellipsoid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        semi_axes: Option<Vec<f64>>,
    },
    /// `diag(1, 2, …, n)` rescaled to determinant one (so `|K| = ω_n`).
    GradedEllipsoid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    Cube {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
        #[serde(default = "half")]
        half_side: f64,
    },
    #[serde(alias = "crosspolytope")]
    CrossPolytope {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
        #[serde(default = "one")]
        scale: f64,
    },
    #[serde(alias = "regular_simplex")]
    Simplex {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    LpBall {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
        p: PValue,
        #[serde(default = "one")]
        scale: f64,
    },
    #[serde(alias = "hpolytope")]
    HPolytope { facets: Vec<Facet> },
    LinearImage { matrix: Vec<Vec<f64>>, body: Box<BodyDesc> },
    /// A Haar-random rotation generated deterministically from `seed`.
    Rotation { seed: u64, body: Box<BodyDesc> },
    Scaled { factor: f64, body: Box<BodyDesc> },
    /// `basis` is an `n×m` matrix with orthonormal columns.
    Section { basis: Vec<Vec<f64>>, body: Box<BodyDesc> },
    RadialSum { first: Box<BodyDesc>, second: Box<BodyDesc> },
    Translate { shift: Vec<f64>, body: Box<BodyDesc> },
}

fn matrix_from_rows<T: Real>(rows: &[Vec<f64>]) -> Result<DMatrix<T>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::Malformed("matrix rows must be non-empty and equally long".into()));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| T::of(rows[i][j])))
}

fn vector<T: Real>(xs: &[f64]) -> DVector<T> {
    DVector::from_iterator(xs.len(), xs.iter().map(|&x| T::of(x)))
}

/// A Haar-random element of `SO(n)` determined by `seed`.
pub fn seeded_rotation<T: Real>(n: usize, seed: u64) -> DMatrix<T> {
    let mut rng = RngStream::new(seed, ROTATION_STREAM);
    let mut q = sampling::haar_orthogonal::<T>(n, &mut rng);
    if q.determinant() < T::zero() {
        q.column_mut(0).neg_mut();
    }
    q
}

impl BodyDesc {
    pub fn ball(dim: usize, radius: f64) -> Self {
        BodyDesc::Ball { dim: Some(dim), radius }
    }

    pub fn cube(dim: usize, half_side: f64) -> Self {
        BodyDesc::Cube { dim: Some(dim), half_side }
    }

    pub fn cross_polytope(dim: usize, scale: f64) -> Self {
        BodyDesc::CrossPolytope { dim: Some(dim), scale }
    }

    pub fn simplex(dim: usize) -> Self {
        BodyDesc::Simplex { dim: Some(dim) }
    }

    /// The dimension this descriptor implies, if it is determined.
    pub fn dim(&self) -> Option<usize> {
        match self {
            BodyDesc::Ball { dim, .. }
            | BodyDesc::GradedEllipsoid { dim }
            | BodyDesc::Cube { dim, .. }
            | BodyDesc::CrossPolytope { dim, .. }
            | BodyDesc::Simplex { dim }
            | BodyDesc::LpBall { dim, .. } => *dim,
            BodyDesc::Ellipsoid { matrix, semi_axes } => {
                matrix.as_ref().map(Vec::len).or_else(|| semi_axes.as_ref().map(Vec::len))
            }
            BodyDesc::HPolytope { facets } => facets.first().map(|f| f.normal.len()),
            BodyDesc::LinearImage { matrix, .. } => Some(matrix.len()),
            BodyDesc::Section { basis, .. } => basis.first().map(Vec::len),
            BodyDesc::Translate { shift, .. } => Some(shift.len()),
            BodyDesc::Rotation { body, .. } | BodyDesc::Scaled { body, .. } => body.dim(),
            BodyDesc::RadialSum { first, second } => first.dim().or_else(|| second.dim()),
        }
    }

    /// Fills every missing `dim` with `n`; errors when an explicit dimension
    /// disagrees.
    pub fn with_dim(&self, n: usize) -> Result<BodyDesc> {
        let set = |dim: &Option<usize>| -> Result<Option<usize>> {
            match dim {
                Some(d) if *d != n => Err(Error::DimensionMismatch { expected: n, found: *d }),
                _ => Ok(Some(n)),
            }
        };
        let out = match self {
            BodyDesc::Ball { dim, radius } => BodyDesc::Ball { dim: set(dim)?, radius: *radius },
            BodyDesc::GradedEllipsoid { dim } => BodyDesc::GradedEllipsoid { dim: set(dim)? },
            BodyDesc::Cube { dim, half_side } => BodyDesc::Cube { dim: set(dim)?, half_side: *half_side },
            BodyDesc::CrossPolytope { dim, scale } => BodyDesc::CrossPolytope { dim: set(dim)?, scale: *scale },
            BodyDesc::Simplex { dim } => BodyDesc::Simplex { dim: set(dim)? },
            BodyDesc::LpBall { dim, p, scale } => BodyDesc::LpBall { dim: set(dim)?, p: p.clone(), scale: *scale },
            BodyDesc::Rotation { seed, body } => BodyDesc::Rotation { seed: *seed, body: Box::new(body.with_dim(n)?) },
            BodyDesc::Scaled { factor, body } => BodyDesc::Scaled { factor: *factor, body: Box::new(body.with_dim(n)?) },
            BodyDesc::LinearImage { matrix, body } => {
                set(&Some(matrix.len()))?;
                BodyDesc::LinearImage { matrix: matrix.clone(), body: Box::new(body.with_dim(n)?) }
            }
            BodyDesc::Translate { shift, body } => {
                set(&Some(shift.len()))?;
                BodyDesc::Translate { shift: shift.clone(), body: Box::new(body.with_dim(n)?) }
            }
            BodyDesc::RadialSum { first, second } => BodyDesc::RadialSum {
                first: Box::new(first.with_dim(n)?),
                second: Box::new(second.with_dim(n)?),
            },
            BodyDesc::Section { basis, body } => {
                set(&basis.first().map(Vec::len))?;
                let ambient = basis.len();
                BodyDesc::Section { basis: basis.clone(), body: Box::new(body.with_dim(ambient)?) }
            }
            other => {
                set(&other.dim())?;
                other.clone()
            }
        };
        Ok(out)
    }

    /// Short human-readable label used in tables.
    pub fn label(&self) -> String {
        match self {
            BodyDesc::Ball { radius, .. } => format!("ball(r={radius})"),
            BodyDesc::Ellipsoid { .. } => "ellipsoid".into(),
            BodyDesc::GradedEllipsoid { .. } => "graded_ellipsoid".into(),
            BodyDesc::Cube { half_side, .. } => format!("cube(h={half_side})"),
            BodyDesc::CrossPolytope { scale, .. } => format!("cross_polytope(s={scale})"),
            BodyDesc::Simplex { .. } => "simplex".into(),
            BodyDesc::LpBall { p, .. } => match p {
                PValue::Finite(p) => format!("lp_ball(p={p})"),
                PValue::Named(s) => format!("lp_ball(p={s})"),
            },
            BodyDesc::HPolytope { facets } => format!("h_polytope({} facets)", facets.len()),
            BodyDesc::LinearImage { body, .. } => format!("linear_image({})", body.label()),
            BodyDesc::Rotation { seed, body } => format!("rotation[{seed}]({})", body.label()),
            BodyDesc::Scaled { factor, body } => format!("{factor}*{}", body.label()),
            BodyDesc::Section { body, .. } => format!("section({})", body.label()),
            BodyDesc::RadialSum { first, second } => format!("{}+~{}", first.label(), second.label()),
            BodyDesc::Translate { body, .. } => format!("translate({})", body.label()),
        }
    }

    /// Builds the body. Every dimension must be determined.
    pub fn build<T: Real>(&self) -> Result<Body<T>> {
        let need = |dim: &Option<usize>| dim.ok_or_else(|| Error::Malformed("body descriptor is missing \"dim\"".into()));
        match self {
            BodyDesc::Ball { dim, radius } => Body::ball(need(dim)?, T::of(*radius)),
            BodyDesc::Ellipsoid { matrix, semi_axes } => match (matrix, semi_axes) {
                (Some(m), None) => Body::ellipsoid(matrix_from_rows(m)?),
                (None, Some(a)) => Body::ellipsoid_with_axes(&a.iter().map(|&x| T::of(x)).collect::<Vec<_>>()),
                _ => Err(Error::Malformed("ellipsoid needs exactly one of \"matrix\" or \"semi_axes\"".into())),
            },
            BodyDesc::GradedEllipsoid { dim } => {
                let n = need(dim)?;
                let log_fact: f64 = (1..=n).map(|i| (i as f64).ln()).sum();
                let norm = (log_fact / n as f64).exp();
                let diag = DVector::from_iterator(n, (1..=n).map(|i| T::of(i as f64 / norm)));
                Body::ellipsoid(DMatrix::from_diagonal(&diag))
            }
            BodyDesc::Cube { dim, half_side } => Body::cube(need(dim)?, T::of(*half_side)),
            BodyDesc::CrossPolytope { dim, scale } => Body::cross_polytope(need(dim)?, T::of(*scale)),
            BodyDesc::Simplex { dim } => Body::regular_simplex(need(dim)?),
            BodyDesc::LpBall { dim, p, scale } => Body::lp_ball(need(dim)?, T::of(p.value()?), T::of(*scale)),
            BodyDesc::HPolytope { facets } => {
                Body::h_polytope(facets.iter().map(|f| (vector(&f.normal), T::of(f.offset))).collect())
            }
            BodyDesc::LinearImage { matrix, body } => body.build::<T>()?.linear_image(matrix_from_rows(matrix)?),
            BodyDesc::Rotation { seed, body } => {
                let inner = body.build::<T>()?;
                inner.linear_image(seeded_rotation(inner.dim(), *seed))
            }
            BodyDesc::Scaled { factor, body } => body.build::<T>()?.scaled(T::of(*factor)),
            BodyDesc::Section { basis, body } => {
                let e = super::Subspace::from_orthonormal(matrix_from_rows(basis)?)?;
                body.build::<T>()?.section(&e)
            }
            BodyDesc::RadialSum { first, second } => first.build::<T>()?.radial_sum(&second.build::<T>()?),
            BodyDesc::Translate { shift, body } => body.build::<T>()?.translate(vector(shift)),
        }
    }
}
