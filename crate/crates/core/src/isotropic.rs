//! Barycenter, covariance, isotropic position and isotropic constant.
//!
//! For a centered body with covariance `Σ` (second moments per unit volume)
//! the isotropic constant is
//!
//! `L_K = det(Σ)^{1/(2n)} / |K|^{1/n}`.
//!
//! This follows from the isotropic condition: the map `T = s·Σ^{-1/2}` with
//! `s^n = det(Σ)^{1/2}/|K|` sends `K` to a volume-one body whose covariance
//! is `s²·Id`, so `L_K = s`. The tests check that the formula is invariant
//! under scaling and `GL(n)`, and that it returns `L` for a volume-one body
//! with covariance `L²·Id`.

use nalgebra::{DMatrix, DVector};

use crate::bodies::{Body, Shape};
use crate::error::{Error, Result};
use crate::linalg;
use crate::quadrature::{self, accumulate, Estimate};
use crate::sampling::{BodySampler, RngStream};
use crate::scalar::Real;

/// Which moment computation to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    /// Closed forms when available, sampling otherwise.
    #[default]
    Auto,
    /// Always sample (used to cross-check the closed forms).
    Sampled,
}

/// First and second moments of the uniform measure on a body.
#[derive(Clone, Debug)]
pub struct BodyMoments<T: Real> {
    /// `(1/|K|) ∫_K x dx`.
    pub barycenter: DVector<T>,
    /// `(1/|K|) ∫_K (x − b)(x − b)ᵀ dx`.
    pub covariance: DMatrix<T>,
    pub volume: Estimate<T>,
    pub samples: u64,
    /// True when barycenter and covariance come from closed forms.
    pub exact: bool,
    /// Standard error of `log det Σ` (zero on the exact path).
    pub logdet_stderr: T,
}

fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Closed-form `(barycenter, covariance)` when known.
pub fn exact_moments<T: Real>(body: &Body<T>) -> Option<(DVector<T>, DMatrix<T>)> {
    let n = body.dim();
    let nf = n as f64;
    let id = DMatrix::<T>::identity(n, n);
    let zero = DVector::<T>::zeros(n);
    let iso = |v: f64| Some((zero.clone(), &id * T::of(v)));
    match body.shape() {
        Shape::Ball { radius, .. } => return iso(radius.as_f64().powi(2) / (nf + 2.0)),
        Shape::Cube { half_side, .. } => return iso(half_side.as_f64().powi(2) / 3.0),
        Shape::CrossPolytope { scale, .. } => {
            return iso(2.0 * scale.as_f64().powi(2) / ((nf + 1.0) * (nf + 2.0)));
        }
        Shape::RegularSimplex(_) => return iso(1.0 / (nf * (nf + 2.0))),
        Shape::LpBall { p, scale, .. } => {
            let p = p.as_f64();
            let s2 = scale.as_f64().powi(2);
            let m = if p.is_finite() {
                s2 * gamma(1.0 + nf / p) * gamma(3.0 / p) / (gamma(1.0 / p) * gamma(1.0 + (nf + 2.0) / p))
            } else {
                s2 / 3.0
            };
            return iso(m);
        }
        Shape::LinearImage(l) => {
            let (b, c) = exact_moments(l.inner())?;
            let t = l.map();
            return Some((t * b, t * c * t.transpose()));
        }
        Shape::Translate(t) => {
            let (b, c) = exact_moments(t.inner())?;
            return Some((b + t.shift(), c));
        }
        _ => {}
    }
    let m = body.ellipsoid_matrix()?;
    let inv = m.try_inverse()?;
    Some((zero, inv / T::of(nf + 2.0)))
}

/// Moments of `body`, by closed form when available.
pub fn body_moments<T: Real>(body: &Body<T>, samples: usize, rng: &mut RngStream) -> Result<BodyMoments<T>> {
    body_moments_with(body, samples, rng, Method::Auto)
}

pub fn body_moments_with<T: Real>(
    body: &Body<T>,
    samples: usize,
    rng: &mut RngStream,
    method: Method,
) -> Result<BodyMoments<T>> {
    let n = body.dim();
    if method == Method::Auto {
        if let Some((barycenter, covariance)) = exact_moments(body) {
            let volume = quadrature::volume(body, samples, rng)?;
            return Ok(BodyMoments {
                barycenter,
                covariance,
                volume,
                samples: 0,
                exact: true,
                logdet_stderr: T::zero(),
            });
        }
    }
    let sampler = BodySampler::new(body)?;
    let draw = |s: &mut RngStream, out: &mut [f64]| -> Result<()> {
        let p = sampler.sample(s)?.point;
        for (o, x) in out.iter_mut().zip(p.iter()) {
            *o = x.as_f64();
        }
        Ok(())
    };
    // Both passes run on the same stream, hence on the same points.
    let first = accumulate(samples, n, &mut rng.clone(), draw)?;
    let mean = DVector::from_fn(n, |i, _| first.mean(i));
    let cov = DMatrix::from_fn(n, n, |i, j| first.covariance(i, j));
    let inv = cov.clone().try_inverse().ok_or_else(|| Error::Singular("sample covariance".into()))?;
    let second = accumulate(samples, 1, &mut rng.clone(), |s, out| {
        let p = sampler.sample(s)?.point;
        let x = DVector::from_fn(n, |i, _| p[i].as_f64()) - &mean;
        out[0] = (x.transpose() * &inv * &x)[(0, 0)];
        Ok(())
    })?;
    // Advance the caller's stream past the two passes.
    rng.fork();
    let logdet_stderr = (second.covariance(0, 0) / samples as f64).sqrt();
    let volume = quadrature::volume(body, samples, rng)?;
    Ok(BodyMoments {
        barycenter: mean.map(T::of),
        covariance: cov.map(T::of),
        volume,
        samples: samples as u64,
        exact: false,
        logdet_stderr: T::of(logdet_stderr),
    })
}

/// `L_K = det(Σ)^{1/(2n)} / |K|^{1/n}` from precomputed moments.
pub fn isotropic_constant_from<T: Real>(m: &BodyMoments<T>) -> Result<Estimate<T>> {
    let n = m.covariance.nrows();
    let det = m.covariance.determinant();
    if !(det > T::zero()) {
        return Err(Error::Singular("covariance is not positive definite".into()));
    }
    let nf = T::of_usize(n);
    let value = det.powf(T::one() / (T::of(2.0) * nf)) / m.volume.value.powf(T::one() / nf);
    if m.exact && m.volume.exact {
        return Ok(Estimate::exact(value));
    }
    let a = m.logdet_stderr / (T::of(2.0) * nf);
    let b = m.volume.relative_stderr() / nf;
    Ok(Estimate {
        value,
        stderr: value * (a * a + b * b).sqrt(),
        samples: m.samples.max(m.volume.samples),
        exact: false,
    })
}

/// The isotropic constant `L_K`.
pub fn isotropic_constant<T: Real>(body: &Body<T>, samples: usize, rng: &mut RngStream) -> Result<Estimate<T>> {
    isotropic_constant_from(&body_moments(body, samples, rng)?)
}

pub fn isotropic_constant_with<T: Real>(
    body: &Body<T>,
    samples: usize,
    rng: &mut RngStream,
    method: Method,
) -> Result<Estimate<T>> {
    isotropic_constant_from(&body_moments_with(body, samples, rng, method)?)
}

/// `‖Σ − (tr Σ/n)·Id‖_op / (tr Σ/n)`; zero exactly when `Σ` is a multiple
/// of the identity.
pub fn isotropy_deviation<T: Real>(cov: &DMatrix<T>) -> T {
    let n = cov.nrows();
    let avg = cov.trace() / T::of_usize(n);
    let dev = cov - DMatrix::identity(n, n) * avg;
    linalg::sym_op_norm(&dev) / avg
}

/// A body moved to isotropic position, `x ↦ T(x − b)`.
#[derive(Clone, Debug)]
pub struct IsotropicPosition<T: Real> {
    pub transform: DMatrix<T>,
    /// The barycenter `b` removed before applying `T`.
    pub shift: DVector<T>,
    pub body: Body<T>,
    pub l_k: Estimate<T>,
    /// Isotropy deviation of the image, measured independently of the
    /// moments used to build `T`.
    pub certificate: T,
}

/// Puts `body` in isotropic position: `T = L_K·Σ^{-1/2}` after recentring,
/// so the image has volume one and covariance `L_K²·Id`.
pub fn isotropic_position<T: Real>(body: &Body<T>, samples: usize, rng: &mut RngStream) -> Result<IsotropicPosition<T>> {
    isotropic_position_with(body, samples, rng, Method::Auto)
}

pub fn isotropic_position_with<T: Real>(
    body: &Body<T>,
    samples: usize,
    rng: &mut RngStream,
    method: Method,
) -> Result<IsotropicPosition<T>> {
    let moments = body_moments_with(body, samples, rng, method)?;
    let l_k = isotropic_constant_from(&moments)?;
    let whiten = linalg::sym_power(&moments.covariance, T::of(-0.5))?;
    let transform = whiten * l_k.value;
    let shift = moments.barycenter.clone();
    let centered = if shift.iter().all(|x| *x == T::zero()) { body.clone() } else { body.translate(-&shift)? };
    let image = centered.linear_image(transform.clone())?;
    let check = body_moments_with(&image, samples, rng, method)?;
    Ok(IsotropicPosition {
        transform,
        shift,
        body: image,
        l_k,
        certificate: isotropy_deviation(&check.covariance),
    })
}
