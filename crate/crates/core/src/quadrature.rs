//! Monte-Carlo estimators with standard errors for spherical radial
//! moments, volumes, section volumes and weighted radial integrals.
//!
//! Measure conventions used throughout:
//! - `σ`: rotation-invariant probability measure on `S^{d-1}`;
//! - `dθ`: the non-normalized surface measure, total mass `d·ω_d`;
//! - `ν`: Haar probability measure on a Grassmannian.
//!
//! Every estimator shards its samples into fixed-size chunks, each driven by
//! its own substream, and merges the per-chunk accumulators in chunk order.
//! Results are therefore bit-identical for any number of worker threads.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::{Body, Shape, Subspace};
use crate::error::{Error, Result};
use crate::sampling::{self, RngStream};
use crate::scalar::Real;

/// Samples handled by one substream.
pub const CHUNK: usize = 1024;

/// A value with its Monte-Carlo standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub value: T,
    pub stderr: T,
    #[serde(rename = "n")]
    pub samples: u64,
    /// Set when a closed form was used (then `stderr = 0`).
    pub exact: bool,
}

impl<T: Real> Estimate<T> {
    pub fn exact(value: T) -> Self {
        Estimate { value, stderr: T::zero(), samples: 0, exact: true }
    }

    pub fn sampled(value: T, stderr: T, samples: u64) -> Self {
        Estimate { value, stderr, samples, exact: false }
    }

    /// `stderr / |value|`, zero for exact values.
    pub fn relative_stderr(&self) -> T {
        if self.stderr == T::zero() {
            T::zero()
        } else {
            self.stderr / self.value.abs()
        }
    }

    pub fn scale(self, c: T) -> Self {
        Estimate { value: self.value * c, stderr: self.stderr * c.abs(), ..self }
    }

    /// `value^p` with first-order (delta method) error propagation.
    pub fn powf(self, p: T) -> Self {
        let value = self.value.powf(p);
        let stderr = if self.stderr == T::zero() {
            T::zero()
        } else {
            (p * value / self.value).abs() * self.stderr
        };
        Estimate { value, stderr, ..self }
    }

    /// Product of independent estimates.
    pub fn mul(self, other: Self) -> Self {
        let value = self.value * other.value;
        let a = self.stderr * other.value;
        let b = other.stderr * self.value;
        self.combine(other, value, (a * a + b * b).sqrt())
    }

    /// Quotient of independent estimates.
    pub fn div(self, other: Self) -> Self {
        let value = self.value / other.value;
        let a = self.stderr / other.value;
        let b = other.stderr * value / other.value;
        self.combine(other, value, (a * a + b * b).sqrt())
    }

    pub fn add(self, other: Self) -> Self {
        let s = (self.stderr * self.stderr + other.stderr * other.stderr).sqrt();
        self.combine(other, self.value + other.value, s)
    }

    pub fn sub(self, other: Self) -> Self {
        let s = (self.stderr * self.stderr + other.stderr * other.stderr).sqrt();
        self.combine(other, self.value - other.value, s)
    }

    fn combine(self, other: Self, value: T, stderr: T) -> Self {
        Estimate {
            value,
            stderr,
            samples: self.samples.max(other.samples),
            exact: self.exact && other.exact,
        }
    }

    /// `|self − other| ≤ k·(combined stderr)`.
    pub fn agrees_with(&self, other: &Self, k: T) -> bool {
        let s = (self.stderr * self.stderr + other.stderr * other.stderr).sqrt();
        (self.value - other.value).abs() <= k * s
    }

    pub fn to_f64(&self) -> Estimate<f64> {
        Estimate {
            value: self.value.as_f64(),
            stderr: self.stderr.as_f64(),
            samples: self.samples,
            exact: self.exact,
        }
    }
}

/// Even, continuous, nonnegative weights on `R^n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Density {
    /// `f ≡ 1`.
    One,
    /// `f(x) = ‖x‖₂^e`.
    NormPower { exponent: f64 },
    /// `f(x) = exp(−‖x‖²/2s²)`.
    Gaussian { s: f64 },
}

impl Density {
    pub fn eval<T: Real>(&self, x: &DVector<T>) -> T {
        self.radial_profile(x.norm())
    }

    /// All supported densities are radial; `g(‖x‖)`.
    pub fn radial_profile<T: Real>(&self, r: T) -> T {
        match *self {
            Density::One => T::one(),
            Density::NormPower { exponent } => r.powf(T::of(exponent)),
            Density::Gaussian { s } => {
                let s = T::of(s);
                (-(r * r) / (T::of(2.0) * s * s)).exp()
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Density::One => "one".into(),
            Density::NormPower { exponent } => format!("norm_power({exponent})"),
            Density::Gaussian { s } => format!("gaussian({s})"),
        }
    }
}

/// `ω_m`, the volume of the Euclidean unit ball of `R^m` (`ω₀ = 1`).
pub fn unit_ball_volume(m: usize) -> f64 {
    let mut w = if m % 2 == 0 { 1.0 } else { 2.0 };
    let mut j = if m % 2 == 0 { 2 } else { 3 };
    while j <= m {
        w *= 2.0 * std::f64::consts::PI / j as f64;
        j += 2;
    }
    w
}

/// Total `dθ`-mass of `S^{d-1}`, i.e. `d·ω_d`.
pub fn sphere_mass(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, i| a * i as f64)
}

/// Exact volume when a closed form is known.
pub fn closed_form_volume<T: Real>(body: &Body<T>) -> Option<T> {
    let n = body.dim();
    let w = T::of(unit_ball_volume(n));
    let ni = n as i32;
    match body.shape() {
        Shape::Ball { radius, .. } => return Some(w * radius.powi(ni)),
        Shape::Cube { half_side, .. } => return Some((*half_side * T::of(2.0)).powi(ni)),
        Shape::CrossPolytope { scale, .. } => {
            return Some((*scale * T::of(2.0)).powi(ni) / T::of(factorial(n)));
        }
        Shape::LpBall { p, scale, .. } => {
            let pf = p.as_f64();
            let v = if pf.is_finite() {
                (2.0 * libm::tgamma(1.0 + 1.0 / pf)).powi(ni) / libm::tgamma(1.0 + n as f64 / pf)
            } else {
                2f64.powi(ni)
            };
            return Some(T::of(v) * scale.powi(ni));
        }
        Shape::RegularSimplex(_) => {
            // Circumradius 1: (n+1)^{(n+1)/2} / (n!·n^{n/2}).
            let nf = n as f64;
            return Some(T::of((nf + 1.0).powf((nf + 1.0) / 2.0) / (factorial(n) * nf.powf(nf / 2.0))));
        }
        Shape::LinearImage(l) => return closed_form_volume(l.inner()).map(|v| v * l.det().abs()),
        Shape::Translate(t) => return closed_form_volume(t.inner()),
        _ => {}
    }
    if let Some(r) = body.ball_radius() {
        return Some(w * r.powi(ni));
    }
    if let Some(m) = body.ellipsoid_matrix() {
        return Some(w / m.determinant().sqrt());
    }
    if let Shape::Section(s) = body.shape() {
        if n == s.inner().dim() {
            return closed_form_volume(s.inner());
        }
        if n == 1 {
            let e = s.subspace().embed(&DVector::from_element(1, T::one()));
            let inner = s.inner();
            return Some(inner.radial_unit(&e) + inner.radial_unit(&(-e)));
        }
        if let Some(c) = body.canonical_section() {
            return closed_form_volume(&c);
        }
    }
    None
}

/// Running mean and co-moments of a vector-valued sample.
///
/// Single-pass (Welford) updates; two accumulators merge exactly, so the
/// result depends only on the order in which chunks are merged.
#[derive(Clone, Debug)]
pub struct Accumulator {
    count: u64,
    mean: Vec<f64>,
    comoment: Vec<f64>,
}

impl Accumulator {
    pub fn new(dim: usize) -> Self {
        Accumulator { count: 0, mean: vec![0.0; dim], comoment: vec![0.0; dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn push(&mut self, x: &[f64]) {
        let d = self.dim();
        self.count += 1;
        let n = self.count as f64;
        let delta: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        for i in 0..d {
            self.mean[i] += delta[i] / n;
        }
        for i in 0..d {
            for j in 0..d {
                self.comoment[i * d + j] += delta[i] * (x[j] - self.mean[j]);
            }
        }
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let d = self.dim();
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let delta: Vec<f64> = other.mean.iter().zip(&self.mean).map(|(b, a)| b - a).collect();
        for i in 0..d {
            self.mean[i] += delta[i] * nb / n;
        }
        for i in 0..d {
            for j in 0..d {
                self.comoment[i * d + j] += other.comoment[i * d + j] + delta[i] * delta[j] * na * nb / n;
            }
        }
        self.count += other.count;
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.mean[i]
    }

    pub fn means(&self) -> &[f64] {
        &self.mean
    }

    /// Sample covariance (denominator `count − 1`).
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        self.comoment[i * self.dim() + j] / (self.count - 1) as f64
    }

    /// Estimate of the mean of component `i`.
    pub fn estimate<T: Real>(&self, i: usize) -> Estimate<T> {
        let se = (self.covariance(i, i).max(0.0) / self.count as f64).sqrt();
        Estimate::sampled(T::of(self.mean[i]), T::of(se), self.count)
    }

    /// Estimate of `g(means)` given `value = g(means)` and its gradient,
    /// by the delta method on the joint sample covariance.
    pub fn function_estimate<T: Real>(&self, value: f64, gradient: &[f64]) -> Estimate<T> {
        let d = self.dim();
        let mut var = 0.0;
        for i in 0..d {
            for j in 0..d {
                var += gradient[i] * gradient[j] * self.covariance(i, j);
            }
        }
        let se = (var.max(0.0) / self.count as f64).sqrt();
        Estimate::sampled(T::of(value), T::of(se), self.count)
    }
}

/// Runs `samples` evaluations of `f` (each filling a `dim`-vector) in
/// parallel chunks and merges them in chunk order.
///
/// Consumes one draw of `rng` to derive an independent base stream, so two
/// consecutive calls on the same stream are independent while two calls on
/// clones of a stream see identical samples.
pub fn accumulate<F>(samples: usize, dim: usize, rng: &mut RngStream, f: F) -> Result<Accumulator>
where
    F: Fn(&mut RngStream, &mut [f64]) -> Result<()> + Sync,
{
    if samples < 2 {
        return Err(Error::invalid(format!("at least 2 samples required, got {samples}")));
    }
    let base = rng.fork();
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Result<Accumulator>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut stream = base.substream(c as u64);
            let len = CHUNK.min(samples - c * CHUNK);
            let mut acc = Accumulator::new(dim);
            let mut buf = vec![0.0; dim];
            for _ in 0..len {
                f(&mut stream, &mut buf)?;
                acc.push(&buf);
            }
            Ok(acc)
        })
        .collect();
    let mut total = Accumulator::new(dim);
    for part in parts {
        total.merge(&part?);
    }
    Ok(total)
}

/// Mean of a scalar sample function.
pub fn mc_mean<T: Real, F>(samples: usize, rng: &mut RngStream, f: F) -> Result<Estimate<T>>
where
    F: Fn(&mut RngStream) -> Result<T> + Sync,
{
    let acc = accumulate(samples, 1, rng, |r, out| {
        out[0] = f(r)?.as_f64();
        Ok(())
    })?;
    Ok(acc.estimate(0))
}

/// Mean of `g(θ)` over `σ` on `S^{n-1}`.
pub fn sphere_mean<T: Real, G>(n: usize, samples: usize, rng: &mut RngStream, g: G) -> Result<Estimate<T>>
where
    G: Fn(&DVector<T>) -> T + Sync,
{
    mc_mean(samples, rng, |r| Ok(g(sampling::sphere_point::<T>(n, r).as_vector())))
}

fn finite_radial<T: Real>(body: &Body<T>, u: &DVector<T>) -> Result<T> {
    let r = body.radial_unit(u);
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::Unbounded)
    }
}

/// `∫ ρ_K^p dσ`. Exact (zero variance) when `ρ_K` is constant.
pub fn radial_moment<T: Real>(body: &Body<T>, p: T, samples: usize, rng: &mut RngStream) -> Result<Estimate<T>> {
    if p < T::zero() {
        return Err(Error::invalid("radial moment exponent must be nonnegative"));
    }
    if let Some(r) = body.ball_radius() {
        return Ok(Estimate::exact(r.powf(p)));
    }
    let n = body.dim();
    mc_mean(samples, rng, |r| {
        let u = sampling::sphere_point::<T>(n, r).into_inner();
        Ok(finite_radial(body, &u)?.powf(p))
    })
}

/// `|K| = ω_n ∫ ρ_K^n dσ`, using a closed form whenever one is known.
pub fn volume<T: Real>(body: &Body<T>, samples: usize, rng: &mut RngStream) -> Result<Estimate<T>> {
    if let Some(v) = closed_form_volume(body) {
        return Ok(Estimate::exact(v));
    }
    let n = body.dim();
    Ok(radial_moment(body, T::of_usize(n), samples, rng)?.scale(T::of(unit_ball_volume(n))))
}

/// Polar-coordinate volume, never using a closed form.
pub fn volume_by_sampling<T: Real>(body: &Body<T>, samples: usize, rng: &mut RngStream) -> Result<Estimate<T>> {
    let n = body.dim();
    let w = T::of(unit_ball_volume(n));
    let nf = T::of_usize(n);
    mc_mean(samples, rng, |r| {
        let u = sampling::sphere_point::<T>(n, r).into_inner();
        Ok(finite_radial(body, &u)?.powf(nf))
    })
    .map(|e| e.scale(w))
}

/// `|K ∩ E|` as an `m`-dimensional volume.
pub fn section_volume<T: Real>(body: &Body<T>, e: &Subspace<T>, samples: usize, rng: &mut RngStream) -> Result<Estimate<T>> {
    let section = body.section(e)?;
    volume(&section, samples, rng)
}

/// `∫ ρ_K^{d−1}(θ) f(ρ_K(θ)θ) dθ` over `S^{n-1}` (`d = n`), or over
/// `S^{n-1} ∩ E` with `d = n − k` when `E` is given. `dθ` has mass `d·ω_d`.
pub fn weighted_radial_integral<T: Real>(
    body: &Body<T>,
    f: Density,
    k: usize,
    samples: usize,
    rng: &mut RngStream,
    e: Option<&Subspace<T>>,
) -> Result<Estimate<T>> {
    let n = body.dim();
    if k >= n {
        return Err(Error::invalid(format!("codimension k = {k} must be below n = {n}")));
    }
    let section;
    let (target, d) = match e {
        Some(e) => {
            Error::check_dim(n, e.ambient_dim())?;
            if e.dim() != n - k {
                return Err(Error::invalid(format!("subspace dimension {} is not n − k = {}", e.dim(), n - k)));
            }
            section = body.section(e)?;
            (&section, n - k)
        }
        None => (body, n),
    };
    let mass = T::of(sphere_mass(d));
    let expo = (d - 1) as i32;
    // The densities are radial, so f(ρθ) = g(ρ) on any subspace.
    let integrand = |rho: T| rho.powi(expo) * f.radial_profile(rho);
    if let Some(r) = target.ball_radius() {
        return Ok(Estimate::exact(integrand(r) * mass));
    }
    mc_mean(samples, rng, |r| {
        let u = sampling::sphere_point::<T>(d, r).into_inner();
        Ok(integrand(finite_radial(target, &u)?))
    })
    .map(|est| est.scale(mass))
}

/// Mean width `w(K) = ∫ h_K dσ`.
pub fn mean_width<T: Real>(body: &Body<T>, samples: usize, rng: &mut RngStream) -> Result<Estimate<T>> {
    if !body.has_support() {
        return Err(Error::Unsupported("support function is not available for this body".into()));
    }
    if let Some(r) = body.ball_radius() {
        if !matches!(body.shape(), Shape::RadialSum(..)) {
            return Ok(Estimate::exact(r));
        }
    }
    let n = body.dim();
    mc_mean(samples, rng, |r| {
        let u = sampling::sphere_point::<T>(n, r).into_inner();
        body.support_unit(&u)
    })
}

/// `M(K) = ∫ ρ_K^{-1} dσ`.
pub fn m_value<T: Real>(body: &Body<T>, samples: usize, rng: &mut RngStream) -> Result<Estimate<T>> {
    if let Some(r) = body.ball_radius() {
        return Ok(Estimate::exact(r.recip()));
    }
    let n = body.dim();
    mc_mean(samples, rng, |r| {
        let u = sampling::sphere_point::<T>(n, r).into_inner();
        Ok(finite_radial(body, &u)?.recip())
    })
}
