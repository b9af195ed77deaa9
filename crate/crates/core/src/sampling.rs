//! Deterministic, splittable randomness and the samplers built on it:
//! uniform directions, Haar subspaces, and uniform points of a body.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bodies::{Body, Direction, Shape, Subspace};
use crate::error::{Error, Result};
use crate::linalg;
use crate::quadrature;
use crate::scalar::Real;

const SUBSTREAM_TWEAK: u64 = 0x5bd1_e995_5bd1_e995;

/// Largest dimension accepted by the rejection sampler.
pub const MAX_REJECTION_DIM: usize = 12;
/// Acceptance probability below which rejection sampling is refused.
pub const MIN_ACCEPTANCE: f64 = 1e-7;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A counter-based random stream identified by `(seed, stream id)`.
///
/// Backed by ChaCha8 keyed from the seed, with the stream id selecting the
/// ChaCha stream. Identical ids reproduce bit-identical sequences; distinct
/// ids give independent sequences. Parallel code never shares a stream: it
/// derives children with [`RngStream::substream`] before fanning out.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = seed;
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// The `index`-th child stream. Depends only on `(seed, stream, index)`,
    /// never on how much of `self` has been consumed.
    pub fn substream(&self, index: u64) -> RngStream {
        let id = splitmix64(self.stream ^ splitmix64(index ^ SUBSTREAM_TWEAK));
        RngStream::new(self.seed, id)
    }

    /// An independent child stream keyed by the next draw of `self`.
    pub fn fork(&mut self) -> RngStream {
        let key = self.rng.next_u64();
        self.substream(key)
    }

    pub fn gaussian<T: Real>(&mut self) -> T {
        T::of(self.rng.sample::<f64, _>(StandardNormal))
    }

    pub fn uniform<T: Real>(&mut self) -> T {
        T::of(self.rng.random::<f64>())
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

pub fn gaussian_vector<T: Real>(n: usize, rng: &mut RngStream) -> DVector<T> {
    DVector::from_fn(n, |_, _| rng.gaussian())
}

/// Uniform point of `S^{n-1}` (normalized Gaussian vector).
pub fn sphere_point<T: Real>(n: usize, rng: &mut RngStream) -> Direction<T> {
    loop {
        let g = gaussian_vector::<T>(n, rng);
        let norm = g.norm();
        if norm > T::of(1e-30) {
            return Direction::new_unchecked(g / norm);
        }
    }
}

/// Haar-random `m`-dimensional subspace of `R^n`: the sign-fixed QR frame of
/// an `n×m` Gaussian matrix.
pub fn grassmann_subspace<T: Real>(n: usize, m: usize, rng: &mut RngStream) -> Result<Subspace<T>> {
    if m == 0 || m > n {
        return Err(Error::invalid(format!("subspace dimension {m} outside 1..={n}")));
    }
    let g = DMatrix::from_fn(n, m, |_, _| rng.gaussian());
    Subspace::from_orthonormal(linalg::orthonormal_factor(g))
}

/// `⌊n/(n−m)⌋` subspaces of dimension `m` cut from one Haar frame: the
/// `g`-th one is orthogonal to columns `g(n−m)..(g+1)(n−m)`. Each is Haar
/// distributed and their normals are mutually orthogonal.
pub fn grassmann_frame<T: Real>(n: usize, m: usize, rng: &mut RngStream) -> Result<Vec<Subspace<T>>> {
    if m == 0 || m >= n {
        return Ok(vec![grassmann_subspace(n, m, rng)?]);
    }
    let c = n - m;
    let q = haar_orthogonal::<T>(n, rng);
    (0..n / c)
        .map(|g| {
            let keep: Vec<usize> = (0..n).filter(|&i| i < g * c || i >= (g + 1) * c).collect();
            Subspace::from_orthonormal(q.select_columns(keep.iter()))
        })
        .collect()
}

/// Matrix angular central Gaussian law on `Gr_m`: `E = span(Σ^{1/2} G)` for
/// an `n×m` Gaussian `G`. Its density against Haar measure is
/// `det(Σ)^{−m/2} det(BᵀΣ⁻¹B)^{−n/2}` for an orthonormal basis `B` of `E`.
#[derive(Clone, Debug)]
pub struct AngularGaussian<T: Real> {
    root: DMatrix<T>,
    inverse: DMatrix<T>,
}

impl<T: Real> AngularGaussian<T> {
    /// `sigma` must be symmetric positive definite; it is rescaled to unit
    /// determinant.
    pub fn new(sigma: &DMatrix<T>) -> Result<Self> {
        let n = sigma.nrows();
        let (values, _) = linalg::sym_eigen(sigma);
        if values.iter().any(|&v| !(v > T::zero())) {
            return Err(Error::Singular("proposal covariance is not positive definite".into()));
        }
        let log_det = values.iter().fold(T::zero(), |a, &v| a + v.ln());
        let unit = sigma * (-log_det / T::of_usize(n)).exp();
        Ok(AngularGaussian { root: linalg::sym_power(&unit, T::of(0.5))?, inverse: linalg::sym_power(&unit, T::of(-1.0))? })
    }

    /// A draw and its importance weight `dν_Haar / dν_Σ`.
    pub fn draw(&self, m: usize, rng: &mut RngStream) -> Result<(Subspace<T>, T)> {
        let n = self.root.nrows();
        if m == 0 || m > n {
            return Err(Error::invalid(format!("subspace dimension {m} outside 1..={n}")));
        }
        let g = DMatrix::from_fn(n, m, |_, _| rng.gaussian());
        let e = Subspace::from_orthonormal(linalg::orthonormal_factor(&self.root * g))?;
        let b = e.basis();
        let gram = b.transpose() * &self.inverse * b;
        let det = gram.determinant();
        Ok((e, det.powf(T::of_usize(n) / T::of(2.0))))
    }
}

/// Haar-random orthogonal `n×n` matrix.
pub fn haar_orthogonal<T: Real>(n: usize, rng: &mut RngStream) -> DMatrix<T> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.gaussian());
    linalg::orthonormal_factor(g)
}

/// Orthonormal basis of `E^⊥`.
pub fn complement<T: Real>(e: &Subspace<T>) -> Result<Subspace<T>> {
    e.complement()
}

/// A uniform point of a body and the number of proposals it consumed.
#[derive(Clone, Debug)]
pub struct BodyPoint<T: Real> {
    pub point: DVector<T>,
    pub attempts: u64,
}

enum Plan<T: Real> {
    /// Rejection from the centered ball of the given radius.
    Rejection { radius: T },
    /// Sample the inner body, then apply `x ↦ A x + b`.
    Mapped { map: DMatrix<T>, shift: DVector<T>, inner: Box<BodySampler<T>> },
}

/// Uniform sampler for a body, set up once and reused.
///
/// Linear images and translates are sampled by pushing forward samples of
/// their component (uniformity is preserved by affine maps); everything else
/// uses rejection from the circumscribed ball.
pub struct BodySampler<T: Real> {
    body: Body<T>,
    plan: Plan<T>,
    attempt_cap: u64,
}

impl<T: Real> BodySampler<T> {
    pub fn new(body: &Body<T>) -> Result<Self> {
        let n = body.dim();
        if n > MAX_REJECTION_DIM {
            return Err(Error::BudgetExceeded(format!(
                "rejection sampling supports n ≤ {MAX_REJECTION_DIM}, got {n}"
            )));
        }
        let plan = match body.shape() {
            Shape::LinearImage(l) => Plan::Mapped {
                map: l.map().clone(),
                shift: DVector::zeros(n),
                inner: Box::new(BodySampler::new(l.inner())?),
            },
            Shape::Translate(t) => Plan::Mapped {
                map: DMatrix::identity(n, n),
                shift: t.shift().clone(),
                inner: Box::new(BodySampler::new(t.inner())?),
            },
            _ => {
                let r = body.circumradius();
                // A sampled circumradius is a lower bound; pad it.
                let radius = if r.exact { r.value } else { r.value * T::of(1.05) };
                if let Some(vol) = quadrature::closed_form_volume(body) {
                    let ball = T::of(quadrature::unit_ball_volume(n)) * radius.powi(n as i32);
                    let acceptance = (vol / ball).as_f64();
                    if acceptance < MIN_ACCEPTANCE {
                        return Err(Error::BudgetExceeded(format!(
                            "rejection acceptance {acceptance:.3e} below {MIN_ACCEPTANCE:e}; precondition the body with a linear image"
                        )));
                    }
                }
                Plan::Rejection { radius }
            }
        };
        Ok(BodySampler { body: body.clone(), plan, attempt_cap: (1.0 / MIN_ACCEPTANCE) as u64 * 10 })
    }

    pub fn body(&self) -> &Body<T> {
        &self.body
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<BodyPoint<T>> {
        match &self.plan {
            Plan::Mapped { map, shift, inner } => {
                let p = inner.sample(rng)?;
                Ok(BodyPoint { point: map * p.point + shift, attempts: p.attempts })
            }
            Plan::Rejection { radius } => {
                let n = self.body.dim();
                let inv_n = T::one() / T::of_usize(n);
                for attempt in 1..=self.attempt_cap {
                    let dir = sphere_point::<T>(n, rng).into_inner();
                    let r = *radius * rng.uniform::<T>().powf(inv_n);
                    let x = dir * r;
                    if self.body.contains_unchecked(&x) {
                        return Ok(BodyPoint { point: x, attempts: attempt });
                    }
                }
                Err(Error::BudgetExceeded(format!("no acceptance in {} proposals", self.attempt_cap)))
            }
        }
    }
}

/// One uniform point of `body`.
pub fn body_point<T: Real>(body: &Body<T>, rng: &mut RngStream) -> Result<BodyPoint<T>> {
    BodySampler::new(body)?.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angular_gaussian_weights_average_to_one() {
        let sigma = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 4.0, 9.0]));
        let prop = AngularGaussian::<f64>::new(&sigma).unwrap();
        let mut rng = RngStream::new(8, 0);
        for m in [1, 2, 3] {
            let n = 40_000;
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..n {
                let (_, w) = prop.draw(m, &mut rng).unwrap();
                sum += w;
                sq += w * w;
            }
            let mean = sum / n as f64;
            let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
            assert!((mean - 1.0).abs() <= 4.0 * se, "m={m} mean {mean} se {se}");
        }
    }

    #[test]
    fn frame_subspaces_are_orthogonal_and_haar() {
        let mut rng = RngStream::new(9, 0);
        let frame = grassmann_frame::<f64>(6, 4, &mut rng).unwrap();
        assert_eq!(frame.len(), 3);
        let normals: Vec<_> = frame.iter().map(|e| e.complement().unwrap().basis().clone()).collect();
        assert!((normals[0].transpose() * &normals[1]).norm() < 1e-12);
        // ‖P_E e₁‖² has mean m/n under Haar measure.
        let n = 20_000;
        let mut sum = 0.0;
        for _ in 0..n {
            for e in grassmann_frame::<f64>(5, 3, &mut rng).unwrap() {
                sum += e.basis().row(0).norm_squared();
            }
        }
        let mean = sum / (2 * n) as f64;
        assert!((mean - 0.6).abs() < 0.01, "{mean}");
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        let mut c = RngStream::new(42, 8);
        let mut d = RngStream::new(43, 7);
        let xa: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        let xd: Vec<u64> = (0..8).map(|_| d.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        assert_ne!(xa, xd);
    }

    #[test]
    fn substream_ignores_consumption() {
        let base = RngStream::new(1, 2);
        let mut used = base.clone();
        used.next_u64();
        let mut s1 = base.substream(5);
        let mut s2 = used.substream(5);
        assert_eq!(s1.next_u64(), s2.next_u64());
        assert_ne!(base.substream(5).stream_id(), base.substream(6).stream_id());
        assert_ne!(base.substream(0).stream_id(), base.stream_id());
    }

    #[test]
    fn sphere_points_are_unit() {
        let mut rng = RngStream::new(3, 0);
        for n in 1..8 {
            for _ in 0..100 {
                let p = sphere_point::<f64>(n, &mut rng);
                assert!((p.as_vector().norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grassmann_rejects_bad_dimension() {
        let mut rng = RngStream::new(3, 0);
        assert!(grassmann_subspace::<f64>(3, 0, &mut rng).is_err());
        assert!(grassmann_subspace::<f64>(3, 4, &mut rng).is_err());
        let e = grassmann_subspace::<f64>(5, 5, &mut rng).unwrap();
        assert!((e.basis().transpose() * e.basis() - DMatrix::identity(5, 5)).abs().max() < 1e-10);
    }

    #[test]
    fn complement_dimension() {
        let mut rng = RngStream::new(9, 0);
        for m in 1..5 {
            let e = grassmann_subspace::<f64>(5, m, &mut rng).unwrap();
            let c = complement(&e).unwrap();
            assert_eq!(c.dim(), 5 - m);
            assert!((e.basis().transpose() * c.basis()).abs().max() < 1e-10);
            assert!((complement(&c).unwrap().projector() - e.projector()).abs().max() < 1e-9);
        }
        assert!(complement(&Subspace::<f64>::full(3)).is_err());
    }

    #[test]
    fn body_points_lie_in_body() {
        let mut rng = RngStream::new(5, 0);
        let cube = Body::cube(3, 0.5).unwrap();
        let sampler = BodySampler::new(&cube).unwrap();
        let mut attempts = 0;
        for _ in 0..2000 {
            let p = sampler.sample(&mut rng).unwrap();
            assert!(cube.contains(&p.point).unwrap());
            attempts += p.attempts;
        }
        let rate = 2000.0 / attempts as f64;
        // |Q| / (ω₃ (√3/2)³) ≈ 0.3676; binomial 4σ at 2000 acceptances.
        assert!((rate - 0.3676).abs() < 0.03, "rate {rate}");
        let ball = Body::ball(4, 1.0).unwrap();
        let p = body_point(&ball, &mut rng).unwrap();
        assert_eq!(p.attempts, 1);
    }

    #[test]
    fn rejection_refuses_thin_bodies_and_high_dimension() {
        let thin = Body::ellipsoid_with_axes(&[1.0, 1e-4, 1e-4, 1e-4]).unwrap();
        assert!(matches!(BodySampler::new(&thin), Err(Error::BudgetExceeded(_))));
        let big = Body::<f64>::cube(13, 0.5).unwrap();
        assert!(matches!(BodySampler::new(&big), Err(Error::BudgetExceeded(_))));
    }
}
