//! Average-section functionals and the quantities built from them:
//! `as(K)`, `as_r(K)`, `as(K∩E)`, dual mixed volumes, the dual (affine)
//! quermassintegrals `R̃_k` and `Φ̃_k`, Grassmannian maxima and means, and
//! the per-body witness for the constant `γ_{n,k}`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::bodies::{Body, Subspace};
use crate::error::{Error, Result};
use crate::linalg;
use crate::quadrature::{self, accumulate, Estimate};
use crate::sampling::{self, RngStream};
use crate::scalar::Real;

/// Default number of Haar subspaces in a Grassmannian scan.
pub const DEFAULT_SUBSPACES: usize = 500;
/// Default number of local refinement steps for a Grassmannian maximum.
pub const DEFAULT_REFINE: usize = 50;
/// `n·(relative stderr)` of a section volume above which the delta method
/// for `|K∩E|ⁿ` is flagged as unreliable.
pub const DELTA_METHOD_LIMIT: f64 = 0.2;

const INITIAL_CAYLEY_STEP: f64 = 0.25;

fn omega<T: Real>(m: usize) -> T {
    T::of(quadrature::unit_ball_volume(m))
}

fn check_codim(what: &str, k: usize, lo: usize, hi: usize) -> Result<()> {
    if k < lo || k > hi {
        Err(Error::invalid(format!("{what} = {k} outside {lo}..={hi}")))
    } else {
        Ok(())
    }
}

/// `as(K) = ω_{n−1} ∫ ρ_K^{n−1} dσ`, the mean volume of central hyperplane
/// sections.
pub fn avg_section<T: Real>(body: &Body<T>, samples: usize, rng: &mut RngStream) -> Result<Estimate<T>> {
    let n = body.dim();
    if n < 2 {
        return Err(Error::invalid("as(K) needs dimension at least 2"));
    }
    avg_section_r(body, 1, samples, rng)
}

/// `as_r(K) = ω_{n−r} ∫ ρ_K^{n−r} dσ`, the mean volume of central sections
/// of codimension `r`.
pub fn avg_section_r<T: Real>(body: &Body<T>, r: usize, samples: usize, rng: &mut RngStream) -> Result<Estimate<T>> {
    let n = body.dim();
    check_codim("r", r, 1, n.saturating_sub(1))?;
    let m = quadrature::radial_moment(body, T::of_usize(n - r), samples, rng)?;
    Ok(m.scale(omega(n - r)))
}

/// `as_r(K)` straight from its definition: the mean of `|K∩E|` over Haar
/// subspaces `E` of dimension `n − r`, each section volume computed on its
/// own (exactly when possible, else with `inner` directions).
pub fn avg_section_two_stage<T: Real>(
    body: &Body<T>,
    r: usize,
    subspaces: usize,
    inner: usize,
    rng: &mut RngStream,
) -> Result<Estimate<T>> {
    let n = body.dim();
    check_codim("r", r, 1, n.saturating_sub(1))?;
    let acc = accumulate(subspaces, 1, rng, |s, out| {
        let e = sampling::grassmann_subspace::<T>(n, n - r, s)?;
        out[0] = quadrature::section_volume(body, &e, inner, s)?.value.as_f64();
        Ok(())
    })?;
    Ok(acc.estimate(0))
}

/// `as(K∩E) = ω_{m−1} ∫_{S_E} ρ_K^{m−1} dσ_E` for `m = dim E ≥ 2`.
pub fn avg_section_in_subspace<T: Real>(
    body: &Body<T>,
    e: &Subspace<T>,
    samples: usize,
    rng: &mut RngStream,
) -> Result<Estimate<T>> {
    if e.dim() < 2 {
        return Err(Error::invalid("as(K∩E) needs dim E ≥ 2"));
    }
    avg_section(&body.section(e)?, samples, rng)
}

/// `Ṽ_j(K, D) = ω_n ∫ ρ_K^{n−j} ρ_D^j dσ`.
pub fn dual_mixed_volume_j<T: Real>(
    k: &Body<T>,
    d: &Body<T>,
    j: usize,
    samples: usize,
    rng: &mut RngStream,
) -> Result<Estimate<T>> {
    let n = k.dim();
    Error::check_dim(n, d.dim())?;
    check_codim("j", j, 0, n)?;
    let (a, b) = ((n - j) as i32, j as i32);
    let w = omega::<T>(n);
    if let (Some(rk), Some(rd)) = (k.ball_radius(), d.ball_radius()) {
        return Ok(Estimate::exact(w * rk.powi(a) * rd.powi(b)));
    }
    quadrature::mc_mean(samples, rng, |s| {
        let u = sampling::sphere_point::<T>(n, s).into_inner();
        let (x, y) = (k.radial_unit(&u), d.radial_unit(&u));
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::Unbounded);
        }
        Ok(x.powi(a) * y.powi(b))
    })
    .map(|e| e.scale(w))
}

/// Haar average of `|K∩E|ⁿ` over `E ∈ Gr_{n−k}`, shared by `R̃_k` and `Φ̃_k`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SectionPowerMean<T: Real> {
    pub n: usize,
    pub k: usize,
    /// `∫ |K∩E|ⁿ dν(E)`.
    pub mean_power: Estimate<T>,
    /// `|K|`.
    pub volume: Estimate<T>,
    /// False when some section volume was too noisy for the first-order
    /// error propagation through the `n`-th power.
    pub delta_valid: bool,
}

impl<T: Real> SectionPowerMean<T> {
    /// `R̃_k(K) = |K|^{−(n−k)} ∫ |K∩E|ⁿ dν`.
    pub fn r_tilde(&self) -> Estimate<T> {
        let p = T::of_usize(self.n - self.k);
        self.mean_power.div(self.volume.powf(p))
    }

    /// `Φ̃_k(K) = (ω_n/ω_{n−k}) (∫ |K∩E|ⁿ dν)^{1/n}`.
    pub fn phi_tilde(&self) -> Estimate<T> {
        let c = omega::<T>(self.n) / omega::<T>(self.n - self.k);
        self.mean_power.powf(T::one() / T::of_usize(self.n)).scale(c)
    }
}

/// Importance proposal for `|K∩E|ⁿ`: the angular Gaussian of the inertia
/// matrix, under which the integrand is flat for ellipsoids. `None` when
/// the inertia matrix has no closed form or is a multiple of the identity.
fn section_proposal<T: Real>(body: &Body<T>) -> Option<sampling::AngularGaussian<T>> {
    let (_, cov) = crate::isotropic::exact_moments(body)?;
    let (hi, lo) = linalg::singular_extremes(&cov);
    if hi <= lo * T::of(1.0 + 1e-9) {
        return None;
    }
    sampling::AngularGaussian::new(&cov).ok()
}

/// Two-stage estimate of `∫ |K∩E|ⁿ dν(E)` plus `|K|`. Haar subspaces come
/// in orthogonal frames, or from [`section_proposal`] with importance
/// weights when the body is anisotropic.
pub fn section_power_mean<T: Real>(
    body: &Body<T>,
    k: usize,
    subspaces: usize,
    directions: usize,
    rng: &mut RngStream,
) -> Result<SectionPowerMean<T>> {
    let n = body.dim();
    check_codim("k", k, 1, n.saturating_sub(1))?;
    let volume = quadrature::volume(body, directions, rng)?;
    if let Some(r) = body.ball_radius() {
        let section = omega::<T>(n - k) * r.powi((n - k) as i32);
        return Ok(SectionPowerMean {
            n,
            k,
            mean_power: Estimate::exact(section.powi(n as i32)),
            volume,
            delta_valid: true,
        });
    }
    let ni = n as i32;
    let limit = T::of(DELTA_METHOD_LIMIT);
    // Second column carries n·(relative stderr) of each section volume.
    if let Some(proposal) = section_proposal(body) {
        let acc = accumulate(subspaces, 2, rng, |s, out| {
            let (e, w) = proposal.draw(n - k, s)?;
            let v = quadrature::section_volume(body, &e, directions, s)?;
            out[0] = (v.value.powi(ni) * w).as_f64();
            out[1] = (T::of_usize(n) * v.relative_stderr()).as_f64();
            Ok(())
        })?;
        let worst = acc.means()[1];
        return Ok(SectionPowerMean {
            n,
            k,
            mean_power: acc.estimate(0),
            volume,
            delta_valid: T::of(worst) <= limit,
        });
    }
    let per_frame = (n / k).max(1);
    let frames = subspaces.div_ceil(per_frame).max(2);
    let acc = accumulate(frames, 2, rng, |s, out| {
        let frame = sampling::grassmann_frame::<T>(n, n - k, s)?;
        let (mut sum, mut worst) = (0.0, 0.0f64);
        for e in &frame {
            let v = quadrature::section_volume(body, e, directions, s)?;
            sum += v.value.powi(ni).as_f64();
            worst = worst.max((T::of_usize(n) * v.relative_stderr()).as_f64());
        }
        out[0] = sum / frame.len() as f64;
        out[1] = worst;
        Ok(())
    })?;
    let worst = acc.means()[1];
    let mut mean_power = acc.estimate::<T>(0);
    mean_power.samples *= per_frame as u64;
    Ok(SectionPowerMean {
        n,
        k,
        mean_power,
        volume,
        delta_valid: T::of(worst) <= limit,
    })
}

/// `R̃_k(K)`, with the delta-method validity flag.
pub fn dual_quermass_r<T: Real>(
    body: &Body<T>,
    k: usize,
    subspaces: usize,
    directions: usize,
    rng: &mut RngStream,
) -> Result<(Estimate<T>, bool)> {
    let s = section_power_mean(body, k, subspaces, directions, rng)?;
    Ok((s.r_tilde(), s.delta_valid))
}

/// `R̃_k(B₂ⁿ) = ω_{n−k}ⁿ / ω_n^{n−k}`.
pub fn r_tilde_ball(n: usize, k: usize) -> f64 {
    let a = quadrature::unit_ball_volume(n - k);
    let b = quadrature::unit_ball_volume(n);
    a.powi(n as i32) / b.powi((n - k) as i32)
}

/// `Φ̃_k(K)`.
pub fn dual_affine_quermass_phi<T: Real>(
    body: &Body<T>,
    k: usize,
    subspaces: usize,
    directions: usize,
    rng: &mut RngStream,
) -> Result<Estimate<T>> {
    Ok(section_power_mean(body, k, subspaces, directions, rng)?.phi_tilde())
}

/// The best subspace found by local search and its value on fresh samples.
#[derive(Clone, Debug)]
pub struct Refined<T: Real> {
    pub subspace: Subspace<T>,
    pub value: Estimate<T>,
    pub steps_accepted: usize,
}

/// Values of `as(K∩E)` over sampled `E ∈ Gr_{n−k}`.
#[derive(Clone, Debug)]
pub struct GrassmannScan<T: Real> {
    pub k: usize,
    pub subspaces: Vec<Subspace<T>>,
    pub values: Vec<Estimate<T>>,
    pub argmax: usize,
    /// Largest listed value.
    pub max: Estimate<T>,
    /// Arithmetic mean of the listed values.
    pub mean: Estimate<T>,
    pub refined: Option<Refined<T>>,
}

impl<T: Real> GrassmannScan<T> {
    /// Best available lower bound for `max_E as(K∩E)`: the refined value,
    /// re-estimated on samples not used by the search, or the listed max.
    pub fn best(&self) -> Estimate<T> {
        match &self.refined {
            Some(r) if r.value.value > self.max.value => r.value,
            _ => self.max,
        }
    }

    pub fn best_subspace(&self) -> &Subspace<T> {
        match &self.refined {
            Some(r) if r.value.value > self.max.value => &r.subspace,
            _ => &self.subspaces[self.argmax],
        }
    }
}


/// Samples `subspaces` Haar subspaces of dimension `n − k`, evaluates
/// `as(K∩E)` on each, and refines the best by random Cayley rotations.
///
/// Any sampled value is a lower bound for the true maximum; the refined
/// value is re-estimated on a fresh stream so the search's selection does
/// not bias it upward.
pub fn grassmann_max_avg_section<T: Real>(
    body: &Body<T>,
    k: usize,
    subspaces: usize,
    directions: usize,
    refine: usize,
    rng: &mut RngStream,
) -> Result<GrassmannScan<T>> {
    let n = body.dim();
    check_codim("k", k, 1, n.saturating_sub(2))?;
    grassmann_max_by(n, n - k, subspaces, refine, rng, |e, s| avg_section_in_subspace(body, e, directions, s))
}

/// Maximizes an arbitrary estimated functional of `m`-dimensional subspaces
/// of R^n. `eval` receives its own stream; during refinement every candidate
/// sees a clone of the same stream.
pub fn grassmann_max_by<T: Real, F>(
    n: usize,
    m: usize,
    subspaces: usize,
    refine: usize,
    rng: &mut RngStream,
    eval: F,
) -> Result<GrassmannScan<T>>
where
    F: Fn(&Subspace<T>, &mut RngStream) -> Result<Estimate<T>> + Sync,
{
    if subspaces == 0 {
        return Err(Error::invalid("a Grassmannian scan needs at least one subspace"));
    }
    if m == 0 || m > n {
        return Err(Error::invalid(format!("subspace dimension {m} is not in 1..={n}")));
    }
    let base = rng.fork();
    let picked: Vec<Result<(Subspace<T>, Estimate<T>)>> = {
        use rayon::prelude::*;
        (0..subspaces)
            .into_par_iter()
            .map(|i| {
                let mut s = base.substream(i as u64);
                let e = sampling::grassmann_subspace::<T>(n, m, &mut s)?;
                let v = eval(&e, &mut s)?;
                Ok((e, v))
            })
            .collect()
    };
    let mut list = Vec::with_capacity(subspaces);
    let mut values = Vec::with_capacity(subspaces);
    for p in picked {
        let (e, v) = p?;
        list.push(e);
        values.push(v);
    }
    let argmax = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if v.value > values[best].value { i } else { best });
    let max = values[argmax];
    let mean = mean_of(&values);
    let flat = values.iter().all(|v| v.exact && v.value == max.value);

    let refined = if refine > 0 && !flat && m < n {
        // Common random numbers: every candidate is scored on the same
        // stream, so comparisons are not swamped by noise.
        let search = base.substream(u64::MAX);
        let mut step_rng = base.substream(u64::MAX - 1);
        let mut current = list[argmax].clone();
        let mut score = eval(&current, &mut search.clone())?.value;
        let mut step = T::of(INITIAL_CAYLEY_STEP);
        let mut accepted = 0;
        for _ in 0..refine {
            let g = DMatrix::from_fn(n, n, |_, _| step_rng.gaussian::<T>());
            let skew = (&g - g.transpose()) * (step / T::of(2.0));
            let q = linalg::cayley(&skew)?;
            let cand = Subspace::from_orthonormal(linalg::orthonormal_factor(q * current.basis()))?;
            let v = eval(&cand, &mut search.clone())?.value;
            if v > score {
                score = v;
                current = cand;
                accepted += 1;
            } else {
                step /= T::of(2.0);
            }
        }
        let value = eval(&current, &mut base.substream(u64::MAX - 2))?;
        Some(Refined { subspace: current, value, steps_accepted: accepted })
    } else {
        None
    };
    Ok(GrassmannScan { k: n - m, subspaces: list, values, argmax, max, mean, refined })
}

fn mean_of<T: Real>(values: &[Estimate<T>]) -> Estimate<T> {
    let len = T::of_usize(values.len());
    let value = values.iter().fold(T::zero(), |a, v| a + v.value) / len;
    let var = values.iter().fold(T::zero(), |a, v| a + v.stderr * v.stderr) / (len * len);
    Estimate {
        value,
        stderr: var.sqrt(),
        samples: values.iter().map(|v| v.samples).sum(),
        exact: values.iter().all(|v| v.exact),
    }
}

/// `∫ as(K∩E) dν_{n−k}(E)` by averaging over Haar subspaces. The stderr
/// covers both the subspace sampling and the inner direction sampling.
pub fn mean_avg_section<T: Real>(
    body: &Body<T>,
    k: usize,
    subspaces: usize,
    directions: usize,
    rng: &mut RngStream,
) -> Result<Estimate<T>> {
    let n = body.dim();
    check_codim("k", k, 1, n.saturating_sub(2))?;
    if let Some(r) = body.ball_radius() {
        return Ok(Estimate::exact(omega::<T>(n - k - 1) * r.powi((n - k - 1) as i32)));
    }
    let per_frame = n / k;
    let acc = accumulate(subspaces.div_ceil(per_frame).max(2), 1, rng, |s, out| {
        let frame = sampling::grassmann_frame::<T>(n, n - k, s)?;
        let mut sum = 0.0;
        for e in &frame {
            sum += avg_section_in_subspace(body, e, directions, s)?.value.as_f64();
        }
        out[0] = sum / frame.len() as f64;
        Ok(())
    })?;
    let mut est = acc.estimate::<T>(0);
    est.samples *= per_frame as u64;
    Ok(est)
}

/// The same Haar mean through the single-sphere identity
/// `∫ as(K∩E) dν = ω_{n−k−1} ∫ ρ_K^{n−k−1} dσ`.
pub fn mean_avg_section_sphere<T: Real>(body: &Body<T>, k: usize, samples: usize, rng: &mut RngStream) -> Result<Estimate<T>> {
    let n = body.dim();
    check_codim("k", k, 1, n.saturating_sub(2))?;
    let m = quadrature::radial_moment(body, T::of_usize(n - k - 1), samples, rng)?;
    Ok(m.scale(omega(n - k - 1)))
}

/// The per-body witness `γ̂ = [as(K) / (|K|^{k/n} · max_E as(K∩E))]^{1/k}`.
#[derive(Clone, Debug)]
pub struct GammaWitness<T: Real> {
    pub gamma: Estimate<T>,
    pub as_k: Estimate<T>,
    pub volume: Estimate<T>,
    pub scan: GrassmannScan<T>,
}

/// Computes `γ̂` for one body. The maximum is a sampled lower bound, so `γ̂`
/// errs on the high side of the body's true ratio.
pub fn gamma_witness<T: Real>(
    body: &Body<T>,
    k: usize,
    subspaces: usize,
    directions: usize,
    refine: usize,
    rng: &mut RngStream,
) -> Result<GammaWitness<T>> {
    let n = body.dim();
    check_codim("k", k, 1, n.saturating_sub(2))?;
    let as_k = avg_section(body, directions, rng)?;
    let volume = quadrature::volume(body, directions, rng)?;
    let scan = grassmann_max_avg_section(body, k, subspaces, directions, refine, rng)?;
    let kf = T::of_usize(k);
    let denom = volume.powf(kf / T::of_usize(n)).mul(scan.best());
    let gamma = as_k.div(denom).powf(T::one() / kf);
    Ok(GammaWitness { gamma, as_k, volume, scan })
}
