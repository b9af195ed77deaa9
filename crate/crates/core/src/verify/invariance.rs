//! Behaviour of the functionals under linear maps.

use nalgebra::DMatrix;

use crate::bodies::{Direction, Subspace};
use crate::error::{Error, Result};
use crate::functionals;
use crate::isotropic::{self, Method};
use crate::quadrature::{self, Estimate};
use crate::sampling::{self, RngStream};

use super::{transform_matrix, Ctx, Outcome, TransformKind};

/// Relative tolerance on Monte-Carlo paths for `R̃_k`.
pub const RK_TOLERANCE: f64 = 0.05;
/// Relative tolerance on Monte-Carlo paths for `L_K`.
pub const LK_TOLERANCE: f64 = 0.02;
/// Relative tolerance when both sides are closed forms.
pub const EXACT_PATH_TOLERANCE: f64 = 1e-10;
/// Relative tolerance for `L_K` when both sides are closed forms.
pub const LK_EXACT_TOLERANCE: f64 = 1e-12;
/// Directions tried by `ik-equivariance`.
pub const IK_TRIALS: usize = 10;
/// Per-direction noise band for `ik-equivariance`: the two-sided 3σ level
/// split over [`IK_TRIALS`] directions (Bonferroni).
pub const IK_NOISE_SIGMAS: f64 = 3.6425;

const TRANSFORM_STREAM: u64 = 0x7472_616e_73;

pub(crate) fn run(id: &str, ctx: &mut Ctx) -> Result<Outcome> {
    let kind = ctx.p.transform.unwrap_or(TransformKind::Random);
    let t = transform_matrix(kind, ctx.n(), &mut ctx.rng.substream(TRANSFORM_STREAM));
    let out = match id {
        "rk-invariance" => rk_invariance(ctx, &t),
        "ik-equivariance" => ik_equivariance(ctx, &t),
        "lk-invariance" => lk_invariance(ctx, &t),
        other => Err(Error::invalid(format!("{other} is not an invariance check"))),
    }?;
    let (hi, lo) = crate::linalg::singular_extremes(&t);
    Ok(out.detail("transform_cond", hi / lo).detail("transform_det", t.determinant()))
}

fn relative_gap(lhs: &Estimate<f64>, rhs: &Estimate<f64>) -> f64 {
    (lhs.value - rhs.value).abs() / rhs.value.abs()
}

fn rk_invariance(ctx: &mut Ctx, t: &DMatrix<f64>) -> Result<Outcome> {
    let k = ctx.p.need_k()?;
    let image = ctx.body.linear_image(t.clone())?;
    let (subs, inner) = (ctx.p.subspaces, ctx.p.section_samples);
    let (lhs, _) = functionals::dual_quermass_r(&image, k, subs, inner, &mut ctx.rng)?;
    let (rhs, _) = functionals::dual_quermass_r(&ctx.body, k, subs, inner, &mut ctx.rng)?;
    let rel = if lhs.exact && rhs.exact { EXACT_PATH_TOLERANCE } else { RK_TOLERANCE };
    let gap = relative_gap(&lhs, &rhs);
    // Small subspace budgets get a noise allowance on top of the fixed band.
    let noise = super::NOISE_SIGMAS * lhs.stderr.hypot(rhs.stderr);
    let tol = (rel * rhs.value.abs()).max(noise);
    Ok(Outcome::within(lhs, rhs, tol).detail("relative_gap", gap).detail("relative_tolerance", rel))
}

/// `|K∩ξ⊥|`, the radial function of the intersection body at `ξ`.
fn hyperplane_section(body: &crate::Body<f64>, xi: &Direction<f64>, samples: usize, rng: &mut RngStream) -> Result<Estimate<f64>> {
    quadrature::section_volume(body, &Subspace::hyperplane(xi)?, samples, rng)
}

fn ik_equivariance(ctx: &mut Ctx, t: &DMatrix<f64>) -> Result<Outcome> {
    let n = ctx.n();
    let image = ctx.body.linear_image(t.clone())?;
    let det = t.determinant().abs();
    let samples = ctx.p.samples;
    let mut worst: Option<(f64, Estimate<f64>, Estimate<f64>, f64)> = None;
    let mut max_gap = 0.0f64;
    let mut max_z = 0.0f64;
    let mut all_exact = true;
    for _ in 0..IK_TRIALS {
        let xi = sampling::sphere_point::<f64>(n, &mut ctx.rng);
        let lhs = hyperplane_section(&image, &xi, samples, &mut ctx.rng)?;
        // ρ_{(T⁻¹)*IK}(ξ) = ρ_{IK}(Tᵀξ/‖Tᵀξ‖) / ‖Tᵀξ‖.
        let u = t.transpose() * xi.as_vector();
        let norm = u.norm();
        let section = hyperplane_section(&ctx.body, &Direction::normalize(u)?, samples, &mut ctx.rng)?;
        let rhs = section.scale(det / norm);
        let tol = if lhs.exact && rhs.exact {
            EXACT_PATH_TOLERANCE * rhs.value.abs()
        } else {
            IK_NOISE_SIGMAS * lhs.stderr.hypot(rhs.stderr)
        };
        let sigma = lhs.stderr.hypot(rhs.stderr);
        all_exact &= lhs.exact && rhs.exact;
        let gap = (lhs.value - rhs.value).abs();
        max_gap = max_gap.max(gap / rhs.value.abs());
        if sigma > 0.0 {
            max_z = max_z.max(gap / sigma);
        }
        let score = if tol > 0.0 { gap / tol } else if gap > 0.0 { f64::MAX } else { 0.0 };
        if worst.as_ref().is_none_or(|w| score > w.0) {
            worst = Some((score, lhs, rhs, tol));
        }
    }
    let (_, lhs, rhs, tol) = worst.expect("at least one trial");
    Ok(Outcome::within(lhs, rhs, tol)
        .detail("max_relative_gap", max_gap)
        .detail("max_z", max_z)
        .detail("trials", IK_TRIALS as f64)
        .detail("exact_path", if all_exact { 1.0 } else { 0.0 }))
}

fn lk_invariance(ctx: &mut Ctx, t: &DMatrix<f64>) -> Result<Outcome> {
    let method = if ctx.p.sampled { Method::Sampled } else { Method::Auto };
    let image = ctx.body.linear_image(t.clone())?;
    let lhs = isotropic::isotropic_constant_with(&image, ctx.p.samples, &mut ctx.rng, method)?;
    let rhs = isotropic::isotropic_constant_with(&ctx.body, ctx.p.samples, &mut ctx.rng, method)?;
    let rel = if lhs.exact && rhs.exact { LK_EXACT_TOLERANCE } else { LK_TOLERANCE };
    let gap = relative_gap(&lhs, &rhs);
    Ok(Outcome::within(lhs, rhs, rel * rhs.value.abs()).detail("relative_gap", gap).detail("relative_tolerance", rel))
}
