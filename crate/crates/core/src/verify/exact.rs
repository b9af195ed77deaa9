//! Inequalities and identities whose constants are explicit.

use crate::bodies::{Body, Direction, Shape, Subspace};
use crate::error::{Error, Result};
use crate::functionals::{self, grassmann_max_by};
use crate::quadrature::{self, accumulate, unit_ball_volume as omega, Density, Estimate};
use crate::sampling;

use super::constants::{b_power, c_power, holder_constant, phi_power, varrho};
use super::{Ctx, Orientation, Outcome};

pub(crate) fn run(id: &str, ctx: &mut Ctx) -> Result<Outcome> {
    match id {
        "ball-equality-1.3" => ball_equality(ctx),
        "thm-1.3-bp" => thm_13_bp(ctx),
        "thm-1.2-bp" => thm_12_bp(ctx),
        "thm-1.5-bp" => thm_15_bp(ctx),
        "meyer" => meyer(ctx),
        "holder-bgl11" => holder_bgl11(ctx),
        "thm-5.2a-explicit" => thm_52a(ctx),
        "thm-5.2b-explicit" => thm_52b(ctx),
        "lemma-5.3-explicit" => lemma_53(ctx),
        "dual-minkowski" => dual_minkowski(ctx),
        "grinberg-bound" => grinberg(ctx),
        "m-jensen" => m_jensen(ctx),
        "dmx-identity" => dmx_identity(ctx),
        other => Err(Error::invalid(format!("{other} is not an exact check"))),
    }
}

fn volume(ctx: &mut Ctx) -> Result<Estimate<f64>> {
    quadrature::volume(&ctx.body, ctx.p.samples, &mut ctx.rng)
}

fn max_avg_section(ctx: &mut Ctx, k: usize) -> Result<Estimate<f64>> {
    let scan = functionals::grassmann_max_avg_section(
        &ctx.body,
        k,
        ctx.p.subspaces,
        ctx.p.section_samples,
        ctx.p.refine,
        &mut ctx.rng,
    )?;
    Ok(scan.best())
}

fn ball_equality(ctx: &mut Ctx) -> Result<Outcome> {
    let n = ctx.n();
    let lhs = functionals::avg_section(&ctx.body, ctx.p.samples, &mut ctx.rng)?;
    let vol = volume(ctx)?;
    let max = max_avg_section(ctx, 1)?;
    let rhs = vol.powf(1.0 / n as f64).mul(max).scale(b_power(n, 1));
    Ok(Outcome::equality(lhs, rhs))
}

fn thm_13_bp(ctx: &mut Ctx) -> Result<Outcome> {
    let (n, k) = (ctx.n(), ctx.p.need_k()?);
    let lhs = functionals::avg_section(&ctx.body, ctx.p.samples, &mut ctx.rng)?;
    let vol = volume(ctx)?;
    let max = max_avg_section(ctx, k)?;
    let rhs = vol.powf(k as f64 / n as f64).mul(max).scale(b_power(n, k));
    Ok(Outcome::inequality(Orientation::Le, lhs, rhs)
        .estimate_detail("max_section", max)
        .detail("d_ovr", 1.0))
}

fn thm_12_bp(ctx: &mut Ctx) -> Result<Outcome> {
    let (n, k) = (ctx.n(), ctx.p.need_k()?);
    let f = ctx.p.density.unwrap_or(Density::One);
    let lhs = quadrature::weighted_radial_integral(&ctx.body, f, 0, ctx.p.samples, &mut ctx.rng, None)?;
    let vol = volume(ctx)?;
    let body = &ctx.body;
    let inner = ctx.p.section_samples;
    let scan = grassmann_max_by(n, n - k, ctx.p.subspaces, ctx.p.refine, &mut ctx.rng, |e, s| {
        quadrature::weighted_radial_integral(body, f, k, inner, s, Some(e))
    })?;
    let max = scan.best();
    let rhs = vol.powf(k as f64 / n as f64).mul(max).scale(c_power(n, k));
    Ok(Outcome::inequality(Orientation::Le, lhs, rhs)
        .estimate_detail("max_section", max)
        .detail("d_ovr", 1.0))
}

fn thm_15_bp(ctx: &mut Ctx) -> Result<Outcome> {
    let (n, k, r) = (ctx.n(), ctx.p.need_k()?, ctx.p.need_r()?);
    let lhs = functionals::avg_section_r(&ctx.body, r, ctx.p.samples, &mut ctx.rng)?;
    let vol = volume(ctx)?;
    let body = &ctx.body;
    let inner = ctx.p.section_samples;
    let scan = grassmann_max_by(n, n - k, ctx.p.subspaces, ctx.p.refine, &mut ctx.rng, |e, s| {
        functionals::avg_section_r(&body.section(e)?, r, inner, s)
    })?;
    let max = scan.best();
    let rhs = vol.powf(k as f64 / n as f64).mul(max).scale(phi_power(n, k, r));
    Ok(Outcome::inequality(Orientation::Le, lhs, rhs)
        .estimate_detail("max_section", max)
        .detail("d_ovr", 1.0))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn meyer(ctx: &mut Ctx) -> Result<Outcome> {
    let n = ctx.n();
    let vol = volume(ctx)?;
    let mut product = Estimate::exact(factorial(n) / (n as f64).powi(n as i32));
    for i in 0..n {
        let h = Subspace::hyperplane(&Direction::axis(n, i))?;
        let s = quadrature::section_volume(&ctx.body, &h, ctx.p.samples, &mut ctx.rng)?;
        product = product.mul(s);
    }
    let lhs = vol.powf((n - 1) as f64);
    Ok(Outcome::inequality(Orientation::Ge, lhs, product))
}

/// `(ω_n·mean)^p` and its gradient with respect to `mean`.
fn dmv_power(w: f64, mean: f64, p: f64) -> (f64, f64) {
    let v = (w * mean).powf(p);
    (v, if mean == 0.0 { 0.0 } else { p * v / mean })
}

fn holder_bgl11(ctx: &mut Ctx) -> Result<Outcome> {
    let (n, k) = (ctx.n(), ctx.p.need_k()?);
    let w = omega(n);
    let (a, b, c) = ((n - 1) as i32, n as i32, (n - k - 1) as i32);
    let kf = k as f64;
    // Moments of one sample: the chain holds exactly for the empirical measure.
    let (m, lhs, rhs) = if let Some(r) = ctx.body.ball_radius() {
        let m = [r.powi(a), r.powi(b), r.powi(c)];
        let lhs = Estimate::exact((w * m[0]).powf(kf + 1.0));
        let rhs = Estimate::exact((w * m[1]).powf(kf) * w * m[2]);
        (m, lhs, rhs)
    } else {
        let body = &ctx.body;
        let acc = accumulate(ctx.p.samples, 3, &mut ctx.rng, |s, out| {
            let u = sampling::sphere_point::<f64>(n, s).into_inner();
            let rho = finite(body.radial_unit(&u))?;
            out[0] = rho.powi(a);
            out[1] = rho.powi(b);
            out[2] = rho.powi(c);
            Ok(())
        })?;
        let m = [acc.mean(0), acc.mean(1), acc.mean(2)];
        let (l, dl) = dmv_power(w, m[0], kf + 1.0);
        let (v, dv) = dmv_power(w, m[1], kf);
        let rhs_value = v * w * m[2];
        let lhs = acc.function_estimate(l, &[dl, 0.0, 0.0]);
        let rhs = acc.function_estimate(rhs_value, &[0.0, dv * w * m[2], v * w]);
        (m, lhs, rhs)
    };
    let mut out = Outcome::inequality(Orientation::Le, lhs, rhs).coupled().detail("sample_volume", w * m[1]);
    if let Some(vol) = quadrature::closed_form_volume(&ctx.body) {
        out = out.detail("rhs_closed_form_volume", vol.powf(kf) * w * m[2]);
    }
    Ok(out)
}

fn finite(x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Unbounded)
    }
}

fn thm_52a(ctx: &mut Ctx) -> Result<Outcome> {
    let (n, k) = (ctx.n(), ctx.p.need_k()?);
    let a = functionals::avg_section(&ctx.body, ctx.p.samples, &mut ctx.rng)?;
    let vol = volume(ctx)?;
    let mean = functionals::mean_avg_section(&ctx.body, k, ctx.p.subspaces, ctx.p.section_samples, &mut ctx.rng)?;
    let lhs = a.powf((k + 1) as f64);
    let rhs = vol.powf(k as f64).mul(mean).scale(holder_constant(n, k));
    Ok(Outcome::inequality(Orientation::Le, lhs, rhs).estimate_detail("grassmann_mean", mean))
}

fn thm_52b(ctx: &mut Ctx) -> Result<Outcome> {
    let (n, k) = (ctx.n(), ctx.p.need_k()?);
    let a = functionals::avg_section(&ctx.body, ctx.p.samples, &mut ctx.rng)?;
    let lhs = functionals::mean_avg_section(&ctx.body, k, ctx.p.subspaces, ctx.p.section_samples, &mut ctx.rng)?;
    let rhs = a.powf((n - k - 1) as f64 / (n - 1) as f64).scale(varrho(n, k));
    Ok(Outcome::inequality(Orientation::Le, lhs, rhs))
}

fn lemma_53(ctx: &mut Ctx) -> Result<Outcome> {
    let n = ctx.n();
    let lhs = functionals::avg_section(&ctx.body, ctx.p.samples, &mut ctx.rng)?;
    let vol = volume(ctx)?;
    let radius = ctx.body.circumradius();
    let rhs = vol.scale(omega(n - 1) / (omega(n) * radius.value));
    Ok(Outcome::inequality(Orientation::Ge, lhs, rhs)
        .detail("circumradius", radius.value)
        .detail("circumradius_exact", if radius.exact { 1.0 } else { 0.0 }))
}

/// The comparison body: the cross-polytope, or the cube when `K` is itself a
/// cross-polytope.
pub(crate) fn minkowski_partner(body: &Body<f64>) -> Result<Body<f64>> {
    let n = body.dim();
    match body.shape() {
        Shape::CrossPolytope { .. } => Body::cube(n, 0.5),
        _ => Body::cross_polytope(n, 1.0),
    }
}

fn dual_minkowski(ctx: &mut Ctx) -> Result<Outcome> {
    let n = ctx.n();
    let d = minkowski_partner(&ctx.body)?;
    let w = omega(n);
    let nf = n as f64;
    let body = &ctx.body;
    let acc = accumulate(ctx.p.samples, 3, &mut ctx.rng, |s, out| {
        let u = sampling::sphere_point::<f64>(n, s).into_inner();
        let (rk, rd) = (finite(body.radial_unit(&u))?, finite(d.radial_unit(&u))?);
        out[0] = rk.powi(n as i32 - 1) * rd;
        out[1] = rk.powi(n as i32);
        out[2] = rd.powi(n as i32);
        Ok(())
    })?;
    let (m0, m1, m2) = (acc.mean(0), acc.mean(1), acc.mean(2));
    let lhs = acc.function_estimate(w * m0, &[w, 0.0, 0.0]);
    let (vk, dk) = dmv_power(1.0, w * m1, (nf - 1.0) / nf);
    let (vd, dd) = dmv_power(1.0, w * m2, 1.0 / nf);
    let rhs = acc.function_estimate(vk * vd, &[0.0, w * dk * vd, w * vk * dd]);
    let mut out = Outcome::inequality(Orientation::Le, lhs, rhs).coupled();
    if let (Some(a), Some(b)) = (quadrature::closed_form_volume(body), quadrature::closed_form_volume(&d)) {
        out = out.detail("rhs_closed_form_volumes", a.powf((nf - 1.0) / nf) * b.powf(1.0 / nf));
    }
    Ok(out)
}

fn grinberg(ctx: &mut Ctx) -> Result<Outcome> {
    let (n, k) = (ctx.n(), ctx.p.need_k()?);
    let (lhs, valid) = functionals::dual_quermass_r(&ctx.body, k, ctx.p.subspaces, ctx.p.section_samples, &mut ctx.rng)?;
    let rhs = Estimate::exact(functionals::r_tilde_ball(n, k));
    Ok(Outcome::inequality(Orientation::Le, lhs, rhs).detail("delta_method_valid", if valid { 1.0 } else { 0.0 }))
}

fn m_jensen(ctx: &mut Ctx) -> Result<Outcome> {
    let n = ctx.n();
    let rhs = Estimate::exact(1.0);
    if let Some(r) = ctx.body.ball_radius() {
        return Ok(Outcome::inequality(Orientation::Ge, Estimate::exact(r.recip() * r), rhs));
    }
    let body = &ctx.body;
    let acc = accumulate(ctx.p.samples, 2, &mut ctx.rng, |s, out| {
        let u = sampling::sphere_point::<f64>(n, s).into_inner();
        let rho = finite(body.radial_unit(&u))?;
        out[0] = rho.recip();
        out[1] = rho;
        Ok(())
    })?;
    let (a, b) = (acc.mean(0), acc.mean(1));
    let lhs = acc.function_estimate(a * b, &[b, a]);
    Ok(Outcome::inequality(Orientation::Ge, lhs, rhs).coupled().detail("m", a).detail("mean_radial", b))
}

fn dmx_identity(ctx: &mut Ctx) -> Result<Outcome> {
    let (n, k) = (ctx.n(), ctx.p.need_k()?);
    let ball = Body::ball(n, 1.0)?;
    if k == 0 {
        // Both sides read the same directions, so they agree to rounding.
        let lhs = functionals::avg_section(&ctx.body, ctx.p.samples, &mut ctx.rng.clone())?;
        let v = functionals::dual_mixed_volume_j(&ctx.body, &ball, 1, ctx.p.samples, &mut ctx.rng.clone())?;
        let rhs = v.scale(omega(n - 1) / omega(n));
        return Ok(Outcome::equality(lhs, rhs));
    }
    let lhs = functionals::mean_avg_section(&ctx.body, k, ctx.p.subspaces, ctx.p.section_samples, &mut ctx.rng)?;
    let v = functionals::dual_mixed_volume_j(&ctx.body, &ball, k + 1, ctx.p.samples, &mut ctx.rng)?;
    let rhs = v.scale(omega(n - k - 1) / omega(n));
    Ok(Outcome::equality(lhs, rhs))
}
