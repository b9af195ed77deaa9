//! Estimates of the constants that the inequalities leave unnamed.
//!
//! Each check solves its inequality for the constant and reports the value
//! the body requires. Where the inequality holds "for all E", the required
//! constant is a supremum over `E`, and the sampled value is a lower bound.

use nalgebra::DVector;

use crate::bodies::{Body, Subspace};
use crate::error::{Error, Result};
use crate::functionals::{self, grassmann_max_by};
use crate::isotropic;
use crate::quadrature::{self, Estimate};
use crate::sampling::{self, RngStream};

use super::constants::{b_power, c_power, h};
use super::{Ctx, Orientation, Outcome};

/// Window asserted for `γ̂`.
pub const GAMMA_WINDOW: (f64, f64) = (0.0, 3.0);
/// Window asserted for the ratios of `as` and `L_K` in isotropic position.
pub const RATIO_WINDOW: (f64, f64) = (0.05, 20.0);
/// Random hyperplanes tried by `prop-4.3-ratios` besides `e₁⊥`.
pub const RATIO_DIRECTIONS: usize = 4;

pub(crate) fn run(id: &str, ctx: &mut Ctx) -> Result<Outcome> {
    match id {
        "gamma-witness" => gamma(ctx),
        "thm-1.4-c1" => thm_14(ctx),
        "thm-1.6-c2" => thm_16(ctx),
        "lemma-4.1-c0" => lemma_41(ctx),
        "uniform-cover-c0" => uniform_cover(ctx),
        "thm-4.2-c2" => thm_42(ctx),
        "dp-lower-c4" => dp_lower(ctx),
        "prop-4.3-ratios" => prop_43(ctx),
        "thm-5.4-c" | "thm-1.8" => radius_bounds(ctx),
        "thm-1.9-c6" => iso_upper(ctx),
        "remark-5.7-iso" => iso_lower(ctx),
        "m-restriction-c" => m_restriction(ctx),
        "thm-4.6" => thm_46(ctx),
        other => Err(Error::invalid(format!("{other} is not an empirical check"))),
    }
}

/// `as(K)`, `|K|^{k/n}·max_E as(K∩E)` and `γ̂`.
struct Witness {
    lhs: Estimate<f64>,
    rhs: Estimate<f64>,
    gamma: Estimate<f64>,
    refined: bool,
}

fn witness(ctx: &mut Ctx) -> Result<Witness> {
    let (n, k) = (ctx.n(), ctx.p.need_k()?);
    let w = functionals::gamma_witness(
        &ctx.body,
        k,
        ctx.p.subspaces,
        ctx.p.section_samples,
        ctx.p.refine,
        &mut ctx.rng,
    )?;
    let rhs = w.volume.powf(k as f64 / n as f64).mul(w.scan.best());
    Ok(Witness {
        lhs: w.as_k.to_f64(),
        rhs: rhs.to_f64(),
        gamma: w.gamma.to_f64(),
        refined: w.scan.refined.is_some(),
    })
}

fn gamma(ctx: &mut Ctx) -> Result<Outcome> {
    let w = witness(ctx)?;
    let (n, k) = (ctx.n(), ctx.p.need_k()?);
    let b = b_power(n, k).powf(1.0 / k as f64);
    Ok(Outcome::constant(Orientation::Le, w.lhs, w.rhs, w.gamma, Some(GAMMA_WINDOW))
        .detail("b_nk", b)
        .detail("refined", if w.refined { 1.0 } else { 0.0 }))
}

fn thm_14(ctx: &mut Ctx) -> Result<Outcome> {
    let w = witness(ctx)?;
    let (n, k) = (ctx.n(), ctx.p.need_k()?);
    let ht = h(n as f64 / k as f64);
    // ∫ρ^{n−1}dθ and ∫_{S∩E}ρ^{n−k−1}dθ differ from as(K) and as(K∩E) by
    // the factor (c_{n,k}/b_{n,k})^k.
    let ratio = (c_power(n, k) / b_power(n, k)).powf(1.0 / k as f64);
    let c1 = w.gamma.scale(ratio / ht);
    Ok(Outcome::constant(Orientation::Le, w.lhs, w.rhs, c1, None)
        .detail("h", ht)
        .detail("gamma", w.gamma.value)
        .detail("c1_from_gamma_bound", w.gamma.value / ht))
}

fn thm_16(ctx: &mut Ctx) -> Result<Outcome> {
    let w = witness(ctx)?;
    let l = isotropic::isotropic_constant(&ctx.body, ctx.p.samples, &mut ctx.rng)?;
    let c2 = w.gamma.div(l);
    Ok(Outcome::constant(Orientation::Le, w.lhs, w.rhs, c2, None)
        .detail("gamma", w.gamma.value)
        .estimate_detail("l_k", l))
}

fn thm_46(ctx: &mut Ctx) -> Result<Outcome> {
    let w = witness(ctx)?;
    let (n, k) = (ctx.n(), ctx.p.need_k()?);
    let ht = h(n as f64 / k as f64);
    Ok(Outcome::constant(Orientation::Le, w.lhs, w.rhs, w.gamma.scale(1.0 / ht), None)
        .detail("gamma", w.gamma.value)
        .detail("h", ht))
}

/// `max` of a per-subspace ratio over `Gr_{m}`, or its value on a fixed
/// coordinate subspace.
fn sup_over_subspaces<F>(ctx: &mut Ctx, m: usize, coordinate: Option<Subspace<f64>>, eval: F) -> Result<Estimate<f64>>
where
    F: Fn(&Subspace<f64>, &mut RngStream) -> Result<Estimate<f64>> + Sync,
{
    match coordinate {
        Some(e) => eval(&e, &mut ctx.rng),
        None => Ok(grassmann_max_by(ctx.n(), m, ctx.p.subspaces, ctx.p.refine, &mut ctx.rng, eval)?.best()),
    }
}

fn lemma_41(ctx: &mut Ctx) -> Result<Outcome> {
    let (n, k) = (ctx.n(), ctx.p.need_k()?);
    let vol = quadrature::volume(&ctx.body, ctx.p.samples, &mut ctx.rng)?;
    let coordinate = if ctx.p.coordinate { Some(Subspace::coordinate(n, &(k..n).collect::<Vec<_>>())?) } else { None };
    let body = ctx.body.clone();
    let inner = ctx.p.section_samples;
    let fixed = ctx.p.coordinate;
    // |K∩E||K∩ξ⊥| / |K∩E∩ξ⊥| for ξ in E (the first basis vector of a
    // coordinate E, otherwise a random unit vector of E).
    let ratio = sup_over_subspaces(ctx, n - k, coordinate, |e, s| {
        let u = if fixed {
            DVector::from_fn(n - k, |i, _| if i == 0 { 1.0 } else { 0.0 })
        } else {
            sampling::sphere_point::<f64>(n - k, s).into_inner()
        };
        let xi = crate::Direction::normalize(e.embed(&u))?;
        let a = quadrature::section_volume(&body, e, inner, s)?;
        let b = quadrature::section_volume(&body, &Subspace::hyperplane(&xi)?, inner, s)?;
        let c = quadrature::section_volume(&body, &e.without(&xi)?, inner, s)?;
        Ok(a.mul(b).div(c))
    })?;
    let c0 = ratio.div(vol).powf(1.0 / (k + 1) as f64);
    Ok(Outcome::constant(Orientation::Le, ratio, vol, c0, None))
}

/// `|K ∩ E_τ|` with `E_τ = span{e_j : j ∈ τ}⊥`.
fn coordinate_section(body: &Body<f64>, tau: &[usize], samples: usize, rng: &mut RngStream) -> Result<Estimate<f64>> {
    let n = body.dim();
    let rest: Vec<usize> = (0..n).filter(|j| !tau.contains(j)).collect();
    quadrature::section_volume(body, &Subspace::coordinate(n, &rest)?, samples, rng)
}

/// Checks that `sets` form an `s`-uniform cover of `sigma`.
fn uniform_multiplicity(sets: &[Vec<usize>], sigma: &[usize]) -> Option<usize> {
    let count = |j: &usize| sets.iter().filter(|t| t.contains(j)).count();
    let s = count(sigma.first()?);
    let inside = sets.iter().all(|t| t.iter().all(|j| sigma.contains(j)));
    (inside && s > 0 && sigma.iter().all(|j| count(j) == s)).then_some(s)
}

fn uniform_cover(ctx: &mut Ctx) -> Result<Outcome> {
    let k = ctx.p.need_k()?;
    let d = k + 1;
    let sigma: Vec<usize> = (0..d).collect();
    let mut covers: Vec<(&str, Vec<Vec<usize>>)> = vec![("split", vec![(0..k).collect(), vec![k]])];
    covers.push(("singletons", sigma.iter().map(|&j| vec![j]).collect()));
    if d >= 3 {
        covers.push(("cyclic_pairs", (0..d).map(|j| vec![j, (j + 1) % d]).collect()));
    }
    let samples = ctx.p.samples;
    let vol = quadrature::volume(&ctx.body, samples, &mut ctx.rng)?;
    let whole = coordinate_section(&ctx.body, &sigma, samples, &mut ctx.rng)?;
    let mut best: Option<(Estimate<f64>, Estimate<f64>, Estimate<f64>)> = None;
    let mut details = Vec::new();
    for (name, sets) in &covers {
        let s = uniform_multiplicity(sets, &sigma).ok_or_else(|| Error::invalid("not a uniform cover"))?;
        let t = sets.len();
        let mut lhs = Estimate::exact(1.0);
        for set in sets {
            lhs = lhs.mul(coordinate_section(&ctx.body, set, samples, &mut ctx.rng)?);
        }
        let rhs = whole.powf(s as f64).mul(vol.powf((t - s) as f64));
        let c0 = lhs.div(rhs).powf(1.0 / (d * s) as f64).scale(s as f64 / t as f64);
        details.push((name.to_string(), c0.value));
        if best.as_ref().is_none_or(|b| c0.value > b.2.value) {
            best = Some((lhs, rhs, c0));
        }
    }
    let (lhs, rhs, c0) = best.expect("at least one cover");
    let mut out = Outcome::constant(Orientation::Le, lhs, rhs, c0, None);
    for (name, v) in details {
        out = out.detail(&format!("c0_{name}"), v);
    }
    Ok(out)
}

fn thm_42(ctx: &mut Ctx) -> Result<Outcome> {
    let (n, k) = (ctx.n(), ctx.p.need_k()?);
    let a = functionals::avg_section(&ctx.body, ctx.p.samples, &mut ctx.rng)?;
    let vol = quadrature::volume(&ctx.body, ctx.p.samples, &mut ctx.rng)?;
    let body = ctx.body.clone();
    let inner = ctx.p.section_samples;
    let ratio = sup_over_subspaces(ctx, n - k, None, |e, s| {
        let v = quadrature::section_volume(&body, e, inner, s)?;
        let q = functionals::avg_section_in_subspace(&body, e, inner, s)?;
        Ok(v.div(q))
    })?;
    let lhs = ratio.mul(a);
    let c2 = lhs.div(vol).powf(1.0 / k as f64);
    Ok(Outcome::constant(Orientation::Le, lhs, vol, c2, None))
}

fn dp_lower(ctx: &mut Ctx) -> Result<Outcome> {
    let (n, k) = (ctx.n(), ctx.p.need_k()?);
    let (rk, valid) = functionals::dual_quermass_r(&ctx.body, k, ctx.p.subspaces, ctx.p.section_samples, &mut ctx.rng)?;
    let l = isotropic::isotropic_constant(&ctx.body, ctx.p.samples, &mut ctx.rng)?;
    let e = 1.0 / (k * n) as f64;
    let c4 = l.mul(rk.powf(e));
    let rhs = l.powf(-((k * n) as f64));
    Ok(Outcome::constant(Orientation::Ge, rk, rhs, c4, None)
        .estimate_detail("l_k", l)
        .detail("alpha", rk.value.powf(e))
        .detail("delta_method_valid", if valid { 1.0 } else { 0.0 }))
}

fn prop_43(ctx: &mut Ctx) -> Result<Outcome> {
    let n = ctx.n();
    let iso = isotropic::isotropic_position(&ctx.body, ctx.p.samples, &mut ctx.rng)?;
    let l = iso.l_k;
    let a = functionals::avg_section(&iso.body, ctx.p.samples, &mut ctx.rng)?;
    let whole = a.mul(l);
    let mut sections = Vec::new();
    let mut dirs = vec![crate::Direction::axis(n, 0)];
    for _ in 0..RATIO_DIRECTIONS {
        dirs.push(sampling::sphere_point::<f64>(n, &mut ctx.rng));
    }
    for xi in &dirs {
        let e = Subspace::hyperplane(xi)?;
        let s = functionals::avg_section_in_subspace(&iso.body, &e, ctx.p.section_samples, &mut ctx.rng)?;
        sections.push(s.mul(l.powf(2.0)));
    }
    let (lo, hi) = RATIO_WINDOW;
    let margin = |e: &Estimate<f64>| (e.value - lo).min(hi - e.value);
    let worst = sections.iter().copied().fold(whole, |w, e| if margin(&e) < margin(&w) { e } else { w });
    let smin = sections.iter().map(|e| e.value).fold(f64::INFINITY, f64::min);
    let smax = sections.iter().map(|e| e.value).fold(f64::NEG_INFINITY, f64::max);
    let mut out = Outcome::constant(Orientation::Eq, whole, sections[0], worst, Some(RATIO_WINDOW))
        .estimate_detail("as_times_l", whole)
        .detail("section_ratio_min", smin)
        .detail("section_ratio_max", smax)
        .detail("isotropy_certificate", iso.certificate);
    out = out.estimate_detail("l_k", l);
    Ok(out)
}

/// `X = |K|^{k/n} ∫as(K∩E)dν / as(K)`.
fn section_mean_ratio(body: &Body<f64>, k: usize, samples: usize, rng: &mut RngStream) -> Result<(Estimate<f64>, Estimate<f64>, Estimate<f64>)> {
    let n = body.dim();
    let a = functionals::avg_section(body, samples, rng)?;
    let vol = quadrature::volume(body, samples, rng)?;
    let mean = functionals::mean_avg_section_sphere(body, k, samples, rng)?;
    let lhs = vol.powf(k as f64 / n as f64).mul(mean);
    Ok((lhs, a, lhs.div(a)))
}

fn radius_bounds(ctx: &mut Ctx) -> Result<Outcome> {
    let (n, k) = (ctx.n(), ctx.p.need_k()?);
    let (lhs, a, x) = section_mean_ratio(&ctx.body, k, ctx.p.samples, &mut ctx.rng)?;
    let vol = quadrature::volume(&ctx.body, ctx.p.samples, &mut ctx.rng)?;
    let radius = ctx.body.circumradius();
    let p = vol.powf(-1.0 / n as f64).scale(radius.value);
    let sn = (n as f64).sqrt();
    let lower = x.powf(1.0 / k as f64).mul(p).scale(1.0 / sn);
    let upper = x.powf((n - 1) as f64 / k as f64).div(p).scale(sn);
    Ok(Outcome::constant(Orientation::Le, lhs, a, upper, None)
        .estimate_detail("c_lower_max", lower)
        .detail("p", p.value)
        .detail("circumradius_exact", if radius.exact { 1.0 } else { 0.0 }))
}

fn iso_upper(ctx: &mut Ctx) -> Result<Outcome> {
    let k = ctx.p.need_k()?;
    let iso = isotropic::isotropic_position(&ctx.body, ctx.p.samples, &mut ctx.rng)?;
    let (lhs, a, x) = section_mean_ratio(&iso.body, k, ctx.p.samples, &mut ctx.rng)?;
    let c6 = x.powf(1.0 / k as f64);
    Ok(Outcome::constant(Orientation::Le, lhs, a, c6, None).detail("isotropy_certificate", iso.certificate))
}

fn iso_lower(ctx: &mut Ctx) -> Result<Outcome> {
    let (n, k) = (ctx.n(), ctx.p.need_k()?);
    let iso = isotropic::isotropic_position(&ctx.body, ctx.p.samples, &mut ctx.rng)?;
    let (lhs, a, x) = section_mean_ratio(&iso.body, k, ctx.p.samples, &mut ctx.rng)?;
    let c_n = x.powf(-1.0 / k as f64);
    let c = c_n.div(iso.l_k).scale(1.0 / (n as f64).sqrt());
    Ok(Outcome::constant(Orientation::Ge, lhs, a, c, None)
        .detail("c_n", c_n.value)
        .estimate_detail("l_k", iso.l_k)
        .detail("isotropy_certificate", iso.certificate))
}

fn m_restriction(ctx: &mut Ctx) -> Result<Outcome> {
    let (n, k) = (ctx.n(), ctx.p.need_k()?);
    let s = n - k;
    let m = quadrature::m_value(&ctx.body, ctx.p.samples, &mut ctx.rng)?;
    let body = ctx.body.clone();
    let inner = ctx.p.section_samples;
    let restricted = sup_over_subspaces(ctx, s, None, |f, st| quadrature::m_value(&body.section(f)?, inner, st))?;
    let rhs = m.scale((n as f64 / s as f64).sqrt());
    let c = restricted.div(rhs);
    Ok(Outcome::constant(Orientation::Le, restricted, rhs, c, None).detail("s", s as f64))
}
