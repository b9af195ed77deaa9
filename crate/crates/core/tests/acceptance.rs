//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use avgsect::functionals;
use avgsect::isotropic::{self, Method};
use avgsect::quadrature;
use avgsect::sampling;
use avgsect::verify::{self, Budgets, Params, SuiteConfig, TransformKind, Verdict};
use avgsect::{Body, BodyDesc, RngStream, Subspace};
use nalgebra::{DMatrix, DVector};

type Outcome = Result<String, String>;

/// `ω_m` by the two-step recursion `ω_m = (2π/m) ω_{m−2}`.
fn omega(m: usize) -> f64 {
    match m {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / m as f64 * omega(m - 2),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn desc(json: &str) -> BodyDesc {
    serde_json::from_str(json).expect("valid descriptor")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ball_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = RngStream::new(1, 1);
    let mut worst = 0.0f64;
    for n in 2..=10 {
        let ball = Body::<f64>::ball(n, 1.0).map_err(|e| e.to_string())?;
        let a = functionals::avg_section(&ball, 100, &mut rng).map_err(|e| e.to_string())?;
        worst = worst.max(rel(a.value, omega(n - 1)));
        for j in 1..=3usize.min(n - 1) {
            let ar = functionals::avg_section_r(&ball, j, 100, &mut rng).map_err(|e| e.to_string())?;
            worst = worst.max(rel(ar.value, omega(n - j)));
            let (rk, _) = functionals::dual_quermass_r(&ball, j, 10, 100, &mut rng).map_err(|e| e.to_string())?;
            let want = omega(n - j).powi(n as i32) / omega(n).powi((n - j) as i32);
            worst = worst.max(rel(rk.value, want));
            ensure(a.exact && ar.exact && rk.exact, || format!("n={n} j={j}: a sampled path was used"))?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-12, || format!("max relative error {worst:e}"))?;
    ensure(secs < 1.0, || format!("took {secs:.2} s"))?;
    Ok(format!("max relative error {worst:.1e}, {secs:.3} s"))
}

fn ball_equality() -> Outcome {
    let mut worst = 0.0f64;
    for n in 3..=8 {
        let r = verify::run_check("ball-equality-1.3", &desc(r#"{"type":"ball"}"#), &Params::new(n, 1, &Budgets::default()))
            .map_err(|e| e.to_string())?;
        worst = worst.max(r.slack.abs());
    }
    ensure(worst <= 1e-12, || format!("max |slack| {worst:e}"))?;
    Ok(format!("max |slack| {worst:.1e} over n = 3..8"))
}

fn ellipsoid_sections() -> Outcome {
    let mut rng = RngStream::new(3, 0);
    let mut worst_secs = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for n in 3..=6 {
        let start = Instant::now();
        for _ in 0..20 {
            let u = sampling::haar_orthogonal::<f64>(n, &mut rng);
            let eig = DVector::from_fn(n, |_, _| 0.25 + 3.75 * rng.uniform::<f64>());
            let m = &u * DMatrix::from_diagonal(&eig) * u.transpose();
            let m = (&m + m.transpose()) * 0.5;
            let body = Body::ellipsoid(m.clone()).map_err(|e| e.to_string())?;
            let xi = sampling::sphere_point::<f64>(n, &mut rng);
            let e = Subspace::hyperplane(&xi).map_err(|e| e.to_string())?;
            let section = body.section(&e).map_err(|e| e.to_string())?;
            let mc = quadrature::volume_by_sampling(&section, 200_000, &mut rng).map_err(|e| e.to_string())?;
            let b = e.basis();
            let want = omega(n - 1) / (b.transpose() * &m * b).determinant().sqrt();
            let tol = (0.01 * want).max(3.0 * mc.stderr);
            let gap = (mc.value - want).abs();
            worst_ratio = worst_ratio.max(gap / tol);
            ensure(gap <= tol, || format!("n={n}: {} vs {want} (tol {tol:e})", mc.value))?;
        }
        worst_secs = worst_secs.max(start.elapsed().as_secs_f64() / 20.0);
    }
    ensure(worst_secs < 10.0, || format!("{worst_secs:.1} s per case"))?;
    Ok(format!("80 cases, worst gap/tolerance {worst_ratio:.2}, {worst_secs:.3} s per case"))
}

const EXACT_CHECKS: &[&str] = &[
    "meyer",
    "holder-bgl11",
    "dual-minkowski",
    "thm-5.2a-explicit",
    "thm-5.2b-explicit",
    "lemma-5.3-explicit",
    "m-jensen",
    "grinberg-bound",
    "dmx-identity",
    "thm-1.2-bp",
    "thm-1.3-bp",
    "thm-1.5-bp",
    "ball-equality-1.3",
];

fn exact_suite() -> Outcome {
    let start = Instant::now();
    let mut config = verify::default_suite();
    config.checks = Some(EXACT_CHECKS.iter().map(|s| s.to_string()).collect());
    let reports = verify::run_suite(&config).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let mut counts = [0usize; 3];
    for r in &reports {
        ensure(r.error.is_none(), || format!("{} on {}: {:?}", r.check_id, r.body.label(), r.error))?;
        ensure(r.verdict != Verdict::Fail, || format!("{} failed on {} n={}", r.check_id, r.body.label(), r.params.n))?;
        if r.verdict == Verdict::Indeterminate {
            ensure(r.slack.abs() < 3.0 * r.slack_stderr, || {
                format!("{} on {}: indeterminate with |slack| {} ≥ 3σ", r.check_id, r.body.label(), r.slack)
            })?;
            counts[1] += 1;
        } else {
            counts[0] += 1;
        }
    }
    ensure(secs < 300.0, || format!("took {secs:.0} s"))?;
    Ok(format!("{} reports: {} pass, {} indeterminate, 0 fail, {secs:.0} s", reports.len(), counts[0], counts[1]))
}

fn invariance() -> Outcome {
    let budgets = Budgets { subspaces: 2000, ..Budgets::default() };
    let mut worst_rk = 0.0f64;
    let mut cases = 0;
    let bodies = [
        r#"{"type":"cube","half_side":0.5}"#,
        r#"{"type":"cross_polytope"}"#,
        r#"{"type":"simplex"}"#,
        r#"{"type":"graded_ellipsoid"}"#,
    ];
    for body in bodies {
        for (n, k) in [(3, 1), (4, 1), (4, 2), (6, 1), (6, 2)] {
            let p = Params::new(n, 1, &budgets).with_k(k).with_transform(TransformKind::Random);
            let r = verify::run_check("rk-invariance", &desc(body), &p).map_err(|e| e.to_string())?;
            let gap = r.details["relative_gap"];
            ensure(r.details["transform_cond"] <= 3.0 + 1e-9, || "transform too ill-conditioned".into())?;
            ensure(gap <= 0.05, || format!("rk {body} n={n} k={k}: gap {gap:.4}"))?;
            worst_rk = worst_rk.max(gap);
            cases += 1;
        }
    }
    let mut worst_ik_exact = 0.0f64;
    for (body, kind) in [
        (r#"{"type":"ellipsoid","semi_axes":[1,2,3]}"#, TransformKind::Diagonal),
        (r#"{"type":"graded_ellipsoid","dim":5}"#, TransformKind::Random),
        (r#"{"type":"ball","dim":4}"#, TransformKind::Random),
    ] {
        let d = desc(body);
        let n = d.dim().unwrap_or(4);
        let r = verify::run_check("ik-equivariance", &d, &Params::new(n, 1, &Budgets::default()).with_transform(kind))
            .map_err(|e| e.to_string())?;
        ensure(r.details["exact_path"] == 1.0, || format!("ik {body}: expected the exact path"))?;
        worst_ik_exact = worst_ik_exact.max(r.details["max_relative_gap"]);
    }
    ensure(worst_ik_exact <= 1e-10, || format!("ik exact gap {worst_ik_exact:e}"))?;
    for body in [r#"{"type":"cube","half_side":0.5}"#, r#"{"type":"cross_polytope"}"#, r#"{"type":"simplex"}"#] {
        for n in [3, 5] {
            let r = verify::run_check("ik-equivariance", &desc(body), &Params::new(n, 1, &Budgets::default()))
                .map_err(|e| e.to_string())?;
            ensure(r.verdict == Verdict::Pass, || format!("ik {body} n={n}: gap beyond 3σ"))?;
        }
    }
    let mut worst_lk = 0.0f64;
    for body in [r#"{"type":"cube","half_side":0.5}"#, r#"{"type":"cross_polytope"}"#, r#"{"type":"simplex"}"#] {
        for n in [3, 4, 5] {
            let p = Params::new(n, 1, &Budgets { samples: 200_000, ..Budgets::default() }).sampled(true);
            let r = verify::run_check("lk-invariance", &desc(body), &p).map_err(|e| e.to_string())?;
            let gap = r.details["relative_gap"];
            ensure(gap <= 0.02, || format!("lk {body} n={n}: gap {gap:.4}"))?;
            worst_lk = worst_lk.max(gap);
        }
    }
    Ok(format!(
        "rk worst gap {worst_rk:.4} over {cases} cases; ik exact gap {worst_ik_exact:.1e}; lk worst gap {worst_lk:.4}"
    ))
}

fn isotropic_machinery() -> Outcome {
    let mut rng = RngStream::new(6, 0);
    let want = 12f64.powf(-0.5);
    let mut worst = 0.0f64;
    for n in [3, 4, 6] {
        let cube = Body::<f64>::cube(n, 0.5).map_err(|e| e.to_string())?;
        let exact = isotropic::isotropic_constant_with(&cube, 1000, &mut rng, Method::Auto).map_err(|e| e.to_string())?;
        ensure(exact.exact && rel(exact.value, want) <= 1e-12, || format!("closed form gives {}", exact.value))?;
        let mc = isotropic::isotropic_constant_with(&cube, 200_000, &mut rng, Method::Sampled).map_err(|e| e.to_string())?;
        ensure(rel(mc.value, want) <= 0.01, || format!("n={n}: sampled L = {}", mc.value))?;
        worst = worst.max(rel(mc.value, want));
    }
    let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0, 9.0]));
    let ell = Body::<f64>::ellipsoid(m).map_err(|e| e.to_string())?;
    let pos = isotropic::isotropic_position_with(&ell, 1_000_000, &mut rng, Method::Sampled).map_err(|e| e.to_string())?;
    ensure(pos.certificate <= 0.02, || format!("isotropy certificate {}", pos.certificate))?;
    Ok(format!("sampled L(cube) within {:.2}%, certificate {:.4}", 100.0 * worst, pos.certificate))
}

fn gamma_consistency() -> Outcome {
    let b = Budgets::default();
    let mut worst = 0.0f64;
    for n in 3..=6 {
        let r = verify::run_check("gamma-witness", &desc(r#"{"type":"ball"}"#), &Params::new(n, 1, &b).with_k(1))
            .map_err(|e| e.to_string())?;
        let g = r.empirical_constant.unwrap_or(f64::NAN);
        let gap = rel(g, verify::b_power(n, 1));
        ensure(gap <= 0.02, || format!("n={n}: γ̂ = {g}"))?;
        worst = worst.max(gap);
    }
    let gamma = |json: &str| -> Result<(f64, f64), String> {
        let r = verify::run_check("gamma-witness", &desc(json), &Params::new(4, 1, &b).with_k(1)).map_err(|e| e.to_string())?;
        Ok((r.empirical_constant.unwrap_or(f64::NAN), r.details.get("constant_stderr").copied().unwrap_or(0.0)))
    };
    let base = gamma(r#"{"type":"cube","half_side":0.5}"#)?;
    for json in [
        r#"{"type":"scaled","factor":3,"body":{"type":"cube","half_side":0.5}}"#,
        r#"{"type":"rotation","seed":5,"body":{"type":"cube","half_side":0.5}}"#,
    ] {
        let other = gamma(json)?;
        let sigma = base.1.hypot(other.1);
        ensure((other.0 - base.0).abs() <= 3.0 * sigma, || format!("{json}: {} vs {}", other.0, base.0))?;
    }
    let rows = verify::gamma_table(&verify::default_suite()).map_err(|e| e.to_string())?;
    let (lo, hi) = rows.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r.gamma), b.max(r.gamma)));
    ensure(!rows.is_empty() && lo > 0.0 && hi < 3.0, || format!("γ̂ range [{lo}, {hi}]"))?;
    Ok(format!("ball within {:.2}% of b; γ̂ table of {} rows in [{lo:.3}, {hi:.3}]", 100.0 * worst, rows.len()))
}

fn proposition_windows() -> Outcome {
    let mut lines = Vec::new();
    for body in [r#"{"type":"cube","half_side":0.5}"#, r#"{"type":"graded_ellipsoid"}"#] {
        for n in 3..=6 {
            let r = verify::run_check("prop-4.3-ratios", &desc(body), &Params::new(n, 1, &Budgets::default()))
                .map_err(|e| e.to_string())?;
            let a = r.details["as_times_l"];
            let (s0, s1) = (r.details["section_ratio_min"], r.details["section_ratio_max"]);
            let inside = |x: f64| (0.05..=20.0).contains(&x);
            ensure(inside(a) && inside(s0) && inside(s1), || format!("{body} n={n}: as·L = {a}, as(K∩ξ⊥)·L² in [{s0}, {s1}]"))?;
            lines.push((a, s0));
            lines.push((a, s1));
        }
    }
    let lo = lines.iter().fold(f64::INFINITY, |m, &(a, s)| m.min(a).min(s));
    let hi = lines.iter().fold(0.0f64, |m, &(a, s)| m.max(a).max(s));
    Ok(format!("{} cases, ratios in [{lo:.3}, {hi:.3}]", lines.len() / 2))
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("avgsect-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let config = r#"{
        "bodies": [{"type":"cube","half_side":0.5}, {"type":"simplex"}, {"type":"rotation","seed":3,"body":{"type":"cross_polytope"}}],
        "dims": [3, 4],
        "ks": [1],
        "rs": [1],
        "densities": [{"type":"one"}],
        "budgets": {"samples": 4000, "subspaces": 40, "refine": 4},
        "seed": 7
    }"#;
    SuiteConfig::from_json(config).map_err(|e| e.to_string())?;
    let path = dir.join("config.json");
    std::fs::write(&path, config).map_err(|e| e.to_string())?;
    let run = |jobs: &str| -> Result<Vec<u8>, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_avgsect"))
            .args(["--jobs", jobs, "suite", "--config"])
            .arg(&path)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.code() == Some(0), || format!("exit {:?}: {}", out.status, String::from_utf8_lossy(&out.stderr)))?;
        Ok(out.stdout)
    };
    let first = run("1")?;
    let second = run("1")?;
    let parallel = run("4")?;
    let _ = std::fs::remove_dir_all(&dir);
    ensure(!first.is_empty(), || "empty report".into())?;
    ensure(first == second, || "two runs at --jobs 1 differ".into())?;
    ensure(first == parallel, || "--jobs 1 and --jobs 4 differ".into())?;
    let lines = first.iter().filter(|&&b| b == b'\n').count();
    Ok(format!("{lines} JSON lines identical across runs and --jobs 1/4"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("ball identities", ball_identities),
        ("ball equality of the intersection-body inequality", ball_equality),
        ("ellipsoid section oracle", ellipsoid_sections),
        ("exact-constant suite", exact_suite),
        ("invariance suite", invariance),
        ("isotropic machinery", isotropic_machinery),
        ("gamma witness consistency", gamma_consistency),
        ("isotropic ratio windows", proposition_windows),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let label = format!("criterion {}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("{label}: PASS  {name}: {msg} ({secs:.1} s)"),
            Err(msg) => {
                failed += 1;
                println!("{label}: FAIL  {name}: {msg} ({secs:.1} s)");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
