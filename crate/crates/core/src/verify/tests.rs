use super::*;
use crate::quadrature::{sphere_mass, unit_ball_volume};

fn desc(json: &str) -> BodyDesc {
    serde_json::from_str(json).unwrap()
}

fn quick() -> Budgets {
    Budgets { samples: 8000, subspaces: 60, refine: 4, section_samples: Some(1000) }
}

fn run(id: &str, body: &str, p: Params) -> CheckReport {
    run_check(id, &desc(body), &p).unwrap()
}

#[test]
fn meyer_cube_four() {
    let r = run("meyer", r#"{"type":"cube","dim":4,"half_side":0.5}"#, Params::new(4, 1, &quick()));
    assert!((r.lhs.value - 1.0).abs() < 1e-12);
    assert!((r.rhs.value - 3.0 / 32.0).abs() < 1e-12);
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn holder_cross_polytope() {
    let p = Params::new(4, 1, &quick()).with_k(2);
    let r = run("holder-bgl11", r#"{"type":"cross_polytope","dim":4,"scale":1}"#, p);
    assert!(r.slack >= -3.0 * r.slack_stderr);
    assert_ne!(r.verdict, Verdict::Fail);
}

#[test]
fn ball_equality_is_sharp() {
    for n in 3..=8 {
        let r = run("ball-equality-1.3", r#"{"type":"ball","radius":1}"#, Params::new(n, 1, &quick()));
        assert!(r.slack.abs() <= 1e-12 * r.lhs.value, "n={n} slack {}", r.slack);
        assert_eq!(r.verdict, Verdict::Pass);
    }
}

#[test]
fn lemma_41_coordinate_cube() {
    for (n, k) in [(3, 1), (4, 1), (4, 2), (5, 2)] {
        let p = Params::new(n, 1, &quick()).with_k(k).coordinate(true);
        let r = run("lemma-4.1-c0", r#"{"type":"cube","half_side":0.5}"#, p);
        let c0 = r.empirical_constant.unwrap();
        assert!(c0 <= 1.0 + 1e-9, "n={n} k={k} c0={c0}");
    }
}

#[test]
fn lk_rotation_exact_path() {
    let p = Params::new(4, 1, &quick()).with_transform(TransformKind::Rotation);
    let r = run("lk-invariance", r#"{"type":"cube","half_side":0.5}"#, p);
    assert!(r.lhs.exact && r.rhs.exact);
    assert!(r.details["relative_gap"] <= 1e-12);
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn ik_diagonal_ellipsoid_exact_path() {
    let p = Params::new(3, 1, &quick()).with_transform(TransformKind::Diagonal);
    let r = run("ik-equivariance", r#"{"type":"ellipsoid","semi_axes":[1,2,3]}"#, p);
    assert_eq!(r.details["exact_path"], 1.0);
    assert!(r.details["max_relative_gap"] <= 1e-10);
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn gamma_witness_of_ball_is_b() {
    let r = run("gamma-witness", r#"{"type":"ball","radius":1}"#, Params::new(4, 1, &quick()).with_k(1));
    let b = b_power(4, 1);
    assert!((r.empirical_constant.unwrap() / b - 1.0).abs() < 0.02);
}

#[test]
fn orientation_is_sound_at_the_ball() {
    for id in ["thm-1.3-bp", "holder-bgl11", "thm-5.2a-explicit", "grinberg-bound", "m-jensen"] {
        let r = run(id, r#"{"type":"ball","radius":1}"#, Params::new(4, 1, &quick()).with_k(1));
        assert!(r.slack.abs() <= 3.0 * r.slack_stderr + r.tolerance, "{id}: slack {}", r.slack);
    }
}

#[test]
fn class_gate_rejects_simplex_for_symmetric_checks() {
    let err = run_check("thm-1.4-c1", &desc(r#"{"type":"simplex"}"#), &Params::new(3, 1, &quick()).with_k(1));
    assert!(matches!(err, Err(Error::ClassViolation { .. })));
    let err = run_check("thm-1.3-bp", &desc(r#"{"type":"cube"}"#), &Params::new(3, 1, &quick()).with_k(1));
    assert!(matches!(err, Err(Error::ClassViolation { .. })));
}

#[test]
fn verdict_rule() {
    use Orientation::*;
    assert_eq!(derive_verdict(Kind::Exact, Le, 0.0, 0.0, 1e-12), Verdict::Pass);
    assert_eq!(derive_verdict(Kind::Exact, Le, -1e-9, 0.0, 1e-12), Verdict::Fail);
    assert_eq!(derive_verdict(Kind::Exact, Ge, 0.4, 0.1, 0.0), Verdict::Pass);
    assert_eq!(derive_verdict(Kind::Exact, Ge, 0.1, 0.1, 0.0), Verdict::Indeterminate);
    assert_eq!(derive_verdict(Kind::Exact, Ge, -0.2, 0.1, 0.0), Verdict::Indeterminate);
    assert_eq!(derive_verdict(Kind::Exact, Ge, -0.4, 0.1, 0.0), Verdict::Fail);
    assert_eq!(derive_verdict(Kind::Exact, Eq, 0.05, 0.1, 0.0), Verdict::Indeterminate);
    assert_eq!(derive_verdict(Kind::Exact, Eq, 0.5, 0.1, 0.0), Verdict::Fail);
}

#[test]
fn reports_round_trip_and_agree_with_the_rule() {
    let r = run("grinberg-bound", r#"{"type":"cube","half_side":0.5}"#, Params::new(3, 2, &quick()).with_k(1));
    assert_eq!(r.derived_verdict(), r.verdict);
    let text = serde_json::to_string(&r).unwrap();
    let back: CheckReport = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), text);
}

#[test]
fn same_inputs_same_report() {
    let p = Params::new(4, 9, &quick()).with_k(1);
    let a = run("thm-5.2b-explicit", r#"{"type":"cross_polytope","scale":1}"#, p.clone());
    let b = run("thm-5.2b-explicit", r#"{"type":"cross_polytope","scale":1}"#, p);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn stream_ids_depend_on_every_input() {
    let body = BodyDesc::cube(3, 0.5);
    let p = Params::new(3, 1, &quick()).with_k(1);
    let base = stream_id("meyer", &body, &p);
    assert_ne!(base, stream_id("m-jensen", &body, &p));
    assert_ne!(base, stream_id("meyer", &BodyDesc::cube(3, 0.6), &p));
    assert_ne!(base, stream_id("meyer", &body, &p.clone().with_k(2)));
}

#[test]
fn empty_suite_is_empty() {
    let config = SuiteConfig { bodies: vec![], ..default_suite() };
    let reports = run_suite(&config).unwrap();
    assert!(reports.is_empty());
    assert_eq!(SuiteSummary::of(&reports).exit_code(), 0);
}

#[test]
fn suite_config_rejects_unknown_fields() {
    assert!(SuiteConfig::from_json(r#"{"bodies":[],"dimz":[3]}"#).is_err());
    assert!(SuiteConfig::from_json(r#"{"bodies":[],"dims":[2]}"#).is_err());
    let c = SuiteConfig::from_json(r#"{"bodies":[{"type":"ball"}],"dims":[3],"ks":[1]}"#).unwrap();
    assert_eq!(c.seed, 1);
}

#[test]
fn registry_ids_are_unique() {
    let mut ids: Vec<&str> = REGISTRY.iter().map(|c| c.id).collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), REGISTRY.len());
    assert!(lookup("no-such-check").is_err());
}

#[test]
fn radon_of_one_is_sphere_area() {
    let mut rng = RngStream::new(3, 0);
    for (n, m) in [(4, 3), (5, 2), (6, 6)] {
        let e = sampling::grassmann_subspace::<f64>(n, m, &mut rng).unwrap();
        let r = radon_transform(|_| 1.0, &e, 100, &mut rng).unwrap();
        assert!((r.value - m as f64 * unit_ball_volume(m)).abs() < 1e-12);
        assert!((r.value - sphere_mass(m)).abs() < 1e-12);
    }
}

#[test]
fn radon_of_square_coordinate() {
    let mut rng = RngStream::new(4, 0);
    let (n, m) = (5, 3);
    let e = sampling::grassmann_subspace::<f64>(n, m, &mut rng).unwrap();
    let u = e.basis().column(0).into_owned();
    let r = radon_transform(|x| x.dot(&u).powi(2), &e, 200_000, &mut rng).unwrap();
    let want = sphere_mass(m) / m as f64;
    assert!((r.value - want).abs() <= 3.0 * r.stderr + 1e-3, "{} vs {want}", r.value);
}

#[test]
fn radon_of_radial_power_matches_section_average() {
    let mut rng = RngStream::new(5, 0);
    let body = Body::<f64>::cube(4, 0.5).unwrap();
    let e = sampling::grassmann_subspace::<f64>(4, 3, &mut rng).unwrap();
    let m = e.dim();
    let g = |x: &DVector<f64>| body.radial_unit(x).powi((m - 1) as i32);
    let r = radon_transform(g, &e, 100_000, &mut rng).unwrap();
    let as_e = crate::functionals::avg_section_in_subspace(&body, &e, 100_000, &mut rng).unwrap();
    let want = as_e.value * sphere_mass(m) / unit_ball_volume(m - 1);
    let sigma = r.stderr.hypot(as_e.stderr * sphere_mass(m) / unit_ball_volume(m - 1));
    assert!((r.value - want).abs() <= 4.0 * sigma, "{} vs {want}", r.value);
}

#[test]
fn transforms_have_bounded_condition() {
    let mut rng = RngStream::new(6, 0);
    for kind in [TransformKind::Random, TransformKind::Rotation, TransformKind::Diagonal] {
        for n in 2..=6 {
            let t = transform_matrix(kind, n, &mut rng);
            let (hi, lo) = crate::linalg::singular_extremes(&t);
            assert!(hi / lo <= 3.0 + 1e-9);
        }
    }
}
