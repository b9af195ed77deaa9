//! A registry of named checks: exact identities and inequalities with
//! explicit constants, invariance tests, and estimates of the absolute
//! constants the remaining inequalities leave unnamed.
//!
//! Every check produces a [`CheckReport`] whose verdict is a function of the
//! reported numbers alone (see [`derive_verdict`]).

mod constants;
mod empirical;
mod exact;
mod invariance;
mod suite;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bodies::{Body, BodyDesc, Shape, Subspace};
use crate::error::{Error, Result};
use crate::isotropic;
use crate::quadrature::{self, Density, Estimate};
use crate::sampling::{self, RngStream};
use crate::scalar::Real;

pub use constants::{b_power, c_power, h, holder_constant, paper_constant, phi_power, varrho, ConstantName};
pub use suite::{
    default_suite, fmt_f64, gamma_table, plan_suite, run_suite, write_csv, write_json_lines, GammaRow, Job,
    OutputFormat, OutputSpec, SuiteConfig, SuiteSummary, CSV_COLUMNS,
};

/// Relative tolerance for comparisons between closed-form values.
pub const EXACT_TOLERANCE: f64 = 1e-12;
/// Number of standard errors inside which a comparison is undecided.
pub const NOISE_SIGMAS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Exact,
    Invariance,
    Empirical,
}

/// Which linear map an invariance check applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    /// `U·diag(s)·V` with Haar `U, V` and singular values spread over `[1, 3]`.
    Random,
    Rotation,
    /// `diag(s)` with entries spread over `[1, 3]`.
    Diagonal,
}

/// Sample sizes shared by the checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budgets {
    /// Directions on the full sphere, and points for moment estimates.
    pub samples: usize,
    /// Haar subspaces per Grassmannian average or scan.
    pub subspaces: usize,
    /// Local-search steps after a Grassmannian scan.
    pub refine: usize,
    /// Directions inside each section; defaults to `samples / 8` (at least 256).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub section_samples: Option<usize>,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { samples: 20_000, subspaces: 500, refine: 50, section_samples: None }
    }
}

impl Budgets {
    pub fn section_samples(&self) -> usize {
        self.section_samples.unwrap_or((self.samples / 8).max(256))
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 || self.subspaces == 0 || self.section_samples() < 2 {
            return Err(Error::invalid("budgets must be positive (samples and section_samples at least 2)"));
        }
        Ok(())
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Everything a check's result depends on besides the body.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Density>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<TransformKind>,
    /// Force Monte-Carlo paths where closed forms exist.
    #[serde(default, skip_serializing_if = "is_false")]
    pub sampled: bool,
    /// Use coordinate subspaces instead of random ones.
    #[serde(default, skip_serializing_if = "is_false")]
    pub coordinate: bool,
    pub seed: u64,
    pub samples: usize,
    pub subspaces: usize,
    pub section_samples: usize,
    pub refine: usize,
}

impl Params {
    pub fn new(n: usize, seed: u64, budgets: &Budgets) -> Self {
        Params {
            n,
            k: None,
            r: None,
            density: None,
            transform: None,
            sampled: false,
            coordinate: false,
            seed,
            samples: budgets.samples,
            subspaces: budgets.subspaces,
            section_samples: budgets.section_samples(),
            refine: budgets.refine,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_r(mut self, r: usize) -> Self {
        self.r = Some(r);
        self
    }

    pub fn with_density(mut self, d: Density) -> Self {
        self.density = Some(d);
        self
    }

    pub fn with_transform(mut self, t: TransformKind) -> Self {
        self.transform = Some(t);
        self
    }

    pub fn sampled(mut self, on: bool) -> Self {
        self.sampled = on;
        self
    }

    pub fn coordinate(mut self, on: bool) -> Self {
        self.coordinate = on;
        self
    }

    fn need_k(&self) -> Result<usize> {
        self.k.ok_or_else(|| Error::invalid("this check needs k"))
    }

    fn need_r(&self) -> Result<usize> {
        self.r.ok_or_else(|| Error::invalid("this check needs r"))
    }
}

/// The outcome of one check.
///
/// For exact and invariance checks `slack` is `rhs − lhs` (`<=`), `lhs − rhs`
/// (`>=`) or `rhs − lhs` (`==`). For empirical checks it is the margin of
/// `empirical_constant` inside `window` (or the constant itself when no
/// window is registered).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub kind: Kind,
    pub body: BodyDesc,
    pub params: Params,
    pub orientation: Orientation,
    pub lhs: Estimate<f64>,
    pub rhs: Estimate<f64>,
    pub slack: f64,
    /// Standard error used for the verdict; zero when the comparison holds
    /// exactly on the sampled measure.
    pub slack_stderr: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empirical_constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckReport {
    /// Recomputes the verdict from the reported numbers.
    pub fn derived_verdict(&self) -> Verdict {
        if self.error.is_some() {
            return Verdict::Indeterminate;
        }
        derive_verdict(self.kind, self.orientation, self.slack, self.slack_stderr, self.tolerance)
    }

    /// The verdict counts against the exit status.
    pub fn is_exact_failure(&self) -> bool {
        self.kind == Kind::Exact && self.verdict == Verdict::Fail
    }
}

/// The verdict rule.
///
/// Equalities pass when `|slack| ≤ tolerance`, are indeterminate when
/// `|slack| ≤ 3σ`, and fail otherwise. Inequalities (and window margins of
/// empirical checks) pass when `slack ≥ 3σ` or, when `3σ` is within the
/// tolerance, when `slack ≥ −tolerance`; they fail below `−3σ − tolerance`.
pub fn derive_verdict(kind: Kind, orientation: Orientation, slack: f64, sigma: f64, tolerance: f64) -> Verdict {
    let noise = NOISE_SIGMAS * sigma;
    match (kind, orientation) {
        (Kind::Empirical, _) | (_, Orientation::Le) | (_, Orientation::Ge) => {
            if noise <= tolerance {
                if slack >= -tolerance {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            } else if slack >= noise {
                Verdict::Pass
            } else if slack >= -noise - tolerance {
                Verdict::Indeterminate
            } else {
                Verdict::Fail
            }
        }
        (_, Orientation::Eq) => {
            if slack.abs() <= tolerance {
                Verdict::Pass
            } else if slack.abs() <= noise {
                Verdict::Indeterminate
            } else {
                Verdict::Fail
            }
        }
    }
}

/// Hypotheses a check places on the body.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Class {
    /// A star body with the origin inside.
    Star,
    /// Convex with barycenter at the origin.
    CenteredConvex,
    /// Convex and origin-symmetric.
    SymmetricConvex,
    /// An origin-centered ellipsoid (ball, ellipsoid, or linear image).
    Ellipsoidal,
    /// A Euclidean ball about the origin.
    Ball,
}

impl Class {
    pub fn describe(&self) -> &'static str {
        match self {
            Class::Star => "star body containing the origin",
            Class::CenteredConvex => "centered convex body",
            Class::SymmetricConvex => "origin-symmetric convex body",
            Class::Ellipsoidal => "origin-centered ellipsoid",
            Class::Ball => "Euclidean ball",
        }
    }

    pub fn admits(&self, body: &Body<f64>) -> bool {
        match self {
            Class::Star => body.contains(&DVector::zeros(body.dim())).unwrap_or(false),
            Class::CenteredConvex => body.is_convex() && is_centered(body),
            Class::SymmetricConvex => body.is_convex() && body.is_origin_symmetric(),
            Class::Ellipsoidal => body.ellipsoid_matrix().is_some(),
            Class::Ball => body.ball_radius().is_some() && !matches!(body.shape(), Shape::RadialSum(..)),
        }
    }
}

/// Barycenter at the origin, certified by symmetry or by closed-form moments.
pub fn is_centered(body: &Body<f64>) -> bool {
    if body.is_origin_symmetric() {
        return true;
    }
    match isotropic::exact_moments(body) {
        Some((b, _)) => b.norm() <= 1e-9 * body.circumradius().value,
        None => false,
    }
}

/// Admissible values of `k` as a function of `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KRange {
    None,
    /// `1 ≤ k ≤ n − d`.
    UpTo(usize),
    /// `0 ≤ k ≤ n − d`; `k = 0` selects a separate identity.
    ZeroUpTo(usize),
}

impl KRange {
    pub fn contains(&self, n: usize, k: usize) -> bool {
        match *self {
            KRange::None => false,
            KRange::UpTo(d) => k >= 1 && k + d <= n,
            KRange::ZeroUpTo(d) => k + d <= n,
        }
    }
}

/// A registered check.
#[derive(Clone, Copy, Debug)]
pub struct CheckSpec {
    pub id: &'static str,
    pub kind: Kind,
    pub class: Class,
    pub k: KRange,
    /// `1 ≤ r < n − k` is required.
    pub uses_r: bool,
    pub uses_density: bool,
    pub min_dim: usize,
    pub summary: &'static str,
}

const fn spec(id: &'static str, kind: Kind, class: Class, k: KRange, min_dim: usize, summary: &'static str) -> CheckSpec {
    CheckSpec { id, kind, class, k, uses_r: false, uses_density: false, min_dim, summary }
}

/// All checks, in report order.
pub const REGISTRY: &[CheckSpec] = &[
    spec("ball-equality-1.3", Kind::Exact, Class::Ball, KRange::None, 3, "as(B) = b_{n,1}|B|^{1/n} as(B∩ξ⊥)"),
    spec("thm-1.3-bp", Kind::Exact, Class::Ellipsoidal, KRange::UpTo(2), 3, "as(K) ≤ b_{n,k}^k |K|^{k/n} max_E as(K∩E)"),
    CheckSpec {
        uses_density: true,
        ..spec(
            "thm-1.2-bp",
            Kind::Exact,
            Class::Ellipsoidal,
            KRange::UpTo(1),
            2,
            "∫ρ^{n−1}f(ρθ)dθ ≤ c_{n,k}^k |K|^{k/n} max_E ∫_{S∩E} ρ^{n−k−1}f(ρθ)dθ",
        )
    },
    CheckSpec {
        uses_r: true,
        ..spec(
            "thm-1.5-bp",
            Kind::Exact,
            Class::Ellipsoidal,
            KRange::UpTo(3),
            4,
            "as_r(K) ≤ φ_{n,k,r}^k |K|^{k/n} max_E as_r(K∩E)",
        )
    },
    spec("meyer", Kind::Exact, Class::CenteredConvex, KRange::None, 2, "|K|^{n−1} ≥ (n!/nⁿ) ∏|K∩eᵢ⊥|"),
    spec(
        "holder-bgl11",
        Kind::Exact,
        Class::Star,
        KRange::UpTo(1),
        2,
        "Ṽ(K[n−1],B)^{k+1} ≤ |K|^k Ṽ(K[n−k−1],B[k+1])",
    ),
    spec(
        "thm-5.2a-explicit",
        Kind::Exact,
        Class::Star,
        KRange::UpTo(2),
        3,
        "as(K)^{k+1} ≤ |K|^k ω_{n−1}^{k+1}/(ω_n^k ω_{n−k−1}) ∫as(K∩E)dν",
    ),
    spec(
        "thm-5.2b-explicit",
        Kind::Exact,
        Class::Star,
        KRange::UpTo(2),
        3,
        "∫as(K∩E)dν ≤ ϱ_{n,k} as(K)^{(n−k−1)/(n−1)}",
    ),
    spec("lemma-5.3-explicit", Kind::Exact, Class::Star, KRange::None, 2, "as(K) ≥ ω_{n−1}|K|/(ω_n R(K))"),
    spec("dual-minkowski", Kind::Exact, Class::Star, KRange::None, 2, "Ṽ_1(K,D) ≤ |K|^{(n−1)/n}|D|^{1/n}"),
    spec("grinberg-bound", Kind::Exact, Class::CenteredConvex, KRange::UpTo(1), 2, "R̃_k(K) ≤ R̃_k(B)"),
    spec("m-jensen", Kind::Exact, Class::Star, KRange::None, 2, "M(K)·∫ρ_K dσ ≥ 1"),
    spec(
        "dmx-identity",
        Kind::Exact,
        Class::Star,
        KRange::ZeroUpTo(2),
        3,
        "k = 0: as(K) = (ω_{n−1}/ω_n)Ṽ_1(K,B); k ≥ 1: ∫as(K∩E)dν = (ω_{n−k−1}/ω_n)Ṽ_{k+1}(K,B)",
    ),
    spec("rk-invariance", Kind::Invariance, Class::Star, KRange::UpTo(1), 2, "R̃_k(TK) = R̃_k(K)"),
    spec(
        "ik-equivariance",
        Kind::Invariance,
        Class::Star,
        KRange::None,
        2,
        "|TK∩ξ⊥| = |det T|·ρ_{(T⁻¹)*IK}(ξ)",
    ),
    spec("lk-invariance", Kind::Invariance, Class::Star, KRange::None, 1, "L_{TK} = L_K"),
    spec("gamma-witness", Kind::Empirical, Class::CenteredConvex, KRange::UpTo(2), 3, "γ̂ = [as(K)/(|K|^{k/n} max_E as(K∩E))]^{1/k}"),
    spec("thm-1.4-c1", Kind::Empirical, Class::SymmetricConvex, KRange::UpTo(2), 3, "required c₁ with h(n/k)"),
    spec("thm-1.6-c2", Kind::Empirical, Class::CenteredConvex, KRange::UpTo(2), 3, "required c₂ = γ̂/L_K"),
    spec(
        "lemma-4.1-c0",
        Kind::Empirical,
        Class::CenteredConvex,
        KRange::UpTo(2),
        3,
        "|K∩E||K∩ξ⊥| ≤ c₀^{k+1}|K∩E∩ξ⊥||K|",
    ),
    spec(
        "uniform-cover-c0",
        Kind::Empirical,
        Class::CenteredConvex,
        KRange::UpTo(2),
        3,
        "∏|K∩E_{σᵢ}| ≤ (c₀t/s)^{ds}|K∩E_σ|^s|K|^{t−s}",
    ),
    spec(
        "thm-4.2-c2",
        Kind::Empirical,
        Class::CenteredConvex,
        KRange::UpTo(2),
        3,
        "|K∩E|·as(K) ≤ c₂^k as(K∩E)|K|",
    ),
    spec("dp-lower-c4", Kind::Empirical, Class::CenteredConvex, KRange::UpTo(1), 2, "R̃_k(K) ≥ (c₄/L_K)^{kn}"),
    spec(
        "prop-4.3-ratios",
        Kind::Empirical,
        Class::CenteredConvex,
        KRange::None,
        3,
        "as(K)·L_K and as(K∩ξ⊥)·L_K² in isotropic position",
    ),
    spec(
        "thm-5.4-c",
        Kind::Empirical,
        Class::CenteredConvex,
        KRange::UpTo(2),
        3,
        "(c₁√n/p)^k as ≤ |K|^{k/n}∫as(K∩E)dν ≤ (c₂p/√n)^{k/(n−1)} as",
    ),
    spec(
        "thm-1.8",
        Kind::Empirical,
        Class::CenteredConvex,
        KRange::UpTo(2),
        3,
        "(c₄√n/p)^k as ≤ |K|^{k/n}∫as(K∩E)dν ≤ (c₅p/√n)^{k/(n−1)} as",
    ),
    spec(
        "thm-1.9-c6",
        Kind::Empirical,
        Class::CenteredConvex,
        KRange::UpTo(2),
        3,
        "|K|^{k/n}∫as(K∩E)dν ≤ c₆^k as(K), isotropic position",
    ),
    spec(
        "remark-5.7-iso",
        Kind::Empirical,
        Class::CenteredConvex,
        KRange::UpTo(2),
        3,
        "(c√n L_K)^{−k} as(K) ≤ |K|^{k/n}∫as(K∩E)dν, isotropic position",
    ),
    spec("m-restriction-c", Kind::Empirical, Class::SymmetricConvex, KRange::UpTo(1), 2, "M(D∩F) ≤ c√(n/s) M(D), s = n − k"),
    spec("thm-4.6", Kind::Empirical, Class::CenteredConvex, KRange::UpTo(2), 3, "γ̂ ≤ c√(n/k) log^{3/2}(en/k)"),
];

pub fn lookup(id: &str) -> Result<&'static CheckSpec> {
    REGISTRY
        .iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::invalid(format!("unknown check {id:?}")))
}

impl CheckSpec {
    /// Validates the indices in `p` against this check's ranges.
    pub fn validate(&self, p: &Params) -> Result<()> {
        if p.n < self.min_dim {
            return Err(Error::invalid(format!("{} needs n ≥ {}", self.id, self.min_dim)));
        }
        match (self.k, p.k) {
            (KRange::None, _) => {}
            (range, Some(k)) if range.contains(p.n, k) => {}
            (_, Some(k)) => return Err(Error::invalid(format!("k = {k} is out of range for {} at n = {}", self.id, p.n))),
            (_, None) => return Err(Error::invalid(format!("{} needs k", self.id))),
        }
        if self.uses_r {
            let k = p.k.unwrap_or(0);
            match p.r {
                Some(r) if r >= 1 && r + k < p.n => {}
                _ => return Err(Error::invalid(format!("{} needs 1 ≤ r < n − k", self.id))),
            }
        }
        Ok(())
    }

    /// Fills default indices: the first admissible `k` and `r`.
    pub fn default_params(&self, mut p: Params) -> Params {
        if p.k.is_none() {
            p.k = match self.k {
                KRange::None => None,
                KRange::UpTo(_) | KRange::ZeroUpTo(_) => Some(1),
            };
        }
        if self.uses_r && p.r.is_none() {
            p.r = Some(1);
        }
        if self.uses_density && p.density.is_none() {
            p.density = Some(Density::One);
        }
        if self.kind == Kind::Invariance && p.transform.is_none() {
            p.transform = Some(TransformKind::Random);
        }
        p
    }
}

/// A per-check stream id: a hash of the canonical JSON of the check id, the
/// body descriptor and the parameters.
pub fn stream_id(id: &str, body: &BodyDesc, params: &Params) -> u64 {
    let json = serde_json::to_string(&(id, body, params)).expect("descriptors serialize");
    let digest = Sha256::digest(json.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// What a check computed, before it is wrapped into a report.
pub(crate) struct Outcome {
    orientation: Orientation,
    lhs: Estimate<f64>,
    rhs: Estimate<f64>,
    slack: f64,
    sigma: f64,
    tolerance: f64,
    constant: Option<f64>,
    window: Option<(f64, f64)>,
    details: BTreeMap<String, f64>,
}

fn exact_tolerance(lhs: &Estimate<f64>, rhs: &Estimate<f64>) -> f64 {
    EXACT_TOLERANCE * lhs.value.abs().max(rhs.value.abs())
}

fn combined(lhs: &Estimate<f64>, rhs: &Estimate<f64>) -> f64 {
    lhs.stderr.hypot(rhs.stderr)
}

impl Outcome {
    /// An inequality between independently estimated sides.
    pub(crate) fn inequality(orientation: Orientation, lhs: Estimate<f64>, rhs: Estimate<f64>) -> Self {
        let slack = match orientation {
            Orientation::Ge => lhs.value - rhs.value,
            _ => rhs.value - lhs.value,
        };
        Outcome {
            orientation,
            lhs,
            rhs,
            slack,
            sigma: combined(&lhs, &rhs),
            tolerance: exact_tolerance(&lhs, &rhs),
            constant: None,
            window: None,
            details: BTreeMap::new(),
        }
    }

    pub(crate) fn equality(lhs: Estimate<f64>, rhs: Estimate<f64>) -> Self {
        Self::inequality(Orientation::Eq, lhs, rhs)
    }

    /// Both sides come from one sample and the inequality holds exactly for
    /// the empirical measure, so sampling noise cannot flip it.
    pub(crate) fn coupled(mut self) -> Self {
        self.sigma = 0.0;
        self
    }

    /// An equality accepted within an absolute tolerance.
    pub(crate) fn within(lhs: Estimate<f64>, rhs: Estimate<f64>, tolerance: f64) -> Self {
        let mut o = Self::equality(lhs, rhs);
        o.sigma = 0.0;
        o.tolerance = tolerance;
        o
    }

    /// An estimated constant, optionally asserted to lie in `window`.
    pub(crate) fn constant(
        orientation: Orientation,
        lhs: Estimate<f64>,
        rhs: Estimate<f64>,
        c: Estimate<f64>,
        window: Option<(f64, f64)>,
    ) -> Self {
        let slack = match window {
            Some((lo, hi)) => (c.value - lo).min(hi - c.value),
            None => c.value,
        };
        Outcome {
            orientation,
            lhs,
            rhs,
            slack,
            sigma: c.stderr,
            tolerance: 0.0,
            constant: Some(c.value),
            window,
            details: BTreeMap::from([("constant_stderr".to_string(), c.stderr)]),
        }
    }

    pub(crate) fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    pub(crate) fn estimate_detail(self, key: &str, e: Estimate<f64>) -> Self {
        self.detail(key, e.value).detail(&format!("{key}_stderr"), e.stderr)
    }

    fn finite(&self) -> Result<()> {
        let mut values = vec![self.lhs.value, self.lhs.stderr, self.rhs.value, self.rhs.stderr, self.slack, self.sigma];
        values.extend(self.constant);
        values.extend(self.details.values().copied());
        if values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Singular("a check produced a non-finite value".into()))
        }
    }
}

/// The state shared by check implementations.
pub(crate) struct Ctx {
    pub(crate) body: Body<f64>,
    pub(crate) p: Params,
    pub(crate) rng: RngStream,
}

impl Ctx {
    pub(crate) fn n(&self) -> usize {
        self.p.n
    }
}

/// Runs one registered check on a body.
///
/// The body descriptor gets `params.n` filled in; missing `k`, `r`,
/// density and transform are defaulted. Fails with a class violation when
/// the body does not satisfy the check's hypotheses.
pub fn run_check(id: &str, body: &BodyDesc, params: &Params) -> Result<CheckReport> {
    let spec = lookup(id)?;
    let params = spec.default_params(params.clone());
    spec.validate(&params)?;
    let desc = body.with_dim(params.n)?;
    let built = desc.build::<f64>()?;
    if built.dim() != params.n {
        return Err(Error::DimensionMismatch { expected: params.n, found: built.dim() });
    }
    if !spec.class.admits(&built) {
        return Err(Error::ClassViolation { check: spec.id.to_string(), required: spec.class.describe().to_string() });
    }
    let rng = RngStream::new(params.seed, stream_id(spec.id, &desc, &params));
    let mut ctx = Ctx { body: built, p: params.clone(), rng };
    let outcome = match spec.kind {
        Kind::Exact => exact::run(spec.id, &mut ctx)?,
        Kind::Invariance => invariance::run(spec.id, &mut ctx)?,
        Kind::Empirical => empirical::run(spec.id, &mut ctx)?,
    };
    outcome.finite()?;
    let verdict = derive_verdict(spec.kind, outcome.orientation, outcome.slack, outcome.sigma, outcome.tolerance);
    Ok(CheckReport {
        check_id: spec.id.to_string(),
        kind: spec.kind,
        body: desc,
        params,
        orientation: outcome.orientation,
        lhs: outcome.lhs,
        rhs: outcome.rhs,
        slack: outcome.slack,
        slack_stderr: outcome.sigma,
        tolerance: outcome.tolerance,
        verdict,
        empirical_constant: outcome.constant,
        window: outcome.window,
        details: outcome.details,
        error: None,
    })
}

/// An invertible map of the requested kind with condition number at most 3.
pub fn transform_matrix(kind: TransformKind, n: usize, rng: &mut RngStream) -> DMatrix<f64> {
    let spread = DVector::from_fn(n, |i, _| 1.0 + 2.0 * i as f64 / (n.max(2) - 1) as f64);
    match kind {
        TransformKind::Rotation => {
            let mut q = sampling::haar_orthogonal::<f64>(n, rng);
            if q.determinant() < 0.0 {
                q.column_mut(0).neg_mut();
            }
            q
        }
        TransformKind::Diagonal => DMatrix::from_diagonal(&spread),
        TransformKind::Random => {
            let u = sampling::haar_orthogonal::<f64>(n, rng);
            let v = sampling::haar_orthogonal::<f64>(n, rng);
            u * DMatrix::from_diagonal(&spread) * v
        }
    }
}

/// `R_{m} g(E) = ∫_{S∩E} g dθ` for `m = dim E`: the mean of `g` over the unit
/// sphere of `E` times its total mass `m·ω_m`.
pub fn radon_transform<T: Real, G>(g: G, e: &Subspace<T>, samples: usize, rng: &mut RngStream) -> Result<Estimate<T>>
where
    G: Fn(&DVector<T>) -> T + Sync,
{
    let m = e.dim();
    if m == 0 {
        return Err(Error::invalid("the Radon transform needs dim E ≥ 1"));
    }
    let mean = quadrature::mc_mean(samples, rng, |s| {
        let u = sampling::sphere_point::<T>(m, s).into_inner();
        Ok(g(&e.embed(&u)))
    })?;
    Ok(mean.scale(T::of(quadrature::sphere_mass(m))))
}

#[cfg(test)]
mod tests;
