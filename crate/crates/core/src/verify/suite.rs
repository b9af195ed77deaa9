//! Suites: every applicable check over a list of bodies and dimensions.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::{BodyDesc, PValue};
use crate::error::{Error, Result};
use crate::quadrature::{Density, Estimate};

use super::{lookup, run_check, Budgets, CheckReport, Kind, KRange, Orientation, Params, Verdict, REGISTRY};

fn default_dims() -> Vec<usize> {
    vec![3, 4, 5, 6]
}

fn default_ks() -> Vec<usize> {
    vec![1, 2]
}

fn default_seed() -> u64 {
    1
}

fn default_densities() -> Vec<Density> {
    vec![Density::One, Density::NormPower { exponent: 1.0 }, Density::Gaussian { s: 1.0 }]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[serde(alias = "jsonl", alias = "json-lines")]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: String,
    #[serde(default = "json_format")]
    pub format: OutputFormat,
}

fn json_format() -> OutputFormat {
    OutputFormat::Json
}

/// A suite: body templates (dimension left open), dimensions, codimensions
/// and budgets. Missing lists take the defaults `dims = [3..6]`,
/// `ks = rs = [1, 2]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub bodies: Vec<BodyDesc>,
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_ks")]
    pub ks: Vec<usize>,
    #[serde(default = "default_ks")]
    pub rs: Vec<usize>,
    #[serde(default = "default_densities")]
    pub densities: Vec<Density>,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Restrict to these check ids (default: all).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

impl SuiteConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: SuiteConfig = serde_json::from_str(text).map_err(|e| Error::Malformed(format!("suite config: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(&n) = self.dims.iter().find(|&&n| n < 3) {
            return Err(Error::Malformed(format!("suite dimensions must be at least 3, got {n}")));
        }
        if self.ks.contains(&0) || self.rs.contains(&0) {
            return Err(Error::Malformed("ks and rs must be positive".into()));
        }
        self.budgets.validate().map_err(|e| Error::Malformed(e.to_string()))?;
        if let Some(ids) = &self.checks {
            for id in ids {
                lookup(id).map_err(|e| Error::Malformed(e.to_string()))?;
            }
        }
        Ok(())
    }
}

fn rotated(body: BodyDesc, seed: u64) -> BodyDesc {
    BodyDesc::Rotation { seed, body: Box::new(body) }
}

/// The default suite: seven bodies and a random rotation of each.
pub fn default_suite() -> SuiteConfig {
    let base = vec![
        BodyDesc::Ball { dim: None, radius: 1.0 },
        BodyDesc::GradedEllipsoid { dim: None },
        BodyDesc::Cube { dim: None, half_side: 0.5 },
        BodyDesc::CrossPolytope { dim: None, scale: 1.0 },
        BodyDesc::LpBall { dim: None, p: PValue::Finite(1.5), scale: 1.0 },
        BodyDesc::LpBall { dim: None, p: PValue::Finite(3.0), scale: 1.0 },
        BodyDesc::Simplex { dim: None },
    ];
    let mut bodies = base.clone();
    bodies.extend(base.into_iter().enumerate().map(|(i, b)| rotated(b, 101 + i as u64)));
    SuiteConfig {
        bodies,
        dims: default_dims(),
        ks: default_ks(),
        rs: default_ks(),
        densities: default_densities(),
        budgets: Budgets::default(),
        seed: default_seed(),
        checks: None,
        output: None,
    }
}

/// One scheduled check.
#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub check_id: &'static str,
    pub body: BodyDesc,
    pub params: Params,
}

/// Lists the jobs of a suite in report order: bodies, then dimensions, then
/// registry order, then `k`, `r` and density.
pub fn plan_suite(config: &SuiteConfig) -> Result<Vec<Job>> {
    config.validate()?;
    let mut jobs = Vec::new();
    for template in &config.bodies {
        for &n in &config.dims {
            let desc = template.with_dim(n).map_err(|e| Error::Malformed(format!("{}: {e}", template.label())))?;
            let body = desc.build::<f64>().map_err(|e| Error::Malformed(format!("{}: {e}", desc.label())))?;
            for spec in REGISTRY {
                if config.checks.as_ref().is_some_and(|ids| !ids.iter().any(|i| i == spec.id)) {
                    continue;
                }
                if n < spec.min_dim || !spec.class.admits(&body) {
                    continue;
                }
                let base = Params::new(n, config.seed, &config.budgets);
                let ks: Vec<Option<usize>> = match spec.k {
                    KRange::None => vec![None],
                    KRange::UpTo(_) => config.ks.iter().filter(|&&k| spec.k.contains(n, k)).map(|&k| Some(k)).collect(),
                    KRange::ZeroUpTo(_) => std::iter::once(0)
                        .chain(config.ks.iter().copied())
                        .filter(|&k| spec.k.contains(n, k))
                        .map(Some)
                        .collect(),
                };
                for k in ks {
                    let p = match k {
                        Some(k) => base.clone().with_k(k),
                        None => base.clone(),
                    };
                    let rs: Vec<Option<usize>> = if spec.uses_r {
                        config.rs.iter().filter(|&&r| r + k.unwrap_or(0) < n).map(|&r| Some(r)).collect()
                    } else {
                        vec![None]
                    };
                    for r in rs {
                        let p = match r {
                            Some(r) => p.clone().with_r(r),
                            None => p.clone(),
                        };
                        let densities: Vec<Option<Density>> = if spec.uses_density {
                            config.densities.iter().map(|&d| Some(d)).collect()
                        } else {
                            vec![None]
                        };
                        for d in densities {
                            let p = match d {
                                Some(d) => p.clone().with_density(d),
                                None => p.clone(),
                            };
                            jobs.push(Job { check_id: spec.id, body: desc.clone(), params: spec.default_params(p) });
                        }
                    }
                }
            }
        }
    }
    Ok(jobs)
}

fn run_job(job: &Job) -> CheckReport {
    match run_check(job.check_id, &job.body, &job.params) {
        Ok(r) => r,
        Err(e) => {
            let kind = lookup(job.check_id).map(|s| s.kind).unwrap_or(Kind::Exact);
            let zero = Estimate::exact(0.0);
            CheckReport {
                check_id: job.check_id.to_string(),
                kind,
                body: job.body.clone(),
                params: job.params.clone(),
                orientation: Orientation::Eq,
                lhs: zero,
                rhs: zero,
                slack: 0.0,
                slack_stderr: 0.0,
                tolerance: 0.0,
                verdict: Verdict::Indeterminate,
                empirical_constant: None,
                window: None,
                details: Default::default(),
                error: Some(e.to_string()),
            }
        }
    }
}

/// Counts of a finished suite.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SuiteSummary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub indeterminate: usize,
    pub errors: usize,
    pub exact_failures: usize,
}

impl SuiteSummary {
    pub fn of(reports: &[CheckReport]) -> Self {
        let mut s = SuiteSummary { total: reports.len(), ..Default::default() };
        for r in reports {
            match r.verdict {
                Verdict::Pass => s.pass += 1,
                Verdict::Fail => s.fail += 1,
                Verdict::Indeterminate => s.indeterminate += 1,
            }
            s.errors += r.error.is_some() as usize;
            s.exact_failures += r.is_exact_failure() as usize;
        }
        s
    }

    /// Nonzero exactly when an exact-registry check failed.
    pub fn exit_code(&self) -> i32 {
        if self.exact_failures > 0 {
            1
        } else {
            0
        }
    }
}

/// Runs a suite on the current rayon pool. Reports come back in plan order
/// whatever the number of threads.
pub fn run_suite(config: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let jobs = plan_suite(config)?;
    Ok(jobs.par_iter().map(run_job).collect())
}

/// One report per line.
pub fn write_json_lines<W: Write>(reports: &[CheckReport], mut out: W) -> Result<()> {
    for r in reports {
        let line = serde_json::to_string(r).map_err(|e| Error::Malformed(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::Malformed(format!("write failed: {e}")))?;
    }
    Ok(())
}

/// Columns of the CSV summary.
pub const CSV_COLUMNS: [&str; 19] = [
    "check_id",
    "kind",
    "body",
    "n",
    "k",
    "r",
    "density",
    "seed",
    "orientation",
    "lhs",
    "lhs_stderr",
    "rhs",
    "rhs_stderr",
    "slack",
    "slack_stderr",
    "tolerance",
    "verdict",
    "empirical_constant",
    "error",
];

/// Seventeen significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn label<T: Serialize>(x: &T) -> String {
    serde_json::to_value(x).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

pub fn write_csv<W: Write>(reports: &[CheckReport], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Malformed(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for r in reports {
        w.write_record([
            r.check_id.clone(),
            label(&r.kind),
            r.body.label(),
            r.params.n.to_string(),
            opt(r.params.k),
            opt(r.params.r),
            r.params.density.map(|d| d.label()).unwrap_or_default(),
            r.params.seed.to_string(),
            label(&r.orientation),
            fmt_f64(r.lhs.value),
            fmt_f64(r.lhs.stderr),
            fmt_f64(r.rhs.value),
            fmt_f64(r.rhs.stderr),
            fmt_f64(r.slack),
            fmt_f64(r.slack_stderr),
            fmt_f64(r.tolerance),
            label(&r.verdict),
            r.empirical_constant.map(fmt_f64).unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Malformed(format!("write failed: {e}")))?;
    Ok(())
}

/// One row of the γ̂ table.
#[derive(Clone, Debug, Serialize)]
pub struct GammaRow {
    pub body: String,
    pub n: usize,
    pub k: usize,
    pub gamma: f64,
    pub gamma_stderr: f64,
    pub b_nk: f64,
    /// `γ̂ / h(n/k)`.
    pub gamma_over_h: f64,
    /// `α̂ = R̃_k^{1/(kn)}`, when `dp-lower-c4` ran.
    pub alpha: Option<f64>,
    /// `γ̂·α̂`, bounded by an absolute constant.
    pub gamma_times_alpha: Option<f64>,
    pub verdict: Verdict,
}

/// Runs `gamma-witness` (and `dp-lower-c4` for the `α̂` column) over a suite.
pub fn gamma_table(config: &SuiteConfig) -> Result<Vec<GammaRow>> {
    let mut c = config.clone();
    c.checks = Some(vec!["gamma-witness".into(), "dp-lower-c4".into()]);
    let reports = run_suite(&c)?;
    let mut rows = Vec::new();
    for r in reports.iter().filter(|r| r.check_id == "gamma-witness" && r.error.is_none()) {
        let k = r.params.k.unwrap_or(1);
        let n = r.params.n;
        let alpha = reports
            .iter()
            .find(|d| d.check_id == "dp-lower-c4" && d.body == r.body && d.params.n == n && d.params.k == Some(k))
            .and_then(|d| d.details.get("alpha").copied());
        let gamma = r.empirical_constant.unwrap_or(f64::NAN);
        rows.push(GammaRow {
            body: r.body.label(),
            n,
            k,
            gamma,
            gamma_stderr: r.details.get("constant_stderr").copied().unwrap_or(0.0),
            b_nk: r.details.get("b_nk").copied().unwrap_or(f64::NAN),
            gamma_over_h: gamma / super::h(n as f64 / k as f64),
            alpha,
            gamma_times_alpha: alpha.map(|a| a * gamma),
            verdict: r.verdict,
        });
    }
    Ok(rows)
}
