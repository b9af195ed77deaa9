//! The `avgsect` command line.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::bodies::{Body, BodyDesc};
use crate::error::Error;
use crate::functionals;
use crate::isotropic::{self, Method};
use crate::quadrature::{self, Density, Estimate};
use crate::sampling::RngStream;
use crate::verify::{
    self, fmt_f64, gamma_table, paper_constant, run_check, run_suite, write_csv, write_json_lines, Budgets,
    CheckReport, ConstantName, OutputFormat, Params, SuiteConfig, SuiteSummary, TransformKind, Verdict,
    REGISTRY,
};

const CSV_HELP: &str = "CSV columns: check_id, kind, body, n, k, r, density, seed, orientation, lhs, lhs_stderr, rhs, \
rhs_stderr, slack, slack_stderr, tolerance, verdict, empirical_constant, error. Floats carry 17 significant digits.";

#[derive(Parser, Debug)]
#[command(name = "avgsect", version, about = "Average-section functionals and checks of the inequalities between them")]
#[command(after_help = "Exit status: 0 success, 1 exact-check failure, 2 usage error, 3 numerical-budget error.")]
struct Cli {
    /// Worker threads (default: available parallelism). Output does not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct BudgetArgs {
    #[arg(long, default_value_t = Budgets::default().samples)]
    samples: usize,
    #[arg(long, default_value_t = Budgets::default().subspaces)]
    subspaces: usize,
    /// Directions per section (default: samples / 8, at least 256).
    #[arg(long)]
    section_samples: Option<usize>,
    #[arg(long, default_value_t = Budgets::default().refine)]
    refine: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl BudgetArgs {
    fn budgets(&self) -> Budgets {
        Budgets {
            samples: self.samples,
            subspaces: self.subspaces,
            refine: self.refine,
            section_samples: self.section_samples,
        }
    }
}

#[derive(Args, Debug, Clone, Copy)]
#[group(multiple = false)]
struct FormatArgs {
    #[arg(long)]
    json: bool,
    #[arg(long)]
    csv: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Quantity {
    /// as(K)
    As,
    /// as_r(K), needs --r
    #[value(name = "as_r")]
    AsR,
    /// Ṽ_j(K, D) with D from --partner (default unit ball), needs --j
    Dmv,
    /// R̃_k(K)
    Rk,
    /// Φ̃_k(K)
    Phik,
    /// The witness γ̂ for codimension k
    Gamma,
    /// max and mean of as(K∩E) over sampled E ∈ Gr_{n−k}
    Scan,
    /// |K|
    Volume,
    /// ∫ as(K∩E) dν over Gr_{n−k}
    MeanAs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableKind {
    Gamma,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one functional of a body.
    Compute {
        quantity: Quantity,
        /// Body descriptor, e.g. '{"type":"ball","dim":3}'.
        #[arg(long)]
        body: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        j: Option<usize>,
        /// Second body for dmv.
        #[arg(long)]
        partner: Option<String>,
        #[command(flatten)]
        budgets: BudgetArgs,
        #[arg(long)]
        json: bool,
    },
    /// Isotropic constant and position of a body.
    Isotropic {
        #[arg(long)]
        body: String,
        /// Sample even when closed-form moments exist.
        #[arg(long)]
        sampled: bool,
        #[command(flatten)]
        budgets: BudgetArgs,
        #[arg(long)]
        json: bool,
    },
    /// Run one registered check, or all checks applicable to the body.
    #[command(after_help = CSV_HELP)]
    Check {
        /// A check id (see list-checks) or "all".
        id: String,
        /// Body descriptor; the dimension may be omitted (default: unit ball).
        #[arg(long)]
        body: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        /// Density as JSON, e.g. '{"type":"gaussian","s":1}'.
        #[arg(long)]
        density: Option<String>,
        #[arg(long, value_enum)]
        transform: Option<Transform>,
        #[arg(long)]
        sampled: bool,
        #[arg(long)]
        coordinate: bool,
        #[command(flatten)]
        budgets: BudgetArgs,
        #[command(flatten)]
        format: FormatArgs,
        #[arg(long)]
        out: Option<String>,
    },
    /// Run a suite (default: the built-in suite) and stream reports.
    #[command(after_help = CSV_HELP)]
    Suite {
        /// JSON suite configuration.
        #[arg(long)]
        config: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        format: FormatArgs,
        #[arg(long)]
        out: Option<String>,
        /// Print the default configuration and exit.
        #[arg(long)]
        print_default: bool,
    },
    /// Tables over a suite's bodies.
    Table {
        kind: TableKind,
        #[arg(long)]
        config: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        format: FormatArgs,
        #[arg(long)]
        out: Option<String>,
    },
    /// Body descriptor types with an example of each.
    ListBodies,
    /// Registered checks.
    ListChecks,
    /// Evaluate a named constant: b, b1, c, phi, varrho, h.
    Constants {
        #[arg(long)]
        name: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        r: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Transform {
    Random,
    Rotation,
    Diagonal,
}

impl From<Transform> for TransformKind {
    fn from(t: Transform) -> Self {
        match t {
            Transform::Random => TransformKind::Random,
            Transform::Rotation => TransformKind::Rotation,
            Transform::Diagonal => TransformKind::Diagonal,
        }
    }
}

/// Failure modes mapped to exit codes.
enum Failure {
    Usage(String),
    Budget(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded(_) | Error::Singular(_) | Error::Unbounded => Failure::Budget(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name), runs, and returns the exit
/// code. Errors are printed as one line on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.jobs {
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(Failure::Usage(format!("cannot build a pool of {j} threads: {e}"))),
        },
        None => dispatch(cli.command),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("error: usage: {}", one_line(&m));
            2
        }
        Err(Failure::Budget(m)) => {
            eprintln!("error: numerical: {}", one_line(&m));
            3
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: io: {}", one_line(&m));
            2
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn parse_body(text: &str) -> std::result::Result<BodyDesc, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::Usage(format!("--body: {e}")))
}

fn build(desc: &BodyDesc) -> std::result::Result<Body<f64>, Failure> {
    Ok(desc.build::<f64>()?)
}

/// A stream id for ad-hoc computations: a hash of what was asked for.
fn compute_stream(parts: &serde_json::Value) -> u64 {
    let digest = Sha256::digest(parts.to_string().as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

fn sink(out: &Option<String>) -> std::result::Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(io::BufWriter::new(fs::File::create(path)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn estimate_json(e: &Estimate<f64>) -> serde_json::Value {
    json!({"value": e.value, "stderr": e.stderr, "n": e.samples, "exact": e.exact})
}

fn estimate_text(e: &Estimate<f64>) -> String {
    format!("value={} stderr={} n={} exact={}", fmt_f64(e.value), fmt_f64(e.stderr), e.samples, e.exact)
}

fn need(x: Option<usize>, flag: &str) -> std::result::Result<usize, Failure> {
    x.ok_or_else(|| Failure::Usage(format!("{flag} is required for this quantity")))
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Compute { quantity, body, k, r, j, partner, budgets, json } => {
            compute(quantity, &body, k, r, j, partner.as_deref(), &budgets, json)
        }
        Command::Isotropic { body, sampled, budgets, json } => iso(&body, sampled, &budgets, json),
        Command::Check { id, body, n, k, r, density, transform, sampled, coordinate, budgets, format, out } => {
            let desc = match body {
                Some(b) => parse_body(&b)?,
                None => BodyDesc::Ball { dim: None, radius: 1.0 },
            };
            let n = match (n, desc.dim()) {
                (Some(n), _) | (None, Some(n)) => n,
                (None, None) => return Err(Failure::Usage("--n is required when the body has no dimension".into())),
            };
            let density: Option<Density> = match density {
                Some(d) => Some(serde_json::from_str(&d).map_err(|e| Failure::Usage(format!("--density: {e}")))?),
                None => None,
            };
            let b = budgets.budgets();
            b.validate()?;
            let mut p = Params::new(n, budgets.seed, &b).sampled(sampled).coordinate(coordinate);
            p.k = k;
            p.r = r;
            p.density = density;
            p.transform = transform.map(Into::into);
            check(&id, &desc, p, format, &out)
        }
        Command::Suite { config, seed, format, out, print_default } => {
            if print_default {
                let text = serde_json::to_string_pretty(&verify::default_suite()).expect("config serializes");
                println!("{text}");
                return Ok(0);
            }
            suite(config.as_deref(), seed, format, out)
        }
        Command::Table { kind: TableKind::Gamma, config, seed, format, out } => table(config.as_deref(), seed, format, out),
        Command::ListBodies => {
            list_bodies();
            Ok(0)
        }
        Command::ListChecks => {
            for s in REGISTRY {
                let kind = serde_json::to_value(s.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                println!("{:<20} {:<10} {:<32} {}", s.id, kind, s.class.describe(), s.summary);
            }
            Ok(0)
        }
        Command::Constants { name, n, k, r } => {
            let c: ConstantName = name.parse()?;
            println!("{}", fmt_f64(paper_constant(c, n, k, r)?));
            Ok(0)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn compute(
    quantity: Quantity,
    body: &str,
    k: Option<usize>,
    r: Option<usize>,
    j: Option<usize>,
    partner: Option<&str>,
    budgets: &BudgetArgs,
    as_json: bool,
) -> Outcome {
    let desc = parse_body(body)?;
    let b = build(&desc)?;
    let n = b.dim();
    let bud = budgets.budgets();
    bud.validate()?;
    let (samples, subs, inner, refine) = (bud.samples, bud.subspaces, bud.section_samples(), bud.refine);
    let key = json!({"quantity": format!("{quantity:?}"), "body": desc, "k": k, "r": r, "j": j, "partner": partner,
        "budgets": bud});
    let mut rng = RngStream::new(budgets.seed, compute_stream(&key));
    let mut extra = serde_json::Map::new();
    let value = match quantity {
        Quantity::As => functionals::avg_section(&b, samples, &mut rng)?,
        Quantity::AsR => functionals::avg_section_r(&b, need(r, "--r")?, samples, &mut rng)?,
        Quantity::Dmv => {
            let d = match partner {
                Some(text) => build(&parse_body(text)?.with_dim(n)?)?,
                None => Body::ball(n, 1.0)?,
            };
            functionals::dual_mixed_volume_j(&b, &d, need(j, "--j")?, samples, &mut rng)?
        }
        Quantity::Rk => {
            let (e, valid) = functionals::dual_quermass_r(&b, need(k, "--k")?, subs, inner, &mut rng)?;
            extra.insert("delta_method_valid".into(), json!(valid));
            e
        }
        Quantity::Phik => functionals::dual_affine_quermass_phi(&b, need(k, "--k")?, subs, inner, &mut rng)?,
        Quantity::Gamma => {
            let w = functionals::gamma_witness(&b, need(k, "--k")?, subs, inner, refine, &mut rng)?;
            extra.insert("as".into(), estimate_json(&w.as_k));
            extra.insert("volume".into(), estimate_json(&w.volume));
            extra.insert("max_section".into(), estimate_json(&w.scan.best()));
            w.gamma
        }
        Quantity::Scan => {
            let s = functionals::grassmann_max_avg_section(&b, need(k, "--k")?, subs, inner, refine, &mut rng)?;
            extra.insert("mean".into(), estimate_json(&s.mean));
            extra.insert("listed_max".into(), estimate_json(&s.max));
            if let Some(rf) = &s.refined {
                extra.insert("refined".into(), estimate_json(&rf.value));
                extra.insert("steps_accepted".into(), json!(rf.steps_accepted));
            }
            s.best()
        }
        Quantity::Volume => quadrature::volume(&b, samples, &mut rng)?,
        Quantity::MeanAs => functionals::mean_avg_section(&b, need(k, "--k")?, subs, inner, &mut rng)?,
    };
    let mut stdout = io::stdout().lock();
    if as_json {
        let mut obj = serde_json::Map::new();
        obj.insert("quantity".into(), json!(format!("{quantity:?}").to_lowercase()));
        obj.insert("body".into(), json!(desc));
        obj.insert("estimate".into(), estimate_json(&value));
        obj.extend(extra);
        writeln!(stdout, "{}", serde_json::Value::Object(obj))?;
    } else {
        writeln!(stdout, "{}", estimate_text(&value))?;
        for (key, v) in extra {
            writeln!(stdout, "{key}: {v}")?;
        }
    }
    Ok(0)
}

fn iso(body: &str, sampled: bool, budgets: &BudgetArgs, as_json: bool) -> Outcome {
    let desc = parse_body(body)?;
    let b = build(&desc)?;
    let method = if sampled { Method::Sampled } else { Method::Auto };
    let key = json!({"quantity": "isotropic", "body": desc, "sampled": sampled, "samples": budgets.samples});
    let mut rng = RngStream::new(budgets.seed, compute_stream(&key));
    let pos = isotropic::isotropic_position_with(&b, budgets.samples, &mut rng, method)?;
    let rows: Vec<Vec<f64>> = pos.transform.row_iter().map(|r| r.iter().copied().collect()).collect();
    let mut stdout = io::stdout().lock();
    if as_json {
        let obj = json!({"body": desc, "l_k": estimate_json(&pos.l_k), "transform": rows,
            "shift": pos.shift.as_slice(), "certificate": pos.certificate});
        writeln!(stdout, "{obj}")?;
    } else {
        writeln!(stdout, "L_K {}", estimate_text(&pos.l_k))?;
        writeln!(stdout, "certificate {}", fmt_f64(pos.certificate))?;
        for r in rows {
            writeln!(stdout, "T {}", r.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(" "))?;
        }
    }
    Ok(0)
}

fn report_line(r: &CheckReport) -> String {
    let verdict = match r.verdict {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Indeterminate => "indeterminate",
    };
    let mut s = format!(
        "{} {} n={}{}{}{} {} lhs={} rhs={} slack={}",
        r.check_id,
        r.body.label(),
        r.params.n,
        r.params.k.map(|k| format!(" k={k}")).unwrap_or_default(),
        r.params.r.map(|v| format!(" r={v}")).unwrap_or_default(),
        r.params.density.as_ref().map(|d| format!(" f={}", d.label())).unwrap_or_default(),
        verdict,
        fmt_f64(r.lhs.value),
        fmt_f64(r.rhs.value),
        fmt_f64(r.slack),
    );
    if let Some(c) = r.empirical_constant {
        s.push_str(&format!(" constant={}", fmt_f64(c)));
    }
    if let Some(e) = &r.error {
        s.push_str(&format!(" error={}", one_line(e)));
    }
    s
}

fn emit(reports: &[CheckReport], format: FormatArgs, default_json: bool, out: &Option<String>) -> Outcome {
    let mut w = sink(out)?;
    if format.csv {
        write_csv(reports, &mut w)?;
    } else if format.json || default_json {
        write_json_lines(reports, &mut w)?;
    } else {
        for r in reports {
            writeln!(w, "{}", report_line(r))?;
        }
    }
    w.flush()?;
    Ok(SuiteSummary::of(reports).exit_code())
}

fn check(id: &str, desc: &BodyDesc, p: Params, format: FormatArgs, out: &Option<String>) -> Outcome {
    if id != "all" {
        let report = run_check(id, desc, &p)?;
        return emit(&[report], format, false, out);
    }
    let config = SuiteConfig {
        bodies: vec![desc.clone()],
        dims: vec![p.n],
        ks: p.k.map(|k| vec![k]).unwrap_or_else(|| vec![1, 2]),
        rs: p.r.map(|r| vec![r]).unwrap_or_else(|| vec![1, 2]),
        densities: p.density.map(|d| vec![d]).unwrap_or_else(|| verify::default_suite().densities),
        budgets: Budgets {
            samples: p.samples,
            subspaces: p.subspaces,
            refine: p.refine,
            section_samples: Some(p.section_samples),
        },
        seed: p.seed,
        checks: None,
        output: None,
    };
    let reports = if p.n >= 3 {
        run_suite(&config)?
    } else {
        REGISTRY.iter().filter_map(|s| run_check(s.id, desc, &p).ok()).collect()
    };
    emit(&reports, format, false, out)
}

fn load_config(path: Option<&str>, seed: Option<u64>) -> std::result::Result<SuiteConfig, Failure> {
    let mut config = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Usage(format!("--config {p}: {e}")))?;
            SuiteConfig::from_json(&text)?
        }
        None => verify::default_suite(),
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    Ok(config)
}

fn suite(path: Option<&str>, seed: Option<u64>, format: FormatArgs, out: Option<String>) -> Outcome {
    let config = load_config(path, seed)?;
    let (out, default) = match (&out, &config.output) {
        (Some(_), _) | (None, None) => (out, OutputFormat::Json),
        (None, Some(spec)) => (Some(spec.path.clone()), spec.format),
    };
    let format = FormatArgs { json: format.json, csv: format.csv || (!format.json && default == OutputFormat::Csv) };
    let reports = run_suite(&config)?;
    let code = emit(&reports, format, true, &out)?;
    let s = SuiteSummary::of(&reports);
    eprintln!(
        "suite: {} reports, {} pass, {} fail ({} exact), {} indeterminate, {} errors",
        s.total, s.pass, s.fail, s.exact_failures, s.indeterminate, s.errors
    );
    Ok(code)
}

fn table(path: Option<&str>, seed: Option<u64>, format: FormatArgs, out: Option<String>) -> Outcome {
    let config = load_config(path, seed)?;
    let rows = gamma_table(&config)?;
    let mut w = sink(&out)?;
    if format.json {
        for r in &rows {
            writeln!(w, "{}", serde_json::to_string(r).expect("row serializes"))?;
        }
    } else {
        let mut c = csv::Writer::from_writer(&mut w);
        let io_err = |e: csv::Error| Failure::Io(e.to_string());
        c.write_record(["body", "n", "k", "gamma", "gamma_stderr", "b_nk", "gamma_over_h", "alpha", "gamma_times_alpha", "verdict"])
            .map_err(io_err)?;
        for r in &rows {
            let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
            let verdict = serde_json::to_value(r.verdict).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            c.write_record([
                r.body.clone(),
                r.n.to_string(),
                r.k.to_string(),
                fmt_f64(r.gamma),
                fmt_f64(r.gamma_stderr),
                fmt_f64(r.b_nk),
                fmt_f64(r.gamma_over_h),
                opt(r.alpha),
                opt(r.gamma_times_alpha),
                verdict,
            ])
            .map_err(io_err)?;
        }
        c.flush()?;
    }
    w.flush()?;
    Ok(0)
}

fn list_bodies() {
    let examples = [
        ("ball", r#"{"type":"ball","dim":3,"radius":1}"#),
        ("ellipsoid", r#"{"type":"ellipsoid","semi_axes":[1,2,3]}"#),
        ("graded_ellipsoid", r#"{"type":"graded_ellipsoid","dim":4}"#),
        ("cube", r#"{"type":"cube","dim":3,"half_side":0.5}"#),
        ("cross_polytope", r#"{"type":"cross_polytope","dim":3,"scale":1}"#),
        ("simplex", r#"{"type":"simplex","dim":3}"#),
        ("lp_ball", r#"{"type":"lp_ball","dim":3,"p":3}"#),
        ("h_polytope", r#"{"type":"h_polytope","facets":[{"normal":[1,0],"offset":1},{"normal":[-1,0],"offset":1},{"normal":[0,1],"offset":1},{"normal":[0,-1],"offset":1}]}"#),
        ("linear_image", r#"{"type":"linear_image","matrix":[[2,0],[0,1]],"body":{"type":"ball","dim":2}}"#),
        ("rotation", r#"{"type":"rotation","seed":7,"body":{"type":"cube","dim":3}}"#),
        ("scaled", r#"{"type":"scaled","factor":2,"body":{"type":"cube","dim":3}}"#),
        ("section", r#"{"type":"section","basis":[[1,0],[0,1],[0,0]],"body":{"type":"cube","dim":3}}"#),
        ("radial_sum", r#"{"type":"radial_sum","first":{"type":"ball","dim":3},"second":{"type":"cube","dim":3}}"#),
        ("translate", r#"{"type":"translate","shift":[0.1,0,0],"body":{"type":"cube","dim":3}}"#),
    ];
    for (name, example) in examples {
        println!("{name:<17} {example}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::CSV_COLUMNS;

    fn run(args: &[&str]) -> i32 {
        main_with_args(std::iter::once("avgsect").chain(args.iter().copied()))
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(&["constants", "--name", "b", "--n", "3", "--k", "1"]), 0);
        assert_eq!(run(&["constants", "--name", "zeta", "--n", "3"]), 2);
        assert_eq!(run(&["no-such-command"]), 2);
        assert_eq!(run(&["check", "ball-equality-1.3", "--n", "5", "--seed", "7"]), 0);
        assert_eq!(run(&["check", "thm-1.3-bp", "--body", r#"{"type":"cube"}"#, "--n", "4"]), 2);
        assert_eq!(run(&["compute", "volume", "--body", r#"{"type":"cube","dim":20}"#, "--samples", "100"]), 0);
    }

    #[test]
    fn csv_header_matches_columns() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), CSV_COLUMNS.join(","));
    }
}
