//! The `kmoments` command line.
//!
//! Every subcommand produces a table (CSV) or a document (JSON) on standard
//! output or `--out`. Exit status: 0 when every hard check passes, 1 on a
//! configuration error, 2 on a numeric failure (the failing cases go to
//! standard error).

pub mod suites;

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::{self, choose_factorization, FactorMode, Modulus};
use crate::characters::DirichletCharacter;
use crate::error::Error;
use crate::lfunc::{l_half, CentralValue, LMethod, LTable};
use crate::moments::{self, audit_bound, integration_check, AuditParams, BoundKind};
use suites::Check;

pub const THREADS_ENV: &str = "KMOMENTS_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "kmoments", version, about = "Twisted exponential sums, central L-values and moment audits")]
pub struct RunConfig {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for sampled suites.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, env = THREADS_ENV, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
pub enum Command {
    /// Exponential-sum identity suites.
    VerifyIdentities(IdentityArgs),
    /// Complete-sum, fourth-moment and incomplete-sum suites.
    VerifyCompleteSums(CompleteSumArgs),
    /// Central values L(1/2, χ).
    Lvalue(LvalueArgs),
    /// Moments Σ*|L(1/2,χ)|^{2k} over a family of moduli.
    Moments(MomentArgs),
    /// Large-value counts #R(V; q) over a family.
    LargeValues(LargeValueArgs),
    /// Exponent audit of one bound over a family.
    Audit(AuditArgs),
    /// Dry run of the factorization choice.
    FactorPlan(FactorPlanArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IdentityArgs {
    #[arg(long, default_value_t = 3000)]
    pub q_max: u64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Composite moduli for the twisted multiplicativity suite.
    #[arg(long, default_value_t = 20)]
    pub composite_samples: usize,
    #[arg(long, default_value_t = 101)]
    pub p_max: u64,
    /// Moduli for the K·K̄ decomposition suite.
    #[arg(long, value_delimiter = ',', default_value = "15,21,30,105")]
    pub decomposition: Vec<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompleteSumArgs {
    #[arg(long, default_value_t = 211)]
    pub p_max: u64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 250_000)]
    pub q_max: u64,
    #[arg(long, default_value_t = 10_000)]
    pub m_max: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Hurwitz,
    Afe,
    Both,
}

impl MethodChoice {
    fn methods(self) -> Vec<LMethod> {
        match self {
            MethodChoice::Hurwitz => vec![LMethod::Hurwitz],
            MethodChoice::Afe => vec![LMethod::Afe],
            MethodChoice::Both => vec![LMethod::Hurwitz, LMethod::Afe],
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LvalueArgs {
    #[arg(long, conflicts_with = "chi")]
    pub q: Option<u64>,
    /// A character as `q:e1,e2,...`.
    #[arg(long)]
    pub chi: Option<String>,
    #[arg(long, requires = "q")]
    pub all_primitive: bool,
    #[arg(long, value_enum, default_value_t = MethodChoice::Both)]
    pub method: MethodChoice,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FamilyArgs {
    /// Explicit moduli (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    pub q_min: u64,
    #[arg(long)]
    pub q_max: Option<u64>,
    /// Largest allowed prime factor.
    #[arg(long)]
    pub smooth: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub min_factors: usize,
}

impl FamilyArgs {
    pub fn resolve(&self) -> Result<Vec<Modulus>, String> {
        if !self.q.is_empty() {
            return self.q.iter().map(|&q| Modulus::new(q).map_err(|e| e.to_string())).collect();
        }
        let q_max = self.q_max.ok_or("give --q or --q-max")?;
        let y = self.smooth.unwrap_or(q_max);
        Ok(arith::enumerate_smooth_squarefree(q_max, y, self.min_factors)
            .into_iter()
            .filter(|m| m.q() >= self.q_min)
            .collect())
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MomentArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_delimiter = ',', default_value = "4,6,12")]
    pub exponents: Vec<u32>,
    #[arg(long, value_enum, default_value_t = LMethod::Hurwitz)]
    pub method: LMethod,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LargeValueArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1,2,4")]
    pub v_grid: Vec<f64>,
    /// Exponents for the integration-by-parts check.
    #[arg(long, value_delimiter = ',', default_value = "4,12")]
    pub exponents: Vec<u32>,
    #[arg(long, value_enum, default_value_t = LMethod::Hurwitz)]
    pub method: LMethod,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AuditArgs {
    #[arg(long, value_enum)]
    pub kind: BoundKind,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// V = q^theta.
    #[arg(long, default_value_t = 0.13)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.2)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = FactorMode::Twelfth)]
    pub mode: FactorMode,
    /// Forced split `q1,q2,q3` for aftercauchy.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub split: Vec<u64>,
    #[arg(long)]
    pub y: Option<u64>,
    #[arg(long, value_enum, default_value_t = LMethod::Hurwitz)]
    pub method: LMethod,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FactorPlanArgs {
    #[arg(long)]
    pub q: u64,
    /// Threshold V (or give --theta for V = q^theta).
    #[arg(long, conflicts_with = "theta")]
    pub v: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = FactorMode::Twelfth)]
    pub mode: FactorMode,
}

/// What a subcommand produced.
#[derive(Debug, Default)]
pub struct Output {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub json: Value,
    /// Hard failures, one line each.
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

impl Output {
    fn table<const N: usize>(header: [&str; N]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), ..Default::default() }
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, String> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header).map_err(|e| e.to_string())?;
                for r in &self.rows {
                    w.write_record(r).map_err(|e| e.to_string())?;
                }
                w.into_inner().map_err(|e| e.to_string())
            }
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).map_err(|e| e.to_string())?;
                s.push('\n');
                Ok(s.into_bytes())
            }
        }
    }
}

/// A failed run: a configuration problem or a numeric error.
#[derive(Debug)]
pub enum RunError {
    Config(String),
    Numeric(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Numeric(e)
    }
}

type RunResult = Result<Output, RunError>;

fn checks_output(checks: Vec<Check>, extra: Value) -> Output {
    let mut out = Output::table(Check::CSV_HEADER);
    out.rows = checks.iter().map(Check::csv_record).collect();
    out.failures = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{} {}: {} > {}", c.suite, c.case, c.value, c.tolerance))
        .collect();
    let mut summary = serde_json::Map::new();
    for c in &checks {
        let e = summary.entry(c.suite).or_insert_with(|| json!({"cases": 0, "failures": 0, "worst": 0.0}));
        e["cases"] = json!(e["cases"].as_u64().unwrap() + 1);
        e["failures"] = json!(e["failures"].as_u64().unwrap() + (!c.pass) as u64);
        e["worst"] = json!(e["worst"].as_f64().unwrap().max(c.value / c.tolerance.max(f64::MIN_POSITIVE)));
    }
    out.json = json!({"summary": summary, "checks": checks, "extra": extra});
    out
}

fn verify_identities(a: &IdentityArgs, seed: u64) -> RunResult {
    let mut rng = suites::rng(seed);
    let mut checks = suites::product_lemma(a.q_max, a.samples, &mut rng)?;
    checks.extend(suites::twisted_multiplicativity(a.q_max, a.composite_samples, &mut rng)?);
    checks.extend(suites::kk_decomposition(&a.decomposition)?);
    checks.extend(suites::parseval(a.p_max)?);
    checks.extend(suites::fft_equivalence(a.p_max.min(97), &mut rng)?);
    Ok(checks_output(checks, Value::Null))
}

fn verify_complete_sums(a: &CompleteSumArgs, seed: u64) -> RunResult {
    let mut rng = suites::rng(seed);
    let scans = arith::primes_up_to(a.p_max)
        .into_iter()
        .filter(|&p| p >= 3)
        .map(suites::fourier_scan)
        .collect::<crate::Result<Vec<_>>>()?;
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    let mut sup: f64 = 0.0;
    for s in &scans {
        let tol = 1e-6 * s.p as f64;
        checks.push(Check::new("fourier_t0_offdiagonal", format!("p={}", s.p), s.t0_offdiagonal_dev, tol));
        checks.push(Check::new("fourier_t0_diagonal", format!("p={}", s.p), s.t0_diagonal_dev, tol));
        checks.push(Check::new("fourier_sup", format!("p={}", s.p), s.sup_ratio, 20.0));
        sup = sup.max(s.sup_ratio);
    }
    if sup > 8.0 {
        warnings.push(format!("sup |T[t]|/sqrt(p) = {sup} exceeds 8"));
    }
    checks.extend(suites::fourth_moment_diagonal(11, 307.min(a.p_max.max(11)))?);
    checks.extend(suites::fourth_moment_shifted(11, 307, a.samples / 2, &mut rng)?);
    checks.extend(suites::incomplete_equivalence(a.q_max, a.m_max, a.samples, &mut rng)?);
    checks.extend(suites::vdc_ratios(a.q_max.min(20_000), a.m_max, a.samples / 5, &mut rng)?);
    let mut out = checks_output(checks, json!({"fourier": scans, "sup_ratio": sup}));
    out.warnings = warnings;
    Ok(out)
}

fn lvalue(a: &LvalueArgs) -> RunResult {
    let methods = a.method.methods();
    let mut values: Vec<Vec<CentralValue>> = Vec::new();
    match (&a.q, &a.chi) {
        (Some(q), None) => {
            if !a.all_primitive {
                return Err(RunError::Config("with --q, pass --all-primitive (or use --chi)".into()));
            }
            let m = Modulus::new(*q).map_err(|e| RunError::Config(e.to_string()))?;
            if m.primitive_count() > 0 {
                for &method in &methods {
                    values.push(LTable::new(&m, method)?.primitive());
                }
            }
        }
        (None, Some(s)) => {
            let chi: DirichletCharacter = s.parse().map_err(|e: Error| RunError::Config(e.to_string()))?;
            for &method in &methods {
                values.push(vec![l_half(&chi, method)?]);
            }
        }
        _ => return Err(RunError::Config("give exactly one of --q or --chi".into())),
    }
    let mut out = Output::table(CentralValue::CSV_HEADER);
    let n = values.first().map_or(0, Vec::len);
    for i in 0..n {
        for per_method in &values {
            out.rows.push(per_method[i].csv_record());
        }
        if values.len() == 2 {
            let (h, f) = (&values[0][i], &values[1][i]);
            let diff = (h.value - f.value).norm();
            if diff > h.abs_error_estimate + f.abs_error_estimate + 1e-10 {
                out.failures.push(format!("{}: methods differ by {diff}", h.chi));
            }
        }
    }
    out.json = Value::Array(
        values
            .iter()
            .flatten()
            .map(|v| {
                json!({"q": v.chi.q(), "character": v.chi.to_string(), "re": v.value.re, "im": v.value.im,
                       "abs": v.value.norm(), "method": v.method, "err_est": v.abs_error_estimate})
            })
            .collect(),
    );
    Ok(out)
}

fn family(f: &FamilyArgs) -> Result<Vec<Modulus>, RunError> {
    let fam = f.resolve().map_err(RunError::Config)?;
    if fam.is_empty() {
        return Err(RunError::Numeric(Error::EmptyFamily));
    }
    Ok(fam)
}

fn moments_cmd(a: &MomentArgs) -> RunResult {
    let fam = family(&a.family)?;
    let reports = moments::scan_family(&fam, &a.exponents, a.method)?;
    let mut out = Output::table(["q", "char_count", "exponent", "moment", "power_mean"]);
    for r in &reports {
        for (e, pm) in r.power_means() {
            out.rows.push(vec![
                r.q.to_string(),
                r.char_count.to_string(),
                e.to_string(),
                r.moments[&e].to_string(),
                pm.to_string(),
            ]);
        }
        if !r.power_means_monotone() {
            out.failures.push(format!("q={}: power means not monotone", r.q));
        }
    }
    out.json = json!({"method": a.method, "reports": reports});
    Ok(out)
}

fn large_values_cmd(a: &LargeValueArgs) -> RunResult {
    let fam = family(&a.family)?;
    let results = fam
        .par_iter()
        .map(|m| {
            let set = moments::large_value_set(m, &a.v_grid, a.method, false)?;
            let abs = moments::central_abs(m, a.method)?;
            let checks = a
                .exponents
                .iter()
                .map(|&e| integration_check(&abs, &a.v_grid, e))
                .collect::<crate::Result<Vec<_>>>()?;
            Ok((set, checks))
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let mut out = Output::table(["q", "v", "count"]);
    for (set, checks) in &results {
        for (v, c) in set.v_grid.iter().zip(&set.counts) {
            out.rows.push(vec![set.q.to_string(), v.to_string(), c.to_string()]);
        }
        if !set.is_nonincreasing() {
            out.failures.push(format!("q={}: counts increase with V", set.q));
        }
        for c in checks.iter().filter(|c| !c.passes) {
            out.failures.push(format!("q={}: integration check for exponent {} fails: {c:?}", set.q, c.exponent));
        }
    }
    out.json = Value::Array(results.iter().map(|(s, c)| json!({"set": s, "integration": c})).collect());
    Ok(out)
}

fn audit_cmd(a: &AuditArgs) -> RunResult {
    let fam = family(&a.family)?;
    let params = AuditParams {
        theta: a.theta,
        delta: a.delta,
        mode: a.mode,
        forced_split: (a.split.len() == 3).then(|| (a.split[0], a.split[1], a.split[2])),
        y: a.y,
        method: a.method,
    };
    let audit = audit_bound(&fam, a.kind, &params)?;
    let mut out = Output::table(moments::BoundAudit::CSV_HEADER);
    out.rows = audit.csv_records();
    out.warnings = audit.alerts.clone();
    out.json = serde_json::to_value(&audit).expect("audit serializes");
    Ok(out)
}

fn factor_plan(a: &FactorPlanArgs) -> RunResult {
    let m = Modulus::new(a.q).map_err(|e| RunError::Config(e.to_string()))?;
    let v = match (a.v, a.theta) {
        (Some(v), None) => v,
        (None, Some(t)) => (a.q as f64).powf(t),
        _ => return Err(RunError::Config("give one of --v or --theta".into())),
    };
    let f = choose_factorization(&m, v, a.delta, a.mode)?;
    let mut out = Output::table(["q", "q1", "q2", "q3", "v", "delta", "mode"]);
    let mode = serde_json::to_value(a.mode).unwrap().as_str().unwrap().to_string();
    out.rows.push(vec![
        a.q.to_string(),
        f.q1().to_string(),
        f.q2().to_string(),
        f.q3().to_string(),
        v.to_string(),
        a.delta.to_string(),
        mode.clone(),
    ]);
    out.json = json!({"q": a.q, "q1": f.q1(), "q2": f.q2(), "q3": f.q3(), "v": v, "delta": a.delta, "mode": mode});
    Ok(out)
}

/// Execute a parsed configuration.
pub fn execute(config: &RunConfig) -> RunResult {
    let work = || match &config.command {
        Command::VerifyIdentities(a) => verify_identities(a, config.seed),
        Command::VerifyCompleteSums(a) => verify_complete_sums(a, config.seed),
        Command::Lvalue(a) => lvalue(a),
        Command::Moments(a) => moments_cmd(a),
        Command::LargeValues(a) => large_values_cmd(a),
        Command::Audit(a) => audit_cmd(a),
        Command::FactorPlan(a) => factor_plan(a),
    };
    match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::Config(e.to_string()))?
            .install(work),
        None => work(),
    }
}

/// Parse, execute and write output; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let output = match execute(&config) {
        Ok(o) => o,
        Err(RunError::Config(msg)) => {
            eprintln!("error: {msg}");
            return 1;
        }
        Err(RunError::Numeric(e)) => {
            eprintln!("numeric failure: {e}");
            return 2;
        }
    };
    let bytes = match output.render(config.format) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let written = match &config.out {
        Some(path) => File::create(path).and_then(|mut f| f.write_all(&bytes)),
        None => io::stdout().lock().write_all(&bytes),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return 1;
    }
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    if output.failures.is_empty() {
        0
    } else {
        for f in &output.failures {
            eprintln!("FAILED {f}");
        }
        eprintln!("{} hard failure(s)", output.failures.len());
        2
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}
