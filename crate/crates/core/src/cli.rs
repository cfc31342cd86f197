//! Command-line front end. Every subcommand reads an optional JSON config, applies flag
//! overrides, prints a JSON report on stdout and, with `--out DIR`, writes its tables
//! and reports there.
//!
//! Exit codes: 0 when every check passes, 1 on a numeric failure, 2 on a usage error.
//! `CUSPKAHLER_THREADS` sets the size of the worker pool.

use crate::asymptotics::{
    cusp_coefficient_from_profile, expected_ae_exponent, fit_ae_remainder, fit_cusp_coefficient, FitReport,
    DEFAULT_AE_WINDOW, DEFAULT_CUSP_WINDOW, MIN_R_SQUARED,
};
use crate::curvature::{AnalyticPotential, RadialKahlerPotential, ScaledPotential};
use crate::cylinder::{fredholm_index, indicial_roots, smallest_positive_root, IndicialProblem};
use crate::error::Error;
use crate::gluing::{
    assemble_glued_potential, biharmonic_exterior, biharmonic_interior, deviation_sweep, make_schedule, region_purity,
    BaseCorrection, HarmonicMode,
};
use crate::momentum::{check_scalar_flat, completeness_report, log_grid, profile_cp1, profile_cpn, profile_family};
use crate::momentum::{MomentumPotential, MomentumProfile};
use crate::spectral_e::{cp_spectrum, ker_lichnerowicz_e};
use crate::topo::{self, parse_rational, KahlerClassData};
use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "CUSPKAHLER_THREADS";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_NUMERIC: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "cuspkahler",
    version,
    about = "Momentum-construction metrics, cusp asymptotics and gluing diagnostics"
)]
struct Cli {
    /// JSON config; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for report files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized spot checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact profile data and a sampled table.
    Profile(ProfileArgs),
    /// Scalar flatness through the momentum formula and the potential.
    CheckSfk(CheckSfkArgs),
    /// Fits at the Euclidean end and at the cusp.
    Asymptotics(AsymptoticsArgs),
    /// Glued potential: positivity, region purity and scalar deviation over an epsilon sweep.
    Glue(GlueArgs),
    /// Indicial roots on the cusp cylinder and the index count.
    Indicial(IndicialArgs),
    /// Laplace spectrum of CP^{n-1} and the kernel of D*D.
    Spectrum(SpectrumArgs),
    /// Exact average scalar curvatures of the glued class.
    Topology(TopologyArgs),
    /// Biharmonic extensions of boundary data.
    Biharmonic(BiharmonicArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Profile(_) => "profile",
            Command::CheckSfk(_) => "check-sfk",
            Command::Asymptotics(_) => "asymptotics",
            Command::Glue(_) => "glue",
            Command::Indicial(_) => "indicial",
            Command::Spectrum(_) => "spectrum",
            Command::Topology(_) => "topology",
            Command::Biharmonic(_) => "biharmonic",
        }
    }
}

/// `lo:hi:points`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr")]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GridRepr {
    Text(String),
    Fields { lo: f64, hi: f64, points: usize },
}

impl TryFrom<GridRepr> for GridSpec {
    type Error = String;

    fn try_from(r: GridRepr) -> std::result::Result<Self, String> {
        match r {
            GridRepr::Text(s) => s.parse(),
            GridRepr::Fields { lo, hi, points } => Ok(GridSpec { lo, hi, points }),
        }
    }
}

impl std::str::FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid must look like lo:hi:points, got {s:?}"));
        }
        let f = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
        Ok(GridSpec {
            lo: f(parts[0])?,
            hi: f(parts[1])?,
            points: parts[2].trim().parse().map_err(|e| format!("{:?}: {e}", parts[2]))?,
        })
    }
}

impl GridSpec {
    fn validate(&self, what: &str) -> Result<(), CliError> {
        if self.points == 0 {
            return Err(usage(format!("{what}: empty grid")));
        }
        if !(self.lo > 0.0 && self.hi >= self.lo && self.hi.is_finite()) {
            return Err(usage(format!("{what}: need 0 < lo <= hi, got {}:{}", self.lo, self.hi)));
        }
        Ok(())
    }

    fn log_points(&self) -> Vec<f64> {
        log_grid(self.lo, self.hi, self.points)
    }
}

fn parse_mode(s: &str) -> std::result::Result<HarmonicMode, String> {
    let p: Vec<&str> = s.split(':').collect();
    let num = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("{x:?}: {e}"));
    let coeff = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    match p.len() {
        2 => Ok(HarmonicMode {
            degree: num(p[0])?,
            index: 0,
            coeff: coeff(p[1])?,
        }),
        3 => Ok(HarmonicMode {
            degree: num(p[0])?,
            index: num(p[1])?,
            coeff: coeff(p[2])?,
        }),
        _ => Err(format!(
            "mode must look like degree:coeff or degree:index:coeff, got {s:?}"
        )),
    }
}

#[derive(Args, Debug, Serialize)]
struct ProfileArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    /// `lo:hi:points` in tau.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<GridSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ProfileParams {
    n: usize,
    k: u32,
    beta: f64,
    grid: GridSpec,
}

impl Default for ProfileParams {
    fn default() -> Self {
        ProfileParams {
            n: 2,
            k: 1,
            beta: 0.0,
            grid: GridSpec {
                lo: 1e-2,
                hi: 1e2,
                points: 50,
            },
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct CheckSfkArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<GridSpec>,
    /// Bound on the momentum-formula residual.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    /// Bound on the difference with the potential-based curvature.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_tol: Option<f64>,
    /// Extra random points drawn with the seed.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    spot_checks: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CheckSfkParams {
    n: usize,
    k: u32,
    beta: f64,
    grid: GridSpec,
    tol: f64,
    oracle_tol: f64,
    spot_checks: usize,
}

impl Default for CheckSfkParams {
    fn default() -> Self {
        CheckSfkParams {
            n: 2,
            k: 1,
            beta: 0.0,
            grid: GridSpec {
                lo: 1e-2,
                hi: 1e2,
                points: 200,
            },
            tol: 1e-12,
            oracle_tol: 1e-6,
            spot_checks: 8,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct AsymptoticsArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    /// `ae`, `cusp` or `both`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    end: Option<String>,
    /// Window in |z|^2 for the Euclidean end, `lo:hi`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    ae_window: Option<String>,
    /// Window in -log|z|^2 for the cusp, `lo:hi`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    cusp_window: Option<String>,
    /// Allowed distance of the AE exponent from its expected value.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    exponent_tol: Option<f64>,
    /// Allowed relative error of the cusp coefficient.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    coefficient_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct AsymptoticsParams {
    n: usize,
    k: u32,
    beta: f64,
    end: String,
    ae_window: String,
    cusp_window: String,
    exponent_tol: f64,
    coefficient_tol: f64,
}

impl Default for AsymptoticsParams {
    fn default() -> Self {
        AsymptoticsParams {
            n: 2,
            k: 1,
            beta: 0.0,
            end: "both".into(),
            ae_window: format!("{:e}:{:e}", DEFAULT_AE_WINDOW.0, DEFAULT_AE_WINDOW.1),
            cusp_window: format!("{:e}:{:e}", DEFAULT_CUSP_WINDOW.0, DEFAULT_CUSP_WINDOW.1),
            exponent_tol: 0.05,
            coefficient_tol: 0.01,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct GlueArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    /// Comma-separated list of epsilon values.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<Vec<f64>>,
    /// `a` in the base correction `phi1 = a rho^2`.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    phi1: Option<f64>,
    /// Reference scalar curvature; defaults to the base value at the origin.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    s_base: Option<f64>,
    /// `hs` (Hwang–Singer model) or `flat`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct GlueParams {
    n: usize,
    k: u32,
    epsilon: Vec<f64>,
    phi1: f64,
    s_base: Option<f64>,
    model: String,
}

impl Default for GlueParams {
    fn default() -> Self {
        GlueParams {
            n: 2,
            k: 1,
            epsilon: vec![0.05, 0.02, 0.01],
            phi1: 0.1,
            s_base: None,
            model: "hs".into(),
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct IndicialArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    j_max: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct IndicialParams {
    n: usize,
    j_max: u32,
    eta: f64,
    delta: f64,
}

impl Default for IndicialParams {
    fn default() -> Self {
        IndicialParams {
            n: 2,
            j_max: 6,
            eta: 0.25,
            delta: 0.5,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct SpectrumArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    j_max: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SpectrumParams {
    n: usize,
    j_max: u32,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        SpectrumParams { n: 2, j_max: 6 }
    }
}

#[derive(Args, Debug, Serialize)]
struct TopologyArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    /// Rational, e.g. `1/10`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<String>,
    /// `c_1(X) . [omega]^{n-1}` as a rational.
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    c1: Option<String>,
    /// `[omega]^n` as a rational.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    vol: Option<String>,
    /// Comma-separated rational epsilon grid for the monotonicity check.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_grid: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct TopologyParams {
    n: usize,
    epsilon: String,
    c1: String,
    vol: String,
    eps_grid: Vec<String>,
}

impl Default for TopologyParams {
    fn default() -> Self {
        TopologyParams {
            n: 2,
            epsilon: "1/10".into(),
            c1: "0".into(),
            vol: "1".into(),
            eps_grid: Vec::new(),
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct BiharmonicArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    /// `interior` or `exterior`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    side: Option<String>,
    /// Boundary values, `degree:coeff` or `degree:index:coeff`, comma-separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_mode, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    h: Option<Vec<HarmonicMode>>,
    /// Boundary Laplacian, same format.
    #[arg(long = "k", value_delimiter = ',', value_parser = parse_mode, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<Vec<HarmonicMode>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_degree: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct BiharmonicParams {
    n: usize,
    side: String,
    h: Vec<HarmonicMode>,
    k: Vec<HarmonicMode>,
    max_degree: u32,
    tol: f64,
}

impl Default for BiharmonicParams {
    fn default() -> Self {
        BiharmonicParams {
            n: 2,
            side: "interior".into(),
            h: Vec::new(),
            k: Vec::new(),
            max_degree: crate::gluing::DEFAULT_MAX_DEGREE,
            tol: 1e-10,
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Numeric(String),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_)
            | Error::Precondition(_)
            | Error::Inadmissible(_)
            | Error::Dimension(_)
            | Error::DivisionByZero(_)
            | Error::Pole(_)
            | Error::UnsupportedOrder { .. }
            | Error::WeightOnWall { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
struct Check {
    name: String,
    pass: bool,
    detail: String,
}

fn check(name: &str, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        pass,
        detail: detail.into(),
    }
}

#[derive(Default)]
struct Outcome {
    report: Value,
    files: Vec<(String, String)>,
    checks: Vec<Check>,
}

/// Overlays flag values on the config entries and deserializes with defaults.
fn merge<A: Serialize, P: DeserializeOwned>(config: &serde_json::Map<String, Value>, args: &A) -> Result<P, CliError> {
    let mut merged = config.clone();
    if let Value::Object(flags) = serde_json::to_value(args).map_err(|e| usage(e.to_string()))? {
        merged.extend(flags);
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| usage(format!("config: {e}")))
}

fn load_config(path: Option<&Path>, command: &str) -> Result<serde_json::Map<String, Value>, CliError> {
    let Some(path) = path else {
        return Ok(serde_json::Map::new());
    };
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let Value::Object(mut map) = v else {
        return Err(usage("config must be a JSON object"));
    };
    if let Some(c) = map.remove("command") {
        if c.as_str() != Some(command) {
            return Err(usage(format!("config is for command {c}, running {command}")));
        }
    }
    Ok(map)
}

fn config_take<T: DeserializeOwned>(
    map: &mut serde_json::Map<String, Value>,
    key: &str,
) -> Result<Option<T>, CliError> {
    match map.remove(key) {
        None => Ok(None),
        Some(v) => serde_json::from_value(v)
            .map(Some)
            .map_err(|e| usage(format!("config {key}: {e}"))),
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    if n == 0 {
        return Err(usage(format!("{THREADS_ENV} must be positive")));
    }
    // A pool built earlier in the same process is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn model_profile(n: usize, k: u32) -> Result<MomentumProfile, CliError> {
    Ok(if n == 2 {
        profile_cp1(k, 0.0)?
    } else {
        profile_cpn(n, -(k as i64))?
    })
}

fn check_n(n: usize) -> Result<(), CliError> {
    if n < 2 {
        return Err(usage(format!("n must be at least 2, got {n}")));
    }
    Ok(())
}

fn parse_window(s: &str, what: &str) -> Result<(f64, f64), CliError> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| usage(format!("{what} must look like lo:hi, got {s:?}")))?;
    let f = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|e| usage(format!("{what}: {x:?}: {e}")))
    };
    Ok((f(a)?, f(b)?))
}

fn run_profile(p: ProfileParams) -> Result<Outcome, CliError> {
    check_n(p.n)?;
    p.grid.validate("grid")?;
    let prof = profile_family(p.n, p.k, p.beta)?;
    let (quot, rem) = prof.simplify_phi();
    let defect = prof.symbolic_defect();
    let completeness = completeness_report(&prof)?;
    let mut csv = String::from("tau,phi,scalar_curvature\n");
    for tau in p.grid.log_points() {
        let _ = writeln!(
            csv,
            "{tau:e},{:e},{:e}",
            prof.phi(tau),
            prof.scalar_curvature_momentum(tau)?
        );
    }
    let report = json!({
        "n": p.n,
        "k": p.k,
        "beta": p.beta,
        "record": prof.record(),
        "numerator": prof.numerator().display("tau"),
        "quotient": quot.display("tau"),
        "remainder": rem.display("tau"),
        "kappa": prof.kappa(),
        "symbolic_defect": defect.display("tau"),
        "completeness": completeness,
    });
    let checks = vec![check(
        "symbolic_defect_zero",
        defect.is_zero(),
        format!("2 Q Scal = {}", defect.display("tau")),
    )];
    Ok(Outcome {
        files: vec![("profile.json".into(), pretty(&report)), ("profile.csv".into(), csv)],
        report,
        checks,
    })
}

fn run_check_sfk(p: CheckSfkParams, seed: u64) -> Result<Outcome, CliError> {
    check_n(p.n)?;
    p.grid.validate("grid")?;
    if !(p.tol > 0.0 && p.oracle_tol > 0.0) {
        return Err(usage("tolerances must be positive"));
    }
    let prof = profile_family(p.n, p.k, p.beta)?;
    let mut taus = p.grid.log_points();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (p.grid.lo.ln(), p.grid.hi.ln());
    for _ in 0..p.spot_checks {
        let u: f64 = if b > a { rng.random_range(a..b) } else { a };
        taus.push(u.exp());
    }
    let rep = check_scalar_flat(&prof, &taus)?;
    let mut csv = String::from("tau,rho,momentum,oracle\n");
    for r in &rep.rows {
        let _ = writeln!(csv, "{:e},{:e},{:e},{:e}", r.tau, r.rho, r.momentum, r.oracle);
    }
    let report = json!({
        "n": p.n,
        "k": p.k,
        "beta": p.beta,
        "points": taus.len(),
        "seed": seed,
        "max_residual": rep.max_residual,
        "max_oracle_difference": rep.max_oracle_difference,
    });
    let checks = vec![
        check(
            "momentum_residual",
            rep.max_residual <= p.tol,
            format!("max {:e} <= {:e}", rep.max_residual, p.tol),
        ),
        check(
            "oracle_agreement",
            rep.max_oracle_difference <= p.oracle_tol,
            format!("max {:e} <= {:e}", rep.max_oracle_difference, p.oracle_tol),
        ),
    ];
    Ok(Outcome {
        files: vec![("sfk.json".into(), pretty(&report)), ("sfk.csv".into(), csv)],
        report,
        checks,
    })
}

fn run_asymptotics(p: AsymptoticsParams) -> Result<Outcome, CliError> {
    check_n(p.n)?;
    let (do_ae, do_cusp) = match p.end.as_str() {
        "ae" => (true, false),
        "cusp" => (false, true),
        "both" => (true, p.beta == 0.0),
        other => return Err(usage(format!("end must be ae, cusp or both, got {other:?}"))),
    };
    if do_cusp && p.beta != 0.0 {
        return Err(usage("the cusp fit needs beta = 0"));
    }
    let prof = profile_family(p.n, p.k, p.beta)?;
    let mut fits = Vec::new();
    let mut checks = Vec::new();
    if do_ae {
        let w = parse_window(&p.ae_window, "ae_window")?;
        let fit = fit_ae_remainder(&prof, w)?;
        let expect = expected_ae_exponent(p.n);
        checks.push(check(
            "ae_exponent",
            (fit.exponent - expect).abs() <= p.exponent_tol && fit.r_squared >= MIN_R_SQUARED,
            format!("{:.6} vs {expect} (r2 {:.8})", fit.exponent, fit.r_squared),
        ));
        fits.push(FitReport::ae(p.n, p.k, &fit));
    }
    if do_cusp {
        let w = parse_window(&p.cusp_window, "cusp_window")?;
        let fit = fit_cusp_coefficient(&prof, w)?;
        let expect = cusp_coefficient_from_profile(&prof)?;
        checks.push(check(
            "cusp_coefficient",
            (fit.coefficient - expect).abs() <= p.coefficient_tol * expect.abs() && fit.r_squared >= MIN_R_SQUARED,
            format!("{:.8} vs {expect:.8} (r2 {:.10})", fit.coefficient, fit.r_squared),
        ));
        fits.push(FitReport::cusp(p.n, p.k, &fit));
    }
    let report = to_json(&fits);
    Ok(Outcome {
        files: vec![("asymptotics.json".into(), pretty(&report))],
        report,
        checks,
    })
}

fn run_glue(p: GlueParams) -> Result<Outcome, CliError> {
    check_n(p.n)?;
    if p.epsilon.is_empty() {
        return Err(usage("epsilon list is empty"));
    }
    if let Some(e) = p.epsilon.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(usage(format!("epsilon must lie in (0, 1), got {e}")));
    }
    let profile = match p.model.as_str() {
        "hs" => Some(model_profile(p.n, p.k)?),
        "flat" => None,
        other => return Err(usage(format!("model must be hs or flat, got {other:?}"))),
    };
    let n = p.n;
    let a = p.phi1;
    // Scalar curvature of rho + a rho^2 at the origin.
    let s_base = p.s_base.unwrap_or(-2.0 * a * (n * (n + 1)) as f64);
    let phi1 = BaseCorrection::quadratic(a);
    let mut checks = Vec::new();
    let mut purity_rows = Vec::new();
    let model_pot = profile.as_ref().map(MomentumPotential::new).transpose()?;
    let euclid = AnalyticPotential::euclidean(n);
    let outer = AnalyticPotential::new(n, 0.0, move |r| *r + (*r * *r).scale(a));
    for &eps in &p.epsilon {
        let g = assemble_glued_potential(make_schedule(eps, n)?, phi1.clone(), profile.as_ref())?;
        let model: &dyn RadialKahlerPotential = match &model_pot {
            Some(m) => m,
            None => &euclid,
        };
        let inner = ScaledPotential { inner: model, eps };
        let pur = region_purity(&g, &outer, &inner)?;
        checks.push(check(
            &format!("region_purity eps={eps}"),
            pur.pass,
            format!("{} probes", pur.probes.len()),
        ));
        purity_rows.push(pur);
    }
    let mut rows = Vec::new();
    let mut csv = String::from("epsilon,r_eps,min_margin,sup_deviation,scaled_deviation,rho_at_sup\n");
    if p.epsilon.len() >= 2 {
        let sweep = deviation_sweep(&p.epsilon, n, &phi1, profile.as_ref(), s_base)?;
        for r in &sweep.rows {
            checks.push(check(
                &format!("positivity eps={}", r.epsilon),
                r.min_margin > 0.0,
                format!("min margin {:e}", r.min_margin),
            ));
        }
        checks.push(check(
            "deviation_decreasing",
            sweep.strictly_decreasing,
            sweep
                .rows
                .iter()
                .map(|r| format!("{}:{:.6e}", r.epsilon, r.sup_deviation))
                .collect::<Vec<_>>()
                .join(" "),
        ));
        rows = sweep.rows;
    } else {
        let g = assemble_glued_potential(make_schedule(p.epsilon[0], n)?, phi1.clone(), profile.as_ref())?;
        let r = crate::gluing::glued_scalar_deviation(&g, s_base)?;
        checks.push(check(
            "positivity",
            r.min_margin > 0.0,
            format!("min margin {:e}", r.min_margin),
        ));
        rows.push(r);
    }
    let mut entries = Vec::new();
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{:e},{:e},{:e},{:e},{:e}",
            r.epsilon,
            make_schedule(r.epsilon, n)?.r_eps,
            r.min_margin,
            r.sup_deviation,
            r.scaled_deviation,
            r.rho_at_sup
        );
        entries.push(json!({
            "epsilon": r.epsilon,
            "n": n,
            "k": p.k,
            "min_margin": r.min_margin,
            "sup_deviation": r.sup_deviation,
            "scaled_deviation": r.scaled_deviation,
        }));
    }
    let report = json!({
        "model": p.model,
        "phi1": a,
        "s_base": s_base,
        "rows": entries,
        "purity": to_json(&purity_rows),
    });
    Ok(Outcome {
        files: vec![
            ("glue.json".into(), pretty(&Value::Array(entries))),
            ("glue_sweep.csv".into(), csv),
        ],
        report,
        checks,
    })
}

fn fmt_complex(z: &num_complex::Complex64) -> String {
    if z.im == 0.0 {
        format!("{:e}", z.re)
    } else {
        format!("{:e}{:+e}i", z.re, z.im)
    }
}

fn run_indicial(p: IndicialParams) -> Result<Outcome, CliError> {
    check_n(p.n)?;
    let kr = smallest_positive_root(p.n, p.j_max)?;
    let zero = indicial_roots(&IndicialProblem::from_eigenvalue(0.0));
    let r5 = 5f64.sqrt();
    let expect = [(1.0 - r5) / 2.0, 0.0, 1.0, (1.0 + r5) / 2.0];
    let zero_err = zero
        .roots
        .iter()
        .zip(expect)
        .map(|(r, e)| (r - e).norm())
        .fold(0.0f64, f64::max);
    let idx = fredholm_index(p.n, p.eta, p.delta)?;
    let mut max_pairing = 0.0f64;
    let mut csv = String::from("j,lambda_e,mu_e,multiplicity,roots,kappa_running_min\n");
    for row in &kr.rows {
        let sp = indicial_roots(&IndicialProblem {
            lambda_e: row.lambda_e,
            mu_e: row.mu_e,
        });
        max_pairing = max_pairing.max(sp.pairing_error);
        let roots: Vec<String> = row.roots.iter().map(fmt_complex).collect();
        let _ = writeln!(
            csv,
            "{},{:e},{:e},{},{},{}",
            row.j,
            row.lambda_e,
            row.mu_e,
            row.multiplicity,
            roots.join(";"),
            row.kappa_running_min.map_or("".into(), |k| format!("{k:e}"))
        );
    }
    let expected_index = 1 - (p.n * p.n) as i64 + 1;
    let report = json!({
        "n": p.n,
        "j_max": p.j_max,
        "kappa": kr.kappa,
        "min_positive_real_part": kr.min_positive_real_part,
        "zero_mode_roots": zero.roots.iter().map(fmt_complex).collect::<Vec<_>>(),
        "max_pairing_error": max_pairing,
        "index": idx,
    });
    let checks = vec![
        check("zero_mode_roots", zero_err <= 1e-10, format!("max error {zero_err:e}")),
        check("root_pairing", max_pairing <= 1e-10, format!("max {max_pairing:e}")),
        check(
            "fredholm_index",
            idx.index == expected_index,
            format!(
                "{} + ({}) = {} vs 1 - (n^2 - 1) = {expected_index}",
                idx.ae_local, idx.cusp_local, idx.index
            ),
        ),
    ];
    Ok(Outcome {
        files: vec![("indicial.json".into(), pretty(&report)), ("indicial.csv".into(), csv)],
        report,
        checks,
    })
}

fn run_spectrum(p: SpectrumParams) -> Result<Outcome, CliError> {
    check_n(p.n)?;
    let spec = cp_spectrum(p.n, p.j_max)?;
    let ker = ker_lichnerowicz_e(p.n)?;
    let mut csv = String::from("j,eigenvalue,multiplicity,lich_eigenvalue\n");
    for e in &spec.entries {
        let _ = writeln!(csv, "{},{},{},{}", e.j, e.eigenvalue, e.multiplicity, e.lich_eigenvalue);
    }
    let m1 = spec.entries[1].multiplicity;
    let target = (p.n * p.n - 1) as u64;
    let report = json!({ "spectrum": spec, "kernel": ker });
    let checks = vec![
        check(
            "first_multiplicity",
            m1 == target,
            format!("{m1} vs n^2 - 1 = {target}"),
        ),
        check(
            "kernel_calibration",
            spec.entries[1].lich_eigenvalue == "0",
            format!("1/2 lambda_1^2 - lambda_1 = {}", spec.entries[1].lich_eigenvalue),
        ),
    ];
    Ok(Outcome {
        files: vec![("spectrum.json".into(), pretty(&report)), ("spectrum.csv".into(), csv)],
        report,
        checks,
    })
}

fn rational(s: &str, what: &str) -> Result<BigRational, CliError> {
    parse_rational(s).map_err(|e| usage(format!("{what}: {e}")))
}

fn run_topology(p: TopologyParams) -> Result<Outcome, CliError> {
    check_n(p.n)?;
    let d = KahlerClassData::new(
        p.n,
        rational(&p.c1, "c1")?,
        rational(&p.vol, "vol")?,
        rational(&p.epsilon, "epsilon")?,
    )?;
    let rep = topo::topology_report(&d)?;
    let at_zero = topo::avg_scalar_solution(&d.with_epsilon(BigRational::zero())?)?;
    let limit = BigRational::from_integer((p.n as i64).into()) * &d.c1_dot / &d.vol;
    let mut checks = vec![check(
        "epsilon_zero_limit",
        at_zero == limit,
        format!("{at_zero} vs {limit}"),
    )];
    if !p.eps_grid.is_empty() {
        let grid: Vec<BigRational> = p
            .eps_grid
            .iter()
            .map(|s| rational(s, "eps_grid"))
            .collect::<Result<_, _>>()?;
        if !d.c1_dot.is_negative() {
            let dec = topo::strictly_decreasing_on_grid(&d, &grid)?;
            checks.push(check("strictly_decreasing", dec, format!("{} grid points", grid.len())));
        }
    }
    let report = to_json(&rep);
    Ok(Outcome {
        files: vec![("topology.json".into(), pretty(&report))],
        report,
        checks,
    })
}

fn run_biharmonic(p: BiharmonicParams) -> Result<Outcome, CliError> {
    if p.n < 1 {
        return Err(usage("n must be positive"));
    }
    let sol = match p.side.as_str() {
        "interior" => biharmonic_interior(p.n, &p.h, &p.k, p.max_degree)?,
        "exterior" => biharmonic_exterior(p.n, &p.h, &p.k, p.max_degree)?,
        other => return Err(usage(format!("side must be interior or exterior, got {other:?}"))),
    };
    let mismatch = sol.boundary_mismatch(&p.h, &p.k);
    let mut checks = vec![
        check("biharmonic", sol.is_biharmonic(), "Delta^2 H = 0 per mode"),
        check(
            "boundary_mismatch",
            mismatch <= p.tol,
            format!("{mismatch:e} <= {:e}", p.tol),
        ),
    ];
    let mut extra = json!(null);
    if p.side == "exterior" {
        let big_n = 2 * p.n as i64;
        let allowed = [2 - big_n, 4 - big_n];
        let confined = sol
            .modes
            .iter()
            .filter(|m| m.degree == 0)
            .all(|m| m.terms.iter().all(|t| t.1 == 0.0 || allowed.contains(&t.0)));
        checks.push(check("degree0_span", confined, format!("powers in {allowed:?}")));
        let radii: Vec<f64> = (0..=20).map(|j| 2f64.powi(j)).collect();
        extra = json!({ "degree0_weighted_sup": sol.degree_zero_weighted_sup(&radii, 4.0 - 2.0 * p.n as f64) });
    }
    let report = json!({
        "n": p.n,
        "side": p.side,
        "solution": sol,
        "boundary_mismatch": mismatch,
        "decay": extra,
    });
    Ok(Outcome {
        files: vec![("biharmonic.json".into(), pretty(&report))],
        report,
        checks,
    })
}

fn dispatch(cli: Cli) -> Result<(Outcome, u64, Option<PathBuf>, &'static str), CliError> {
    let name = cli.command.name();
    let mut cfg = load_config(cli.config.as_deref(), name)?;
    let seed = match cli.seed {
        Some(s) => s,
        None => config_take::<u64>(&mut cfg, "seed")?.unwrap_or(0),
    };
    let cfg_out = config_take::<PathBuf>(&mut cfg, "out")?;
    let out = cli.out.or(cfg_out);
    let outcome = match &cli.command {
        Command::Profile(a) => run_profile(merge(&cfg, a)?)?,
        Command::CheckSfk(a) => run_check_sfk(merge(&cfg, a)?, seed)?,
        Command::Asymptotics(a) => run_asymptotics(merge(&cfg, a)?)?,
        Command::Glue(a) => run_glue(merge(&cfg, a)?)?,
        Command::Indicial(a) => run_indicial(merge(&cfg, a)?)?,
        Command::Spectrum(a) => run_spectrum(merge(&cfg, a)?)?,
        Command::Topology(a) => run_topology(merge(&cfg, a)?)?,
        Command::Biharmonic(a) => run_biharmonic(merge(&cfg, a)?)?,
    };
    Ok((outcome, seed, out, name))
}

fn write_files(dir: &Path, files: &[(String, String)]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| CliError::Numeric(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn main_with_args<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    if let Err(CliError::Usage(m)) = init_threads() {
        eprintln!("usage error: {m}");
        return EXIT_USAGE;
    }
    match dispatch(cli) {
        Err(CliError::Usage(m)) => {
            eprintln!("usage error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Numeric(m)) => {
            eprintln!("{}", json!({ "status": "error", "failures": [m] }));
            EXIT_NUMERIC
        }
        Ok((outcome, seed, out, name)) => {
            let pass = outcome.checks.iter().all(|c| c.pass);
            let summary = json!({
                "command": name,
                "seed": seed,
                "pass": pass,
                "checks": outcome.checks,
                "report": outcome.report,
            });
            if let Some(dir) = out {
                let mut files = outcome.files;
                files.push(("checks.json".into(), pretty(&summary)));
                if let Err(e) = write_files(&dir, &files) {
                    let (CliError::Usage(m) | CliError::Numeric(m)) = e;
                    eprintln!("{m}");
                    return EXIT_NUMERIC;
                }
            }
            print!("{}", pretty(&summary));
            if pass {
                EXIT_PASS
            } else {
                let failures: Vec<&Check> = outcome.checks.iter().filter(|c| !c.pass).collect();
                eprintln!("{}", json!({ "status": "fail", "failures": failures }));
                EXIT_NUMERIC
            }
        }
    }
}
