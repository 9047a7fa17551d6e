//! Command-line front end.
//!
//! Exit codes: 0 success, 1 domain / usage / I/O error, 2 numerical
//! non-convergence, 3 verification failure.

mod manifest;
pub mod verify;

pub use manifest::RunManifest;

use crate::analysis::{self, CrossingOptions, CurveSpec, Family, Spacing};
use crate::closedform::PdValue;
use crate::mathkit::QuadratureSpec;
use crate::montecarlo::{simulate_pd, TieRule, TrialConfig};
use crate::signals::{self, SignalSet};
use crate::{par, Convention, Error};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

/// Worker cap read at start-up; never changes any output.
pub const THREADS_ENV: &str = "SIMPLEX_GAUNTLET_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONVERGENCE: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "simplex-gauntlet",
    version,
    about = "Correct-decoding probabilities and crossing points for L1, Lc and simplex signal sets",
    allow_negative_numbers = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one closed-form P_d value.
    Pd(PdArgs),
    /// Tabulate probability curves to CSV.
    Sweep(SweepArgs),
    /// Locate the L1-family / simplex crossing point.
    Crossing(CrossingArgs),
    /// Monte-Carlo estimate of P_d for a signal set.
    Simulate(SimulateArgs),
    /// Code rate, Eb/N0 and capacity for (M, N_u, SNR).
    Rates(RatesArgs),
    /// Run a verification suite and write a pass/fail report.
    Verify(VerifyArgs),
    /// Re-run the command recorded in a run manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum FormulaArg {
    L1,
    Si,
    Lc,
}

impl From<FormulaArg> for Family {
    fn from(f: FormulaArg) -> Self {
        match f {
            FormulaArg::L1 => Family::L1,
            FormulaArg::Si => Family::Si,
            FormulaArg::Lc => Family::Lc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ConventionArg {
    Lambda2,
    Snr,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Lambda2 => Convention::Lambda2,
            ConventionArg::Snr => Convention::Snr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SpacingArg {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
enum SetArg {
    #[value(name = "l1")]
    #[serde(rename = "l1")]
    L1,
    #[value(name = "l1-eps")]
    #[serde(rename = "l1-eps")]
    L1Eps,
    #[value(name = "si")]
    #[serde(rename = "si")]
    Si,
    #[value(name = "lc")]
    #[serde(rename = "lc")]
    Lc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum TieRuleArg {
    #[value(name = "uniform_random")]
    UniformRandom,
    #[value(name = "lowest_index")]
    LowestIndex,
}

impl From<TieRuleArg> for TieRule {
    fn from(t: TieRuleArg) -> Self {
        match t {
            TieRuleArg::UniformRandom => TieRule::UniformRandom,
            TieRuleArg::LowestIndex => TieRule::LowestIndex,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct PdArgs {
    #[arg(long)]
    formula: FormulaArg,
    #[arg(long = "M")]
    m: usize,
    /// Energy λ² or normalized SNR, depending on --convention.
    #[arg(long)]
    x: f64,
    #[arg(long)]
    convention: ConventionArg,
    /// Also write the value as JSON (plus a manifest) to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct SweepArgs {
    /// Curve as family:M:convention, e.g. si:7:snr. Repeatable.
    #[arg(long = "curve", required = true)]
    curves: Vec<String>,
    #[arg(long, default_value_t = 0.0)]
    x_min: f64,
    #[arg(long)]
    x_max: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, value_enum, default_value_t = SpacingArg::Linear)]
    spacing: SpacingArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct CrossingArgs {
    #[arg(long = "M")]
    m: usize,
    #[arg(long)]
    convention: ConventionArg,
    #[arg(long, default_value_t = analysis::DEFAULT_X_MAX)]
    x_max: f64,
    #[arg(long, default_value_t = analysis::DEFAULT_X_TOL)]
    x_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    /// Built-in signal set.
    #[arg(
        long,
        conflicts_with = "set_file",
        required_unless_present = "set_file"
    )]
    set: Option<SetArg>,
    /// JSON signal set {label, priors, vectors}.
    #[arg(long)]
    set_file: Option<PathBuf>,
    #[arg(long = "M")]
    m: Option<usize>,
    /// Energy of the antipodal pair (L1 family) or of every vertex (SI).
    #[arg(long = "E", conflicts_with = "lambda2")]
    e: Option<f64>,
    /// Average signal energy λ².
    #[arg(long)]
    lambda2: Option<f64>,
    /// Half-width of the displaced origin cluster (l1-eps).
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 1)]
    direction_seed: u64,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = TieRuleArg::UniformRandom)]
    tie_rule: TieRuleArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct RatesArgs {
    #[arg(long = "M")]
    m: usize,
    #[arg(long = "N-u")]
    n_u: usize,
    #[arg(long)]
    snr: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Closedform,
    Figures,
    Crossings,
}

#[derive(Debug, Args, Serialize)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    #[arg(long, default_value_t = verify::DEFAULT_SEED)]
    seed: u64,
    /// Output directory for the report and manifest.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ReplayArgs {
    manifest: PathBuf,
}

/// Outcome of a command: an exit code once output has been written.
enum Outcome {
    Done,
    VerifyFailed,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => {
                par::init_threads(n);
            }
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got `{v}`");
                return EXIT_USAGE;
            }
        }
    }
    let argv: Vec<String> = argv
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match dispatch(cli.command, &argv) {
        Ok(Outcome::Done) => EXIT_OK,
        Ok(Outcome::VerifyFailed) => EXIT_VERIFY_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Convergence { .. } => EXIT_CONVERGENCE,
        _ => EXIT_USAGE,
    }
}

fn dispatch(command: Command, argv: &[String]) -> crate::Result<Outcome> {
    match command {
        Command::Pd(a) => cmd_pd(&a, argv),
        Command::Sweep(a) => cmd_sweep(&a, argv),
        Command::Crossing(a) => cmd_crossing(&a, argv),
        Command::Simulate(a) => cmd_simulate(&a, argv),
        Command::Rates(a) => cmd_rates(&a, argv),
        Command::Verify(a) => cmd_verify(&a, argv),
        Command::Replay(a) => {
            let manifest = RunManifest::read(&a.manifest)?;
            if manifest.argv.get(1).map(String::as_str) == Some("replay") {
                return Err(Error::domain("refusing to replay a replay manifest"));
            }
            let cli = Cli::try_parse_from(&manifest.argv)
                .map_err(|e| Error::domain(format!("manifest argv does not parse: {e}")))?;
            dispatch(cli.command, &manifest.argv)
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> crate::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn record<A: Serialize>(
    command: &str,
    args: &A,
    argv: &[String],
    seed: Option<u64>,
    outputs: &[&Path],
    manifest_path: &Path,
) -> crate::Result<()> {
    RunManifest::new(command, args, argv, seed, outputs)?.write(manifest_path)
}

fn cmd_pd(a: &PdArgs, argv: &[String]) -> crate::Result<Outcome> {
    let curve = CurveSpec::new(a.formula.into(), a.m, a.convention.into())?;
    let v: PdValue = curve.evaluate(a.x, &QuadratureSpec::default())?;
    println!("p_d = {}", v.value);
    println!("quadrature_error = {:e}", v.quadrature_error);
    if let Some(out) = &a.out {
        write_json(out, &v)?;
        record("pd", a, argv, None, &[out], &RunManifest::path_for(out))?;
    }
    Ok(Outcome::Done)
}

fn cmd_sweep(a: &SweepArgs, argv: &[String]) -> crate::Result<Outcome> {
    let curves = a
        .curves
        .iter()
        .map(|c| c.parse())
        .collect::<crate::Result<Vec<CurveSpec>>>()?;
    let spacing = match a.spacing {
        SpacingArg::Linear => Spacing::Linear,
        SpacingArg::Log => Spacing::Log,
    };
    let table = analysis::sweep(
        &curves,
        a.x_min,
        a.x_max,
        a.points,
        spacing,
        &QuadratureSpec::default(),
    )?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(&a.out, table.to_csv_string())?;
    record(
        "sweep",
        a,
        argv,
        None,
        &[&a.out],
        &RunManifest::path_for(&a.out),
    )?;
    println!("wrote {} rows to {}", table.rows.len(), a.out.display());
    Ok(Outcome::Done)
}

fn cmd_crossing(a: &CrossingArgs, argv: &[String]) -> crate::Result<Outcome> {
    let opts = CrossingOptions::with_range(a.x_max, a.x_tol);
    let r = analysis::find_crossing(a.m, a.convention.into(), &opts)?;
    match (r.found, r.x_cross) {
        (true, Some(x)) => println!(
            "M = {}, {}: crossing at x = {x:e} (P_d = {}, bracket width {:e})",
            r.m,
            r.convention,
            r.pd_at_cross.unwrap_or(f64::NAN),
            r.bracket_width.unwrap_or(f64::NAN)
        ),
        _ => println!(
            "M = {}, {}: no crossing on the {}-point grid over [{:e}, {:e}]",
            r.m, r.convention, r.scan.points, r.scan.x_min, r.scan.x_max
        ),
    }
    match &a.out {
        Some(out) => {
            write_json(out, &r)?;
            record(
                "crossing",
                a,
                argv,
                None,
                &[out],
                &RunManifest::path_for(out),
            )?;
        }
        None => println!("{}", serde_json::to_string(&r)?),
    }
    Ok(Outcome::Done)
}

fn build_set(a: &SimulateArgs) -> crate::Result<SignalSet> {
    if let Some(path) = &a.set_file {
        let text = fs::read_to_string(path)?;
        return SignalSet::from_json(&text);
    }
    let set = a
        .set
        .ok_or_else(|| Error::domain("either --set or --set-file is required"))?;
    let m =
        a.m.ok_or_else(|| Error::domain("--M is required for built-in sets"))?;
    // L1-family sets spread λ² = 2E/M; the simplex puts λ² on every vertex.
    let energy = match (a.e, a.lambda2, set) {
        (Some(e), None, _) => e,
        (None, Some(l), SetArg::Si) => l,
        (None, Some(l), _) => l * m as f64 / 2.0,
        _ => return Err(Error::domain("exactly one of --E or --lambda2 is required")),
    };
    match set {
        SetArg::L1 => signals::make_l1(m, energy),
        SetArg::L1Eps => signals::make_l1_eps(m, energy, a.eps),
        SetArg::Si => signals::make_simplex(m, energy),
        SetArg::Lc => signals::make_coded_l1(m, energy, a.direction_seed),
    }
}

fn cmd_simulate(a: &SimulateArgs, argv: &[String]) -> crate::Result<Outcome> {
    let set = build_set(a)?;
    let config = TrialConfig {
        set,
        sigma2: a.sigma2,
        trials: a.trials,
        seed: a.seed,
        tie_rule: a.tie_rule.into(),
    };
    let est = simulate_pd(&config)?;
    match &a.out {
        Some(out) => {
            write_json(out, &est)?;
            record(
                "simulate",
                a,
                argv,
                Some(a.seed),
                &[out],
                &RunManifest::path_for(out),
            )?;
            println!(
                "p_hat = {} ± {} ({} trials) -> {}",
                est.p_hat,
                est.stderr,
                est.trials,
                out.display()
            );
        }
        None => println!("{}", serde_json::to_string_pretty(&est)?),
    }
    Ok(Outcome::Done)
}

#[derive(Debug, Serialize)]
struct RatesReport {
    #[serde(rename = "M")]
    m: usize,
    n_u: usize,
    snr: f64,
    rate: f64,
    ebn0: f64,
    capacity_per_dimension: f64,
}

fn cmd_rates(a: &RatesArgs, argv: &[String]) -> crate::Result<Outcome> {
    let rate = signals::code_rate(a.m, a.n_u)?;
    let report = RatesReport {
        m: a.m,
        n_u: a.n_u,
        snr: a.snr,
        rate,
        ebn0: signals::ebn0_from_snr(a.snr, rate)?,
        capacity_per_dimension: signals::capacity_per_dimension(a.snr)?,
    };
    println!("R = {}", report.rate);
    println!("Eb/N0 = {}", report.ebn0);
    println!("C = {}", report.capacity_per_dimension);
    if let Some(out) = &a.out {
        write_json(out, &report)?;
        record("rates", a, argv, None, &[out], &RunManifest::path_for(out))?;
    }
    Ok(Outcome::Done)
}

fn cmd_verify(a: &VerifyArgs, argv: &[String]) -> crate::Result<Outcome> {
    let report = verify::run_suite(a.suite, a.seed)?;
    fs::create_dir_all(&a.out)?;
    let report_path = a.out.join(format!("verify_{}.json", report.suite));
    write_json(&report_path, &report)?;
    record(
        "verify",
        a,
        argv,
        Some(a.seed),
        &[&report_path],
        &a.out.join(format!("verify_{}.manifest.json", report.suite)),
    )?;
    for c in &report.checks {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    Ok(if report.passed {
        Outcome::Done
    } else {
        Outcome::VerifyFailed
    })
}
