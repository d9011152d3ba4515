//! Argument parsing and dispatch for the `radialdpp` command.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use radialdpp::asymptotics::{beta_kernel_marginal, limit_variance_ginibre, limit_variance_hyperbolic, probe_binomial_exp, probe_k_coeff_power};
use radialdpp::experiments::{self, ReplicateRow};
use radialdpp::oracle::{moment_report, poisson_limit_diagnostics, soshnikov_diagnostics, MomentReport};
use radialdpp::{
    Coordinate, Ensemble, Error, ExperimentPlan, QuadratureSpec, ScalingFamily, ScalingRegime, Strategy, TestFunction, WindowSampler,
};

pub mod output;

pub use output::to_json_string;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_GOF: i32 = 4;

/// Environment variable capping the worker count; `0` or unset means automatic.
pub const THREADS_ENV: &str = "RADIALDPP_THREADS";

#[derive(Debug, Clone, Parser)]
#[command(name = "radialdpp", version, about = "Exact simulation and moment oracles for radial determinantal point processes")]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnsembleKind {
    Ginibre,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScalingKind {
    Fixed,
    Power,
    Exponential,
    Extreme,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoordinateKind {
    Raw,
    Hyperbolic,
    Scaled,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,
    /// Master seed, decimal or 0x-prefixed hexadecimal.
    #[arg(long, value_parser = parse_seed, default_value = "0xD99", global = true)]
    pub seed: u64,
    /// Progress messages on standard error.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Args)]
pub struct EnsembleArgs {
    #[arg(long, value_enum)]
    pub ensemble: Option<EnsembleKind>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct StatArgs {
    /// Test function as JSON `{"breakpoints": [...], "values": [...]}`; defaults to the indicator of [0, 1].
    #[arg(long = "f")]
    pub f: Option<PathBuf>,
    /// Radii, comma separated.
    #[arg(long = "R", value_delimiter = ',', allow_hyphen_values = true)]
    pub r: Vec<f64>,
    #[arg(long, value_enum)]
    pub scaling: Option<ScalingKind>,
    #[arg(long, default_value_t = 1.0)]
    pub coef: f64,
    /// Exponent of `a_R = coef · R^p`.
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<f64>,
    /// Rate of `a_R = coef · e^{cR}`.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Truncation tolerance on the expected number of missed points.
    #[arg(long, default_value_t = experiments::DEFAULT_EPS_TRUNC)]
    pub eps: f64,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    /// Experiment plan JSON; replaces the ensemble and statistic flags.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,
    #[arg(long, default_value_t = experiments::DEFAULT_LEVEL)]
    pub level: f64,
    /// Exit with status 4 when a goodness-of-fit test fails.
    #[arg(long)]
    pub strict: bool,
    /// Report statistics without a verdict.
    #[arg(long)]
    pub exploratory: bool,
    /// Per-replicate CSV; one file per radius when the ladder has several.
    #[arg(long)]
    pub rows: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Draw window-restricted samples of the moduli.
    Sample {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, value_enum, default_value = "raw")]
        coordinate: CoordinateKind,
        #[arg(long = "R")]
        r: Option<f64>,
        #[arg(long = "a-R")]
        a_r: Option<f64>,
        #[arg(long, default_value_t = 1)]
        reps: u64,
        #[arg(long, default_value_t = experiments::DEFAULT_EPS_TRUNC)]
        eps: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact and leading-order moments of a linear statistic.
    Moments {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[command(flatten)]
        stat: StatArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fixed-scale limit variance of a test function.
    Vf {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long = "f")]
        f: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check that the normalised pair kernel integrates to e^x.
    KernelCheck {
        #[arg(long, value_delimiter = ',', default_value = "1")]
        alpha: Vec<f64>,
        /// Grid `lo:hi:count`.
        #[arg(long, default_value = "-5:5:41", allow_hyphen_values = true)]
        xgrid: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fixed-scale CLT experiment.
    Clt(ExperimentArgs),
    /// White-noise CLT experiment with two disjoint statistics.
    Whitenoise {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Second test function; defaults to the indicator of [M_f + 1, M_f + 2].
        #[arg(long = "g")]
        g: Option<PathBuf>,
    },
    /// Poisson-limit experiment on the window [0, T].
    Poisson {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long = "T", required_unless_present = "plan")]
        t: Option<f64>,
    },
    /// Vanishing-scale CLT driven by the jump at the right end of the support.
    Superexp {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Confirm by sampling that the statistic is identically zero instead.
        #[arg(long)]
        zero_check: bool,
    },
    /// Exact variance against its vanishing envelope.
    Degenerate(ExperimentArgs),
    /// Soshnikov-condition quantities, avoidance diagnostics and lemma probes.
    Diagnose {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[command(flatten)]
        stat: StatArgs,
        /// Also probe the two approximation lemmas.
        #[arg(long)]
        lemmas: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub ens: EnsembleArgs,
    #[command(flatten)]
    pub stat: StatArgs,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let t = s.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {s:?}: {e}"))
}

/// Failure of a command, mapped to an exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(clap::Error),
    Validation(String),
    Numerical(Error),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) | CliError::Io(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e)
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

/// Parse `argv` (including the program name) and check the values that
/// clap cannot: ensemble parameters, test functions and plans are validated
/// later, in [`dispatch`], with exit status 3.
pub fn parse_args<I, T>(argv: I) -> Result<CliConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = CliConfig::try_parse_from(argv).map_err(CliError::Usage)?;
    if let Command::Clt(a) | Command::Degenerate(a) = &cfg.command {
        require_ensemble(a)?;
    }
    if let Command::Whitenoise { exp, .. } | Command::Poisson { exp, .. } | Command::Superexp { exp, .. } = &cfg.command {
        require_ensemble(exp)?;
    }
    Ok(cfg)
}

fn require_ensemble(a: &ExperimentArgs) -> Result<(), CliError> {
    if a.ens.ensemble.is_none() && a.mc.plan.is_none() {
        let mut cmd = <CliConfig as clap::CommandFactory>::command();
        return Err(CliError::Usage(cmd.error(clap::error::ErrorKind::MissingRequiredArgument, "--ensemble (or --plan) is required")));
    }
    Ok(())
}

fn ensemble_from(args: &EnsembleArgs) -> Result<Ensemble, CliError> {
    match (args.ensemble, args.alpha) {
        (None, _) => Err(validation("--ensemble is required")),
        (Some(EnsembleKind::Ginibre), None) => Ok(Ensemble::Ginibre),
        (Some(EnsembleKind::Ginibre), Some(_)) => Err(validation("--alpha applies only to the hyperbolic ensemble")),
        (Some(EnsembleKind::Hyperbolic), None) => Err(validation("--alpha is required for the hyperbolic ensemble")),
        (Some(EnsembleKind::Hyperbolic), Some(a)) => Ok(Ensemble::hyperbolic(a)?),
    }
}

fn read_function(path: &Path) -> Result<TestFunction, CliError> {
    let text = fs::read_to_string(path).map_err(|e| validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| validation(format!("invalid test function in {}: {e}", path.display())))
}

fn function_or_default(path: &Option<PathBuf>) -> Result<TestFunction, CliError> {
    match path {
        Some(p) => read_function(p),
        None => Ok(TestFunction::indicator(0.0, 1.0)?),
    }
}

/// Scaling family from the flags, or the command's default for the ensemble.
fn scaling_from(stat: &StatArgs, e: &Ensemble, default: ScalingFamily) -> Result<ScalingFamily, CliError> {
    let family = match stat.scaling {
        None => default,
        Some(ScalingKind::Fixed) => ScalingFamily::Fixed,
        Some(ScalingKind::Extreme) => ScalingFamily::Extreme,
        Some(ScalingKind::Power) => {
            ScalingFamily::Power { coef: stat.coef, p: stat.p.ok_or_else(|| validation("--scaling power needs --p"))? }
        }
        Some(ScalingKind::Exponential) => {
            ScalingFamily::Exponential { coef: stat.coef, c: stat.c.ok_or_else(|| validation("--scaling exponential needs --c"))? }
        }
    };
    ScalingRegime::classify(e, family)?;
    Ok(family)
}

fn check_eps(eps: f64) -> Result<(), CliError> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(validation(format!("--eps must lie in (0, 1), got {eps}")))
    }
}

fn radii(stat: &StatArgs) -> Result<Vec<f64>, CliError> {
    check_eps(stat.eps)?;
    if stat.r.is_empty() {
        return Err(validation("--R is required"));
    }
    Ok(stat.r.clone())
}

struct Emitter<'a> {
    output: &'a OutputArgs,
    stdout: &'a mut (dyn Write + Send),
}

impl Emitter<'_> {
    fn write(&mut self, payload: &str) -> Result<(), CliError> {
        match &self.output.out {
            Some(path) => {
                fs::write(path, payload)?;
                write_sidecar(path)?;
            }
            None => self.stdout.write_all(payload.as_bytes())?,
        }
        Ok(())
    }

    fn json<T: Serialize>(&mut self, value: &T) -> Result<(), CliError> {
        let mut s = to_json_string(value).map_err(|e| CliError::Io(io::Error::other(e)))?;
        s.push('\n');
        self.write(&s)
    }

    fn log(&self, level: u8, msg: impl FnOnce() -> String) {
        if self.output.verbose >= level {
            eprintln!("{}", msg());
        }
    }
}

/// Run metadata that would break byte-identical payloads goes next to the output.
fn write_sidecar(path: &Path) -> io::Result<()> {
    let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut log = path.as_os_str().to_owned();
    log.push(".log");
    fs::write(PathBuf::from(log), format!("written_at_unix={secs}\nversion={}\n", env!("CARGO_PKG_VERSION")))
}

fn csv_rows(rows: &[ReplicateRow]) -> Result<String, CliError> {
    let mut buf = Vec::new();
    experiments::write_replicate_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("ascii csv"))
}

fn write_rows_files(path: &Path, per_level: &[&[ReplicateRow]]) -> Result<(), CliError> {
    if per_level.len() == 1 {
        fs::write(path, csv_rows(per_level[0])?)?;
        return Ok(());
    }
    for (i, rows) in per_level.iter().enumerate() {
        let mut p = path.as_os_str().to_owned();
        p.push(format!(".R{i}"));
        fs::write(PathBuf::from(p), csv_rows(rows)?)?;
    }
    Ok(())
}

fn plan_from(a: &ExperimentArgs, default_scaling: impl Fn(&Ensemble) -> ScalingFamily, seed: u64) -> Result<ExperimentPlan, CliError> {
    if let Some(path) = &a.mc.plan {
        let text = fs::read_to_string(path).map_err(|e| validation(format!("cannot read {}: {e}", path.display())))?;
        let plan: ExperimentPlan =
            serde_json::from_str(&text).map_err(|e| validation(format!("invalid plan in {}: {e}", path.display())))?;
        plan.validate()?;
        return Ok(plan);
    }
    let e = ensemble_from(&a.ens)?;
    let f = function_or_default(&a.stat.f)?;
    let scaling = scaling_from(&a.stat, &e, default_scaling(&e))?;
    let mut plan = ExperimentPlan::new(e, f, scaling, radii(&a.stat)?, a.mc.reps).with_seed(seed);
    plan.eps_trunc = a.stat.eps;
    plan.level = a.mc.level;
    plan.exploratory = a.mc.exploratory;
    plan.validate()?;
    Ok(plan)
}

#[derive(Serialize)]
struct ExperimentOutput<'a, R> {
    plan: &'a ExperimentPlan,
    report: &'a R,
}

/// Serialize `{"plan": ..., "report": ...}` or the replicate rows, and map
/// the verdict to an exit status.
fn finish_experiment<R: Serialize>(
    em: &mut Emitter,
    a: &ExperimentArgs,
    plan: &ExperimentPlan,
    report: &R,
    rows: Vec<&[ReplicateRow]>,
    pass: Option<bool>,
) -> Result<i32, CliError> {
    match em.output.format {
        Format::Json => em.json(&ExperimentOutput { plan, report })?,
        Format::Csv => {
            let mut s = String::new();
            for r in &rows {
                s.push_str(&csv_rows(r)?);
            }
            em.write(&s)?;
        }
    }
    if let Some(path) = &a.mc.rows {
        write_rows_files(path, &rows)?;
    }
    Ok(if a.mc.strict && pass == Some(false) { EXIT_GOF } else { EXIT_OK })
}

fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || validation(format!("--xgrid must be lo:hi:count, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    if n == 0 || lo.partial_cmp(&hi).is_none_or(|o| o.is_gt()) {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

#[derive(Serialize)]
struct KernelCheckRow {
    alpha: f64,
    max_abs_error: f64,
    worst_x: f64,
}

fn output_of(cmd: &Command) -> &OutputArgs {
    match cmd {
        Command::Sample { output, .. }
        | Command::Moments { output, .. }
        | Command::Vf { output, .. }
        | Command::KernelCheck { output, .. }
        | Command::Diagnose { output, .. } => output,
        Command::Clt(a) | Command::Degenerate(a) => &a.output,
        Command::Whitenoise { exp, .. } | Command::Poisson { exp, .. } | Command::Superexp { exp, .. } => &exp.output,
    }
}

/// Run the configured command, writing reports to `--out` or `stdout`.
pub fn dispatch(cfg: &CliConfig, stdout: &mut (dyn Write + Send)) -> Result<i32, CliError> {
    let output = output_of(&cfg.command);
    let seed = output.seed;
    let mut em = Emitter { output, stdout };
    let spec = QuadratureSpec::default();
    match &cfg.command {
        Command::Sample { ens, lo, hi, coordinate, r, a_r, reps, eps, .. } => {
            let e = ensemble_from(ens)?;
            check_eps(*eps)?;
            let coord = match coordinate {
                CoordinateKind::Raw => Coordinate::RawModulus,
                CoordinateKind::Hyperbolic => Coordinate::HyperbolicModulus,
                CoordinateKind::Scaled => Coordinate::Scaled {
                    r: r.ok_or_else(|| validation("--coordinate scaled needs --R"))?,
                    a_r: a_r.ok_or_else(|| validation("--coordinate scaled needs --a-R"))?,
                },
            };
            let sampler = WindowSampler::new(&e, coord, &[*lo, *hi], *eps, Strategy::Auto, seed)?;
            em.log(1, || format!("index range {:?}, strategy {:?}", sampler.cells().range(), sampler.strategy()));
            let samples = (0..*reps).map(|rid| sampler.sample(rid)).collect::<radialdpp::Result<Vec<_>>>()?;
            match em.output.format {
                Format::Json => em.json(&samples)?,
                Format::Csv => {
                    let mut buf = b"replicate_id,n,value\n".to_vec();
                    for s in &samples {
                        s.write_csv_rows(&mut buf)?;
                    }
                    em.write(&String::from_utf8(buf).expect("ascii csv"))?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Moments { ens, stat, .. } => {
            let e = ensemble_from(ens)?;
            let f = function_or_default(&stat.f)?;
            let family = scaling_from(stat, &e, ScalingFamily::Fixed)?;
            let reports =
                radii(stat)?.iter().map(|&r| moment_report(&e, &f, r, family, stat.eps, &spec)).collect::<radialdpp::Result<Vec<_>>>()?;
            match em.output.format {
                Format::Json if reports.len() == 1 => em.json(&reports[0])?,
                Format::Json => em.json(&reports)?,
                Format::Csv => {
                    let mut buf = format!("{}\n", MomentReport::CSV_HEADER).into_bytes();
                    for rep in &reports {
                        rep.write_csv_row(&mut buf)?;
                    }
                    em.write(&String::from_utf8(buf).expect("ascii csv"))?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Vf { ens, f, .. } => {
            let e = ensemble_from(ens)?;
            let f = function_or_default(f)?;
            let v = match e {
                Ensemble::Ginibre => limit_variance_ginibre(&f),
                Ensemble::Hyperbolic { alpha } => limit_variance_hyperbolic(alpha, &f, &spec)?,
            };
            em.json(&serde_json::json!({ "V_f": v }))?;
            Ok(EXIT_OK)
        }
        Command::KernelCheck { alpha, xgrid, tol, .. } => {
            let xs = parse_grid(xgrid)?;
            let mut rows = Vec::new();
            for &a in alpha {
                let (mut worst, mut at) = (0.0f64, f64::NAN);
                for &x in &xs {
                    let err = (beta_kernel_marginal(a, x, &spec)? - x.exp()).abs();
                    if err >= worst {
                        worst = err;
                        at = x;
                    }
                }
                rows.push(KernelCheckRow { alpha: a, max_abs_error: worst, worst_x: at });
            }
            let max = rows.iter().fold(0.0f64, |m, r| m.max(r.max_abs_error));
            let pass = max <= *tol;
            em.json(&serde_json::json!({ "max_abs_error": max, "tolerance": tol, "pass": pass, "per_alpha": rows }))?;
            Ok(if pass { EXIT_OK } else { EXIT_NUMERICAL })
        }
        Command::Clt(a) => {
            let plan = plan_from(a, |_| ScalingFamily::Fixed, seed)?;
            let rep = experiments::run_clt(&plan)?;
            let rows = rep.levels.iter().map(|l| l.rows.as_slice()).collect();
            finish_experiment(&mut em, a, &plan, &rep, rows, rep.pass)
        }
        Command::Whitenoise { exp, g } => {
            let mut plan = plan_from(exp, white_noise_default, seed)?;
            if plan.g.is_none() {
                plan.g = Some(match g {
                    Some(p) => read_function(p)?,
                    None => {
                        let m = plan.f.support().1;
                        TestFunction::indicator(m + 1.0, m + 2.0)?
                    }
                });
            }
            let rep = experiments::run_whitenoise(&plan)?;
            let rows = rep.levels.iter().map(|l| l.rows.as_slice()).collect();
            finish_experiment(&mut em, exp, &plan, &rep, rows, rep.pass)
        }
        Command::Poisson { exp, t } => {
            let mut plan = plan_from(exp, |_| ScalingFamily::Extreme, seed)?;
            if plan.horizon.is_none() {
                let t = t.ok_or_else(|| validation("--T is required"))?;
                plan.horizon = Some(t);
                if exp.stat.f.is_none() && exp.mc.plan.is_none() && t > 0.0 {
                    plan.f = TestFunction::indicator(0.0, t)?;
                }
            }
            let rep = experiments::run_poisson(&plan)?;
            let rows = rep.levels.iter().map(|l| l.rows.as_slice()).collect();
            finish_experiment(&mut em, exp, &plan, &rep, rows, rep.pass)
        }
        Command::Superexp { exp, zero_check } => {
            let plan = plan_from(exp, |_| ScalingFamily::Power { coef: 1.0, p: -0.5 }, seed)?;
            if *zero_check {
                let rep = experiments::zero_statistic_check(&plan)?;
                let rows = rep.levels.iter().map(|l| l.rows.as_slice()).collect();
                return finish_experiment(&mut em, exp, &plan, &rep, rows, rep.pass);
            }
            let rep = experiments::run_superexp(&plan)?;
            let rows = rep.levels.iter().map(|l| l.rows.as_slice()).collect();
            finish_experiment(&mut em, exp, &plan, &rep, rows, rep.pass)
        }
        Command::Degenerate(a) => {
            let plan = plan_from(a, degenerate_default, seed)?;
            let rep = experiments::degenerate_check(&plan)?;
            finish_experiment(&mut em, a, &plan, &rep, Vec::new(), rep.pass)
        }
        Command::Diagnose { ens, stat, lemmas, .. } => {
            let e = ensemble_from(ens)?;
            let f = function_or_default(&stat.f)?;
            let family = scaling_from(stat, &e, ScalingFamily::Fixed)?;
            let extreme = matches!(ScalingRegime::classify(&e, family)?.class, radialdpp::asymptotics::RegimeClass::Extreme { .. });
            let mut levels = Vec::new();
            for r in radii(stat)? {
                let a_r = family.scale_at(&e, r);
                let mut level = serde_json::json!({
                    "R": r,
                    "a_R": a_r,
                    "soshnikov": soshnikov_diagnostics(&e, &f, r, a_r, stat.eps)?,
                });
                if extreme {
                    level["poisson"] = serde_json::to_value(poisson_limit_diagnostics(&e, r, a_r, &f, stat.eps)?)
                        .map_err(|e| CliError::Io(io::Error::other(e)))?;
                }
                levels.push(level);
            }
            let mut payload = serde_json::json!({ "levels": levels });
            if *lemmas {
                let power: Vec<Value> = [0.5, 1.0, 2.0]
                    .iter()
                    .map(|&a| probe_k_coeff_power(a).map(|p| serde_json::to_value(p).expect("serializable")))
                    .collect::<radialdpp::Result<_>>()?;
                payload["lemmas"] = serde_json::json!({
                    "binomial_exp": probe_binomial_exp(1.0)?,
                    "k_coeff_power": power,
                });
            }
            em.json(&payload)?;
            Ok(EXIT_OK)
        }
    }
}

fn white_noise_default(e: &Ensemble) -> ScalingFamily {
    match e {
        Ensemble::Ginibre => ScalingFamily::Power { coef: 1.0, p: 0.5 },
        Ensemble::Hyperbolic { .. } => ScalingFamily::Exponential { coef: 1.0, c: 0.5 },
    }
}

fn degenerate_default(e: &Ensemble) -> ScalingFamily {
    match e {
        Ensemble::Ginibre => ScalingFamily::Power { coef: 1.0, p: 2.0 },
        Ensemble::Hyperbolic { .. } => ScalingFamily::Exponential { coef: 1.0, c: 2.0 },
    }
}

/// Worker count from [`THREADS_ENV`]; `None` means automatic.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(validation(format!("{THREADS_ENV} must be a nonnegative integer, got {v:?}"))),
        },
    }
}

fn report_failure(err: &CliError, stdout: &mut (dyn Write + Send)) {
    match err {
        CliError::Usage(e) => {
            let _ = e.print();
        }
        CliError::Validation(msg) => eprintln!("error: {msg}"),
        CliError::Numerical(e) => {
            let body = serde_json::json!({ "error": { "kind": "numerical", "message": e.to_string() } });
            let _ = writeln!(stdout, "{}", to_json_string(&body).unwrap_or_default());
            eprintln!("error: {e}");
        }
        CliError::Io(e) => eprintln!("error: {e}"),
    }
}

/// Parse, dispatch inside a pool sized by [`THREADS_ENV`], and return the exit status.
pub fn run<I, T>(argv: I, stdout: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = parse_args(argv).and_then(|cfg| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads_from_env()? {
            builder = builder.num_threads(n);
        }
        let pool = builder.build().map_err(|e| CliError::Io(io::Error::other(e)))?;
        pool.install(|| dispatch(&cfg, stdout))
    });
    match result {
        Ok(code) => code,
        Err(CliError::Usage(e)) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            EXIT_OK
        }
        Err(err) => {
            report_failure(&err, stdout);
            err.exit_code()
        }
    }
}
