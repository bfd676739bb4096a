//! Command-line front end.
//!
//! Every command writes either CSV (sweeps) or JSON (reports), and every
//! output carries a [`RunManifest`]. Worker count never changes the bytes
//! written, only the manifest timestamp can differ between runs; set
//! `SOURCE_DATE_EPOCH` to pin it.
//!
//! Exit codes: 0 success, 1 usage, 2 channel not completely positive,
//! 3 numerical failure.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::channel::{dephase, PureProbe};
use crate::channel::{noise_to_dephasing, DephasingParams, NoiseModel};
use crate::classical::{error_prop_variance, four_arm_variance, idiff_moments, mc_classical_oracle, CoherentConfig};
use crate::entanglement::{distillable_entanglement, mc_state};
use crate::interferometer::{
    bootstrap_precision, estimator_moments, fisher_information, outcome_probs, sample_counts,
    sample_counts_kick_settings, visibility, CountRecord, InterferometerConfig, Normalization,
};
use crate::metrology::{q_opt, qfi_closed, qfi_max, qfi_numeric, signal_generator};
use crate::Error;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QASYM_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CP: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Provenance attached to every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub seed: u64,
    pub tool_version: String,
    /// UTC, RFC 3339.
    pub timestamp: String,
}

impl RunManifest {
    fn new(command: &str, args: &impl Serialize, seed: u64) -> Self {
        let parameters = match serde_json::to_value(args) {
            Ok(Value::Object(m)) => m.into_iter().collect(),
            _ => BTreeMap::new(),
        };
        RunManifest {
            command: command.to_string(),
            parameters,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: utc_timestamp(),
        }
    }
}

fn utc_timestamp() -> String {
    let pinned = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0));
    pinned
        .unwrap_or_else(chrono::Utc::now)
        .format("%Y-%m-%dT%H:%M:%SZ")
        .to_string()
}

#[derive(Debug, Parser)]
#[command(
    name = "qasym",
    version,
    about = "Phase estimation with correlated reference-phase noise"
)]
pub struct Cli {
    /// Worker threads (does not affect results).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quantum Fisher information of the dephased probe.
    Qfi(QfiArgs),
    /// Parameter sweep written as CSV.
    Sweep(SweepArgs),
    /// Simulate detector counts.
    Simulate(SimulateArgs),
    /// Simulate (or load) counts and bootstrap the estimator precision.
    Estimate(EstimateArgs),
    /// Coherent-light error propagation.
    Classical(ClassicalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Kicks,
    Gaussian,
}

/// Channel given either directly by `(η, κ)` or through a noise model.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ChannelArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[arg(long, value_enum, conflicts_with_all = ["eta", "kappa"])]
    pub model: Option<ModelKind>,
    /// Kick amplitude (rad).
    #[arg(long, allow_negative_numbers = true)]
    pub phi0: Option<f64>,
    /// Gaussian phase variance (rad²).
    #[arg(long, allow_negative_numbers = true)]
    pub sigma2: Option<f64>,
    /// Phase correlation.
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
}

impl ChannelArgs {
    fn noise(&self, c_override: Option<f64>) -> Result<Option<NoiseModel>, CliError> {
        let c = c_override.or(self.c).unwrap_or(0.0);
        Ok(match self.model {
            None => None,
            Some(ModelKind::Kicks) => {
                let phi0 = self.phi0.ok_or_else(|| usage("--model kicks needs --phi0"))?;
                Some(NoiseModel::kicks(phi0, c)?)
            }
            Some(ModelKind::Gaussian) => {
                let s2 = self.sigma2.ok_or_else(|| usage("--model gaussian needs --sigma2"))?;
                Some(NoiseModel::gaussian_from_variance(s2, c)?)
            }
        })
    }

    fn resolve(&self) -> Result<(DephasingParams, Option<NoiseModel>), CliError> {
        match self.noise(None)? {
            Some(n) => Ok((noise_to_dephasing(&n), Some(n))),
            None => {
                let (eta, kappa) = match (self.eta, self.kappa) {
                    (Some(e), Some(k)) => (e, k),
                    _ => return Err(usage("give --eta and --kappa, or --model with its parameters")),
                };
                Ok((DephasingParams::new(eta, kappa)?, None))
            }
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct QfiArgs {
    #[arg(long)]
    pub q: f64,
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Also evaluate the QFI through the symmetric logarithmic derivative.
    #[arg(long)]
    pub numeric: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Theta,
    Kappa,
    C,
    N0,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(value_enum)]
    pub kind: SweepKind,
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Intrinsic visibility.
    #[arg(long, default_value_t = 1.0)]
    pub v: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta0: f64,
    /// Phase for the n0 sweep.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExperimentArgs {
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, default_value_t = 1.0)]
    pub v: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta0: f64,
    /// True phase.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    /// Photons to simulate.
    #[arg(long = "n", default_value_t = 1_000_000)]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// With `--model kicks`, sample each of the four phase settings explicitly.
    #[arg(long)]
    pub kick_settings: bool,
}

impl ExperimentArgs {
    fn config(&self) -> Result<(InterferometerConfig, Option<NoiseModel>), CliError> {
        let (params, noise) = self.channel.resolve()?;
        Ok((InterferometerConfig::new(self.q, params, self.v, self.theta0)?, noise))
    }

    fn simulate(&self) -> Result<(InterferometerConfig, CountRecord, Value), CliError> {
        let (cfg, noise) = self.config()?;
        if self.kick_settings {
            let noise = match noise {
                Some(n @ NoiseModel::Kicks { .. }) => n,
                _ => return Err(usage("--kick-settings needs --model kicks")),
            };
            let (per, record) =
                sample_counts_kick_settings(self.q, &noise, self.v, self.theta, self.theta0, self.n, self.seed)?;
            Ok((cfg, record, serde_json::to_value(per).map_err(io)?))
        } else {
            Ok((cfg, sample_counts(&cfg, self.theta, self.n, self.seed)?, Value::Null))
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormArg {
    FringeSlope,
    Visibility,
}

impl From<NormArg> for Normalization {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::FringeSlope => Normalization::FringeSlope,
            NormArg::Visibility => Normalization::Visibility,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    #[arg(long, default_value_t = 1000)]
    pub n_sets: usize,
    #[arg(long, default_value_t = 10_000)]
    pub set_size: usize,
    /// Count record (output of `simulate`) to resample instead of simulating.
    #[arg(long)]
    pub counts: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = NormArg::FringeSlope)]
    pub normalization: NormArg,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassicalArgs {
    #[arg(long, default_value_t = 1e6)]
    pub n0: f64,
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    #[arg(long, default_value_t = std::f64::consts::LN_2)]
    pub sigma2: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub c: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    /// Also report the four-arm scheme.
    #[arg(long)]
    pub four_arm: bool,
    /// Monte-Carlo oracle sample count.
    #[arg(long)]
    pub mc: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Library(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Library(e) => library_exit_code(e),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Library(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Library(e)
    }
}

/// Exit code for a library error.
pub fn library_exit_code(e: &Error) -> i32 {
    match e {
        Error::NotCompletelyPositive { .. } => EXIT_CP,
        Error::InvalidParameter { .. } => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

fn usage(m: &str) -> CliError {
    CliError::Usage(m.to_string())
}

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(usage("--threads must be at least 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => {
                let (r, buf) = pool.install(|| {
                    let mut buf = Vec::new();
                    (execute(&cli.command, &mut buf), buf)
                });
                out.write_all(&buf).map_err(io).and(r)
            }
            Err(e) => Err(CliError::Io(e.to_string())),
        },
        None => execute(&cli.command, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "qasym: {e}");
            e.exit_code()
        }
    }
}

fn execute(cmd: &Command, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Qfi(a) => cmd_qfi(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Estimate(a) => cmd_estimate(a, out),
        Command::Classical(a) => cmd_classical(a, out),
    }
}

/// Fixed-width scientific format with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv_row(buf: &mut String, row: &[f64]) {
    let cells: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
    buf.push_str(&cells.join(","));
    buf.push('\n');
}

/// `--out` if given, otherwise `$QASYM_OUT_DIR/<default_name>`, otherwise stdout.
fn destination(explicit: &Option<PathBuf>, default_name: &str) -> Option<PathBuf> {
    explicit.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| Path::new(&d).join(default_name))
    })
}

fn emit(text: &str, dest: Option<PathBuf>, out: &mut dyn Write) -> Result<(), CliError> {
    match dest {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| io(format!("{}: {e}", parent.display())))?;
            }
            std::fs::write(&path, text).map_err(|e| io(format!("{}: {e}", path.display())))?;
            writeln!(out, "wrote {}", path.display()).map_err(io)
        }
        None => out.write_all(text.as_bytes()).map_err(io),
    }
}

fn emit_json(value: &Value, dest: Option<PathBuf>, out: &mut dyn Write) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(io)?;
    text.push('\n');
    emit(&text, dest, out)
}

fn cmd_qfi(a: &QfiArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (params, _) = a.channel.resolve()?;
    let closed = qfi_closed(a.q, &params)?.value;
    let mut header = vec!["q", "eta", "kappa", "qfi"];
    let mut row = vec![a.q, params.eta(), params.kappa(), closed];
    if a.numeric {
        let rho = dephase(&PureProbe::new(a.q)?, &params);
        header.push("qfi_numeric");
        row.push(qfi_numeric(&rho, &signal_generator())?.value);
    }
    header.extend(["q_opt", "qfi_max"]);
    row.push(q_opt(params.kappa()).unwrap_or(f64::NAN));
    row.push(qfi_max(&params));
    let mut text = header.join(",");
    text.push('\n');
    write_csv_row(&mut text, &row);
    out.write_all(text.as_bytes()).map_err(io)
}

fn grid(from: f64, to: f64, points: usize, geometric: bool) -> Result<Vec<f64>, CliError> {
    if points == 0 {
        return Err(usage("--points must be at least 1"));
    }
    if !(from.is_finite() && to.is_finite()) || (geometric && !(from > 0.0 && to > 0.0)) {
        return Err(usage("sweep range must be finite (and positive for n0)"));
    }
    if points == 1 {
        return Ok(vec![from]);
    }
    let step = |i: usize| i as f64 / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i == points - 1 {
                to
            } else if geometric {
                (from.ln() + (to.ln() - from.ln()) * step(i)).exp()
            } else {
                from + (to - from) * step(i)
            }
        })
        .collect())
}

fn collect_rows(xs: &[f64], f: impl Fn(f64) -> Result<Vec<f64>, CliError> + Sync) -> Result<Vec<Vec<f64>>, CliError> {
    xs.par_iter().map(|&x| f(x)).collect()
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (header, rows): (&str, Vec<Vec<f64>>) = match a.kind {
        SweepKind::Theta => {
            let (params, _) = a.channel.resolve()?;
            let cfg = InterferometerConfig::new(a.q, params, a.v, a.theta0)?;
            let xs = grid(a.from.unwrap_or(-PI), a.to.unwrap_or(PI), a.points, false)?;
            let qfi = qfi_closed(a.q, &params)?.value;
            let vis = visibility(&cfg);
            let rows = collect_rows(&xs, |th| {
                let p = outcome_probs(&cfg, th)?;
                let fi = fisher_information(&cfg, th).map(|r| r.value).unwrap_or(f64::NAN);
                Ok(vec![th, p.p1, p.p2, p.p3, fi, qfi, vis])
            })?;
            ("theta,p1,p2,p3,fi,qfi,visibility", rows)
        }
        SweepKind::Kappa => {
            let eta = a.channel.eta.ok_or_else(|| usage("kappa sweep needs --eta"))?;
            DephasingParams::new(eta, 1.0)?;
            let lo = 2.0 * eta * eta - 1.0;
            let xs = grid(a.from.unwrap_or(lo), a.to.unwrap_or(1.0), a.points, false)?;
            let rows = collect_rows(&xs, |kappa| {
                let params = DephasingParams::new(eta, kappa)?;
                let cfg = InterferometerConfig::new(a.q, params, a.v, a.theta0)?;
                let fi = fisher_information(&cfg, a.theta0).map(|r| r.value).unwrap_or(f64::NAN);
                Ok(vec![
                    kappa,
                    qfi_closed(a.q, &params)?.value,
                    fi,
                    q_opt(kappa).unwrap_or(f64::NAN),
                    qfi_max(&params),
                    distillable_entanglement(&mc_state(a.q, &params)?),
                ])
            })?;
            ("kappa,qfi,fi,q_opt,qfi_max,e_d", rows)
        }
        SweepKind::C => {
            if a.channel.model.is_none() {
                return Err(usage("c sweep needs --model kicks|gaussian"));
            }
            let xs = grid(a.from.unwrap_or(-1.0), a.to.unwrap_or(1.0), a.points, false)?;
            let rows = collect_rows(&xs, |c| {
                let noise = a.channel.noise(Some(c))?.expect("model checked above");
                let params = noise_to_dephasing(&noise);
                let cfg = InterferometerConfig::new(a.q, params, a.v, a.theta0)?;
                let fi = fisher_information(&cfg, a.theta0).map(|r| r.value).unwrap_or(f64::NAN);
                Ok(vec![
                    c,
                    params.eta(),
                    params.kappa(),
                    qfi_closed(a.q, &params)?.value,
                    fi,
                    visibility(&cfg),
                ])
            })?;
            ("c,eta,kappa,qfi,fi,visibility", rows)
        }
        SweepKind::N0 => {
            let s2 = a.channel.sigma2.ok_or_else(|| usage("n0 sweep needs --sigma2"))?;
            let noise = NoiseModel::gaussian_from_variance(s2, a.channel.c.unwrap_or(0.0))?;
            let xs = grid(a.from.unwrap_or(1e2), a.to.unwrap_or(1e6), a.points, true)?;
            let rows = collect_rows(&xs, |n0| {
                let cfg = CoherentConfig::new(n0, a.q, noise, a.theta)?;
                let three = error_prop_variance(&cfg)?;
                let four = four_arm_variance(&cfg)?;
                Ok(vec![
                    n0,
                    three.var_theta,
                    three.quantum_term,
                    three.classical_term,
                    four.var_theta,
                    four.quantum_term,
                    three.asymptotic_floor,
                ])
            })?;
            (
                "n0,var_theta,quantum_term,classical_term,four_arm_var_theta,four_arm_quantum_term,floor",
                rows,
            )
        }
    };
    let manifest = RunManifest::new("sweep", a, 0);
    let mut text = format!(
        "# manifest: {}\n{header}\n",
        serde_json::to_string(&manifest).map_err(io)?
    );
    for row in &rows {
        write_csv_row(&mut text, row);
    }
    let name = format!(
        "sweep_{}.csv",
        serde_json::to_value(a.kind)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default()
    );
    emit(&text, destination(&a.out, &name), out)
}

fn zero_outcome_notes(record: &CountRecord) -> Vec<String> {
    let mut notes = Vec::new();
    for (i, &c) in record.counts.iter().enumerate() {
        if c == 0 {
            notes.push(format!("no counts on outcome {}", i + 1));
        }
    }
    notes
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let e = &a.experiment;
    let (cfg, record, per_setting) = e.simulate()?;
    let probs = outcome_probs(&cfg, e.theta)?;
    let value = json!({
        "manifest": RunManifest::new("simulate", a, e.seed),
        "record": record,
        "frequencies": record.frequencies(),
        "expected_probabilities": probs.as_array(),
        "kick_settings": per_setting,
        "notes": zero_outcome_notes(&record),
    });
    emit_json(&value, destination(&a.out, "simulate.json"), out)
}

fn load_counts(path: &Path) -> Result<CountRecord, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| usage(&format!("{}: {e}", path.display())))?;
    let inner = value.get("record").cloned().unwrap_or(value);
    serde_json::from_value(inner).map_err(|e| usage(&format!("{}: not a count record: {e}", path.display())))
}

fn cmd_estimate(a: &EstimateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let e = &a.experiment;
    let (cfg, record) = match &a.counts {
        Some(path) => {
            let r = load_counts(path)?;
            (r.config, r)
        }
        None => {
            let (cfg, r, _) = e.simulate()?;
            (cfg, r)
        }
    };
    let norm: Normalization = a.normalization.into();
    let report = bootstrap_precision(&record, a.n_sets, a.set_size, &cfg, e.seed, norm)?;
    let fi = fisher_information(&cfg, cfg.theta0)?.value;
    let (mean, variance) = estimator_moments(&cfg, record.theta, norm)?;
    let z = (report.precision - fi) / report.precision_std_error;
    let value = json!({
        "manifest": RunManifest::new("estimate", a, e.seed),
        "counts": record,
        "report": report,
        "fisher_information": fi,
        "qfi": qfi_closed(cfg.q, &cfg.params)?.value,
        "predicted_single_shot": { "mean": mean, "variance": variance },
        "z_precision_vs_fi": z,
        "notes": zero_outcome_notes(&record),
    });
    emit_json(&value, destination(&a.out, "estimate.json"), out)
}

fn cmd_classical(a: &ClassicalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let noise = NoiseModel::gaussian_from_variance(a.sigma2, a.c)?;
    let cfg = CoherentConfig::new(a.n0, a.q, noise, a.theta)?;
    let three = error_prop_variance(&cfg)?;
    let mut value = json!({
        "manifest": RunManifest::new("classical", a, a.seed),
        "config": cfg,
        "three_arm": three,
        "single_photon_qfi": qfi_closed(a.q, &cfg.dephasing())?.value,
    });
    if a.four_arm {
        value["four_arm"] = serde_json::to_value(four_arm_variance(&cfg)?).map_err(io)?;
    }
    if let Some(samples) = a.mc {
        let mc = mc_classical_oracle(&cfg, samples, a.seed)?;
        value["monte_carlo"] = serde_json::to_value(mc).map_err(io)?;
        value["z_scores"] = serde_json::to_value(mc.z_scores(&idiff_moments(&cfg))).map_err(io)?;
    }
    emit_json(&value, destination(&a.out, "classical.json"), out)
}
