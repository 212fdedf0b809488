//! Command-line front end for `lglab`.
//!
//! Every command produces flat records written as CSV (default) or JSON to
//! stdout or `--output`. Values come from command-line flags first, then
//! from an optional JSON `--config` file, then from built-in defaults.
//! The seed additionally falls back to `LGLAB_SEED` before its default.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use lglab::experiment::{self, MzRuns, RunKind, RunSpec};
use lglab::interferometer::{self, MZConfig};
use lglab::lgi::{self, LgIndex};
use lglab::mrcheck::{self, CorrelationTriple};
use lglab::qcore::Outcome;
use lglab::{quasiprob, weakval, Error};
use serde::Deserialize;

pub mod record;

pub use record::{CsvTable, Format, OutputRecord, Value};

/// Environment variable consulted for the seed when neither flag nor
/// config file sets one.
pub const SEED_ENV: &str = "LGLAB_SEED";

const UNDEFINED: &str = "undefined";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    /// 2 for bad input, 1 for broken invariants.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::Internal(_)) | CliError::Internal(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lglab", version, about = "Interference, weak values and Leggett-Garg tests")]
pub struct Cli {
    /// JSON file whose keys mirror the long flag names.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detection probabilities at the two output ports.
    Probabilities(StateArgs),
    /// Path weak values for each post-selected port.
    WeakValues(StateArgs),
    /// The four two-time LG quantities over a grid of beta.
    LgiSweep(SweepArgs),
    /// The four LG curves over 1001 points in [-1, 1].
    ReproduceFig2,
    /// Quasiprobabilities of the path and output observables.
    Quasiprob(StateArgs),
    /// Whether two-time moments admit a classical joint distribution.
    MrCheck(MomentArgs),
    /// Finite-shot sampling of one run kind.
    Simulate(SimulateArgs),
    /// Estimated disturbance of the output statistics by a path measurement.
    Nsit(NsitArgs),
}

#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Defaults to +sqrt(1 - beta^2).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Phase shift in radians.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub max: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct MomentArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub e2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub e3: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub e23: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// interference, path or sequential.
    #[arg(long)]
    pub kind: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct NsitArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    pub phi: Option<f64>,
    pub grid: Option<usize>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub e2: Option<f64>,
    pub e3: Option<f64>,
    pub e23: Option<f64>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub kind: Option<String>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

const DEFAULT_GRID: usize = 1001;
const DEFAULT_SHOTS: u64 = 100_000;
const DEFAULT_SEED: u64 = 0;

fn required<T>(name: &str, flag: Option<T>, config: Option<T>) -> Result<T, CliError> {
    flag.or(config)
        .ok_or_else(|| CliError::Usage(format!("missing value for --{name} (flag or config key \"{name}\")")))
}

fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag.or(config) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not an unsigned 64-bit integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn resolve_cfg(args: &StateArgs, config: &ConfigFile) -> Result<MZConfig, CliError> {
    let beta = required("beta", args.beta, config.beta)?;
    let cfg = match args.alpha.or(config.alpha) {
        Some(alpha) => MZConfig::new(alpha, beta)?,
        None => MZConfig::from_beta(beta)?,
    };
    Ok(match args.phi.or(config.phi) {
        Some(phi) => cfg.with_phi(phi)?,
        None => cfg,
    })
}

fn resolve_shots(flag: Option<u64>, config: &ConfigFile) -> Result<u64, CliError> {
    match flag.or(config.shots).unwrap_or(DEFAULT_SHOTS) {
        0 => Err(Error::ZeroShots.into()),
        n => Ok(n),
    }
}

fn state_record(cfg: &MZConfig) -> OutputRecord {
    OutputRecord::new()
        .with("beta", cfg.beta())
        .with("alpha", cfg.alpha())
        .with("phi", cfg.phi())
}

fn violated_label(v: Option<LgIndex>) -> Value {
    match v {
        Some(i) => Value::Text(i.label().to_string()),
        None => Value::Text("none".into()),
    }
}

/// Real part, imaginary part and anomaly flag, or the sentinel for a dark port.
fn weak_value_fields(w: &lglab::Result<weakval::WeakValueResult>) -> Result<(Value, Value, Value), CliError> {
    match w {
        Ok(r) => Ok((r.value.re.into(), r.value.im.into(), r.anomalous_real.into())),
        Err(Error::OrthogonalPostSelection { .. }) => Ok((UNDEFINED.into(), UNDEFINED.into(), UNDEFINED.into())),
        Err(e) => Err(e.clone().into()),
    }
}

fn optional(x: Option<f64>) -> Value {
    x.map_or(Value::Text(UNDEFINED.into()), Value::Num)
}

/// Records produced by a command, before serialization.
pub fn records(command: &Command, config: &ConfigFile) -> Result<Vec<OutputRecord>, CliError> {
    match command {
        Command::Probabilities(args) => {
            let cfg = resolve_cfg(args, config)?;
            let (p3, p4) = interferometer::detection_probabilities(&cfg);
            Ok(vec![state_record(&cfg).with("p3", p3).with("p4", p4)])
        }
        Command::WeakValues(args) => {
            let cfg = resolve_cfg(args, config)?;
            let wv = weakval::mz_weak_values(&cfg)?;
            let (p3, p4) = interferometer::detection_probabilities(&cfg);
            let (w3, w3_im, w3_an) = weak_value_fields(&wv.w3)?;
            let (w4, w4_im, w4_an) = weak_value_fields(&wv.w4)?;
            let rec = state_record(&cfg)
                .with("w3", w3)
                .with("w3_imag", w3_im)
                .with("w3_anomalous", w3_an)
                .with("w4", w4)
                .with("w4_imag", w4_im)
                .with("w4_anomalous", w4_an);
            Ok(vec![rec.with("p3", p3).with("p4", p4)])
        }
        Command::LgiSweep(args) => {
            let n = args.grid.or(config.grid).unwrap_or(DEFAULT_GRID);
            let min = args.min.or(config.min).unwrap_or(-1.0);
            let max = args.max.or(config.max).unwrap_or(1.0);
            sweep(n, min, max, true)
        }
        Command::ReproduceFig2 => sweep(DEFAULT_GRID, -1.0, 1.0, false),
        Command::Quasiprob(args) => {
            let cfg = resolve_cfg(args, config)?;
            let t = quasiprob::mz_quasi(&cfg)?;
            let pre = interferometer::input_state(&cfg)?;
            let m3 = interferometer::effective_output_observable(&cfg)?;
            let (r2, r3) = quasiprob::nsit_check(&pre, &interferometer::path_observable(), &m3)?;
            use Outcome::{Minus, Plus};
            Ok(vec![state_record(&cfg)
                .with("q_p1_p1", t.get(Plus, Plus))
                .with("q_p1_m1", t.get(Plus, Minus))
                .with("q_m1_p1", t.get(Minus, Plus))
                .with("q_m1_m1", t.get(Minus, Minus))
                .with("sum", t.sum())
                .with("negativity", t.negativity)
                .with("nsit_residual_m2", r2)
                .with("nsit_residual_m3", r3)
                .with("signaling_gap_projective", quasiprob::signaling_gap_projective(&cfg)?)])
        }
        Command::MrCheck(args) => {
            let t = CorrelationTriple::new(
                required("e2", args.e2, config.e2)?,
                required("e3", args.e3, config.e3)?,
                required("e23", args.e23, config.e23)?,
            )?;
            let v = mrcheck::macrorealist_feasible(&t);
            let o = mrcheck::feasibility_oracle(&t);
            if v.feasible != o.feasible {
                return Err(CliError::Internal("feasibility routes disagree".into()));
            }
            let k = t.lg_values();
            Ok(vec![OutputRecord::new()
                .with("e2", t.e2())
                .with("e3", t.e3())
                .with("e23", t.e23())
                .with("feasible", v.feasible)
                .with("margin", v.margin)
                .with("oracle_feasible", o.feasible)
                .with("oracle_margin", o.margin)
                .with("K31", k[0])
                .with("K32", k[1])
                .with("K33", k[2])
                .with("K34", k[3])])
        }
        Command::Simulate(args) => {
            let cfg = resolve_cfg(&args.state, config)?;
            let shots = resolve_shots(args.shots, config)?;
            let seed = resolve_seed(args.seed, config.seed)?;
            let kind: RunKind = match args.kind.as_ref().or(config.kind.as_ref()) {
                Some(k) => k.parse()?,
                None => RunKind::Interference,
            };
            let est = experiment::run(&RunSpec::new(cfg, shots, seed, kind)?)?;
            let probs = experiment::outcome_probabilities(&cfg, kind)?;
            Ok((0..est.labels.len())
                .map(|i| {
                    state_record(&cfg)
                        .with("kind", kind.name())
                        .with("shots", shots)
                        .with("seed", seed)
                        .with("rng", experiment::RNG_ALGORITHM)
                        .with("outcome", est.labels[i].clone())
                        .with("count", est.counts[i])
                        .with("estimate", est.estimates[i])
                        .with("stderr", est.stderr[i])
                        .with("zero_count_upper", est.zero_count_upper[i].map_or(Value::Text("none".into()), Value::Num))
                        .with("probability", probs[i])
                })
                .collect())
        }
        Command::Nsit(args) => {
            let cfg = resolve_cfg(&args.state, config)?;
            let shots = resolve_shots(args.shots, config)?;
            let seed = resolve_seed(args.seed, config.seed)?;
            let runs = MzRuns::collect(&cfg, shots, seed)?;
            let (gap, sigma) = experiment::empirical_nsit_from_runs(&runs);
            let pi = experiment::outcome_probabilities(&cfg, RunKind::Interference)?;
            let ps = experiment::outcome_probabilities(&cfg, RunKind::Sequential)?;
            let pre = interferometer::input_state(&cfg)?;
            let m3 = interferometer::effective_output_observable(&cfg)?;
            let (r2, r3) = quasiprob::nsit_check(&pre, &interferometer::path_observable(), &m3)?;
            Ok(vec![state_record(&cfg)
                .with("shots", shots)
                .with("seed", seed)
                .with("rng", experiment::RNG_ALGORITHM)
                .with("gap_estimate", gap)
                .with("gap_stderr", sigma)
                .with("gap_exact", pi[0] - (ps[1] + ps[3]))
                .with("quasi_nsit_residual", r2.max(r3))])
        }
    }
}

fn sweep(n: usize, min: f64, max: f64, full: bool) -> Result<Vec<OutputRecord>, CliError> {
    if n < 2 {
        return Err(CliError::Usage(format!("--grid must be at least 2, got {n}")));
    }
    if !(min.is_finite() && max.is_finite() && min < max) {
        return Err(CliError::Usage(format!("need finite --min < --max, got [{min}, {max}]")));
    }
    if min < -1.0 || max > 1.0 {
        return Err(CliError::Usage(format!("grid [{min}, {max}] must lie within [-1, 1]")));
    }
    let rows = lgi::sweep_beta(&lgi::linspace(min, max, n))?;
    Ok(rows
        .iter()
        .map(|r| {
            let mut rec = OutputRecord::new().with("beta", r.beta);
            if full {
                rec = rec.with("alpha", r.alpha);
            }
            rec = rec
                .with("K31", r.k[0])
                .with("K32", r.k[1])
                .with("K33", r.k[2])
                .with("K34", r.k[3]);
            if full {
                rec = rec
                    .with("w3", optional(r.w3))
                    .with("w4", optional(r.w4))
                    .with("p3", r.p3)
                    .with("p4", r.p4);
            }
            rec.with("violated", violated_label(r.violated))
        })
        .collect())
}

/// Runs a parsed command line, writing to `--output` or `stdout`.
pub fn execute<W: Write>(cli: &Cli, stdout: W) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let recs = records(&cli.command, &config)?;
    let format = cli.format.or(config.format).unwrap_or_default();
    match cli.output.as_ref().or(config.output.as_ref()) {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            record::write_records(&recs, format, &mut w)?;
            w.flush().map_err(|e| CliError::Io(e.to_string()))
        }
        None => record::write_records(&recs, format, stdout),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(Error::ZeroShots).exit_code(), 2);
        assert_eq!(CliError::Core(Error::Internal("x".into())).exit_code(), 1);
        assert_eq!(CliError::Internal("x".into()).exit_code(), 1);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
