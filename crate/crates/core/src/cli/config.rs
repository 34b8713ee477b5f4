//! Flag parsing and the resolved run configuration.
//!
//! Every option can also be given in a key=value file passed with
//! `--config`. Keys match the long flag names (`r-min` or `r_min`), `#`
//! starts a comment, and unknown keys are rejected. A flag always beats the
//! file. The seed falls back to `QBOUND_SEED` when neither sets it. Angles
//! are radians.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const SEED_ENV: &str = "QBOUND_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "qbound",
    version,
    about = "Phase-space metric and estimation bounds for one qubit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// All metrics at one state point.
    Metrics,
    /// POVM family checks.
    #[command(subcommand)]
    Povm(PovmCommand),
    /// Bound comparisons.
    #[command(subcommand)]
    Bounds(BoundsCommand),
    /// Step-by-step check of the bound derivation (JSON by default).
    Audit,
    /// Monte Carlo estimate of the estimator mean and variance.
    Simulate,
    /// Built-in reference and invariant checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum PovmCommand {
    /// Completeness, positivity and unbiasedness of a family.
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum BoundsCommand {
    /// Bounds along a grid of radii.
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PovmKind {
    GaussianSharp,
    Tabulated,
}

#[derive(Debug, Default, Args)]
pub struct Options {
    /// key=value file with defaults for any option below.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub r: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// Bias offset of the window centre.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    /// Gaussian profile width.
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    #[arg(long, global = true)]
    pub r_min: Option<f64>,
    #[arg(long, global = true)]
    pub r_max: Option<f64>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub panels: Option<usize>,
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Also write the sweep chart here.
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
    #[arg(long, global = true)]
    pub log_y: bool,
    #[arg(long, global = true, value_enum)]
    pub povm: Option<PovmKind>,
    /// Table with columns phi_hat,x11,x12,y12; implies `--povm tabulated`.
    #[arg(long, global = true)]
    pub povm_csv: Option<PathBuf>,
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
    pub eps: f64,
    pub sigma: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub steps: usize,
    pub samples: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub panels: usize,
    pub order: usize,
    pub svg: Option<PathBuf>,
    pub log_y: bool,
    pub povm: PovmKind,
    pub povm_csv: Option<PathBuf>,
}

#[derive(Debug)]
pub enum ConfigError {
    Io(PathBuf, std::io::Error),
    Invalid(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            ConfigError::Invalid(m) => f.write_str(m),
        }
    }
}

const KEYS: [&str; 18] = [
    "r", "theta", "phi", "eps", "sigma", "r_min", "r_max", "steps", "samples", "seed", "out", "format", "panels",
    "order", "svg", "log_y", "povm", "povm_csv",
];

/// Parses key=value lines. Later duplicates win.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::Invalid(format!("config line {}: expected key=value", i + 1)))?;
        let key = k.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::Invalid(format!(
                "config line {}: unknown key '{}'",
                i + 1,
                k.trim()
            )));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
    parse_config_text(&text)
}

fn from_file<T: std::str::FromStr>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, ConfigError> {
    match file.get(key) {
        None => Ok(None),
        Some(s) => s
            .parse()
            .map(Some)
            .map_err(|_| ConfigError::Invalid(format!("config key '{key}': cannot parse '{s}'"))),
    }
}

fn from_file_enum<T: ValueEnum>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, ConfigError> {
    match file.get(key) {
        None => Ok(None),
        Some(s) => T::from_str(s, true)
            .map(Some)
            .map_err(|_| ConfigError::Invalid(format!("config key '{key}': unknown value '{s}'"))),
    }
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Merges flags, the optional config file, `QBOUND_SEED` and defaults.
/// `env_seed` is passed in so callers control the environment.
pub fn resolve(cli: Cli, env_seed: Option<String>) -> Result<RunConfig, ConfigError> {
    let o = cli.opts;
    let file = match &o.config {
        Some(p) => read_config(p)?,
        None => BTreeMap::new(),
    };
    let env_seed = match env_seed {
        Some(s) => Some(
            s.trim()
                .parse::<u64>()
                .map_err(|_| ConfigError::Invalid(format!("{SEED_ENV}: cannot parse '{s}'")))?,
        ),
        None => None,
    };
    let seed = o.seed.or(from_file(&file, "seed")?).or(env_seed).unwrap_or(0);
    let default_format = if cli.command == Command::Audit {
        Format::Json
    } else {
        Format::Csv
    };
    let povm_csv = o.povm_csv.or(from_file(&file, "povm_csv")?);
    let povm_default = if povm_csv.is_some() {
        PovmKind::Tabulated
    } else {
        PovmKind::GaussianSharp
    };
    let povm = pick(o.povm, from_file_enum(&file, "povm")?, povm_default);
    if povm == PovmKind::Tabulated && povm_csv.is_none() {
        return Err(ConfigError::Invalid("--povm tabulated needs --povm-csv".into()));
    }
    let cfg = RunConfig {
        command: cli.command,
        r: pick(o.r, from_file(&file, "r")?, 0.5),
        theta: pick(o.theta, from_file(&file, "theta")?, std::f64::consts::FRAC_PI_2),
        phi: pick(o.phi, from_file(&file, "phi")?, 3.0 * std::f64::consts::FRAC_PI_4),
        eps: pick(o.eps, from_file(&file, "eps")?, 0.0),
        sigma: pick(o.sigma, from_file(&file, "sigma")?, 3.0),
        r_min: pick(o.r_min, from_file(&file, "r_min")?, 0.1),
        r_max: pick(o.r_max, from_file(&file, "r_max")?, 0.9),
        steps: pick(o.steps, from_file(&file, "steps")?, 9),
        samples: pick(o.samples, from_file(&file, "samples")?, 100_000),
        seed,
        out: o.out.or(from_file(&file, "out")?),
        format: pick(o.format, from_file_enum(&file, "format")?, default_format),
        panels: pick(o.panels, from_file(&file, "panels")?, 64),
        order: pick(o.order, from_file(&file, "order")?, 16),
        svg: o.svg.or(from_file(&file, "svg")?),
        log_y: o.log_y || from_file(&file, "log_y")?.unwrap_or(false),
        povm,
        povm_csv,
    };
    for (name, v) in [
        ("r", cfg.r),
        ("theta", cfg.theta),
        ("phi", cfg.phi),
        ("eps", cfg.eps),
        ("sigma", cfg.sigma),
        ("r_min", cfg.r_min),
        ("r_max", cfg.r_max),
    ] {
        if !v.is_finite() {
            return Err(ConfigError::Invalid(format!("{name} must be finite, got {v}")));
        }
    }
    Ok(cfg)
}
