//! Command-line front end.
//!
//! Exit codes: 0 success, 1 domain or validation failure (including bad
//! arguments), 2 I/O failure, 3 selftest failure. Diagnostics go to stderr.
//!
//! `--povm-csv` reads a table with header `phi_hat,x11,x12,y12`, strictly
//! increasing `phi_hat`. Elements are linearly interpolated between rows,
//! `x22 = x11`, and the window is the first to the last `phi_hat`. The
//! table does not move with the state.

pub mod config;
pub mod output;
pub mod selftest;

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use clap::Parser;
use serde::Serialize;

use crate::bounds::{audit_derivation, bounds_sweep, SweepConfig};
use crate::error::Error;
use crate::measurement::{
    estimator_moments, gaussian_sharp_family, outcome_distribution, sample_outcomes_seeded, validate_povm,
    EstimationContext, PovmFamily, SampleSummary, TabulatedPovm,
};
use crate::metrics::metric_report;
use crate::quadrature::QuadSpec;
use crate::qubit::QubitState;

pub use config::{Cli, Command, Format, PovmKind, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_SELFTEST: i32 = 3;

#[derive(Debug)]
pub enum Failure {
    /// Bad input or a library error.
    Domain(String),
    Io(String),
    Selftest(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Domain(_) => EXIT_FAILURE,
            Failure::Io(_) => EXIT_IO,
            Failure::Selftest(_) => EXIT_SELFTEST,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Domain(m) | Failure::Io(m) | Failure::Selftest(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<config::ConfigError> for Failure {
    fn from(e: config::ConfigError) -> Self {
        match e {
            config::ConfigError::Io(..) => Failure::Io(e.to_string()),
            config::ConfigError::Invalid(m) => Failure::Domain(m),
        }
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
        }
    };
    let env_seed = std::env::var(config::SEED_ENV).ok();
    let result = config::resolve(cli, env_seed)
        .map_err(Failure::from)
        .and_then(|cfg| dispatch(&cfg));
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("qbound: {f}");
            f.exit_code()
        }
    }
}

/// Runs one resolved configuration.
pub fn dispatch(cfg: &RunConfig) -> Result<(), Failure> {
    match cfg.command {
        Command::Metrics => {
            let state = QubitState::new(cfg.r, cfg.theta, cfg.phi)?;
            emit(cfg, &metric_report(&state)?)
        }
        Command::Povm(_) => {
            let (ctx, spec) = context(cfg)?;
            let p = family(cfg, &ctx)?;
            let report = validate_povm(p.as_ref(), &ctx, &spec)?;
            emit(cfg, &report)?;
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Domain(format!("POVM '{}' failed validation", report.family)))
            }
        }
        Command::Bounds(_) => sweep(cfg),
        Command::Audit => {
            let (ctx, spec) = context(cfg)?;
            let p = family(cfg, &ctx)?;
            emit(cfg, &audit_derivation(&ctx, p.as_ref(), &spec)?)
        }
        Command::Simulate => simulate(cfg),
        Command::Selftest => {
            let checks = selftest::run_checks().map_err(|e| Failure::Selftest(e.to_string()))?;
            let mut text = String::new();
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                text.push_str(&format!(
                    "{tag} {} value={} tol={}\n",
                    c.name,
                    output::fmt_g12(c.value),
                    output::fmt_g12(c.tolerance)
                ));
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            text.push_str(&format!("{} checks, {failed} failed\n", checks.len()));
            write_out(cfg.out.as_deref(), &text)?;
            if failed > 0 {
                Err(Failure::Selftest(format!("{failed} selftest checks failed")))
            } else {
                Ok(())
            }
        }
    }
}

fn quad_spec(cfg: &RunConfig) -> Result<QuadSpec<f64>, Failure> {
    Ok(QuadSpec::new(cfg.panels, cfg.order)?)
}

fn context(cfg: &RunConfig) -> Result<(EstimationContext<f64>, QuadSpec<f64>), Failure> {
    let state = QubitState::new(cfg.r, cfg.theta, cfg.phi)?;
    Ok((EstimationContext::new(state, cfg.eps)?, quad_spec(cfg)?))
}

fn family(cfg: &RunConfig, ctx: &EstimationContext<f64>) -> Result<Box<dyn PovmFamily<f64>>, Failure> {
    match cfg.povm {
        PovmKind::GaussianSharp => Ok(Box::new(gaussian_sharp_family(cfg.sigma, ctx)?)),
        PovmKind::Tabulated => {
            let path = cfg
                .povm_csv
                .as_ref()
                .ok_or_else(|| Failure::Domain("missing --povm-csv".into()))?;
            let f = File::open(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            Ok(Box::new(TabulatedPovm::from_csv(f)?))
        }
    }
}

fn sweep(cfg: &RunConfig) -> Result<(), Failure> {
    if cfg.povm != PovmKind::GaussianSharp {
        return Err(Failure::Domain(
            "bounds sweep supports only the gaussian-sharp family".into(),
        ));
    }
    if cfg.steps == 0 {
        return Err(Failure::Domain("steps must be >= 1".into()));
    }
    let sc = SweepConfig {
        r_values: SweepConfig::grid(cfg.r_min, cfg.r_max, cfg.steps),
        theta: cfg.theta,
        phi: cfg.phi,
        eps: cfg.eps,
        sigma: cfg.sigma,
        spec: quad_spec(cfg)?,
    };
    let rows = bounds_sweep(&sc);
    let text = match cfg.format {
        Format::Csv => output::sweep_csv(&rows),
        Format::Json => output::json(&rows),
    }
    .map_err(Failure::Domain)?;
    write_out(cfg.out.as_deref(), &text)?;
    if let Some(svg) = &cfg.svg {
        write_out(Some(svg), &output::sweep_svg(&rows, cfg.log_y))?;
    }
    let failed: Vec<_> = rows.iter().filter_map(|r| r.error.as_ref().map(|e| (r.r, e))).collect();
    for (r, e) in &failed {
        eprintln!("qbound: row r={}: {e}", output::fmt_g12(*r));
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Domain(format!(
            "{} of {} sweep rows failed",
            failed.len(),
            rows.len()
        )))
    }
}

/// Empirical moments of a seeded sample against the quadrature values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub n: usize,
    pub seed: u64,
    pub phi: f64,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub quadrature_mean: f64,
    pub quadrature_variance: f64,
    /// `(mean − φ)/mean_se`
    pub mean_z: f64,
    /// `(variance − quadrature_variance)/variance_se`
    pub variance_z: f64,
}

pub fn simulation_report(cfg: &RunConfig) -> Result<SimulationReport, Failure> {
    let (ctx, spec) = context(cfg)?;
    let p = family(cfg, &ctx)?;
    let q = outcome_distribution(&ctx, p.as_ref(), &spec)?;
    let xs = sample_outcomes_seeded(&q, cfg.samples, cfg.seed)?;
    let s = SampleSummary::from_samples(&xs)?;
    let m = estimator_moments(&ctx, p.as_ref(), &spec)?;
    Ok(SimulationReport {
        n: s.n,
        seed: cfg.seed,
        phi: cfg.phi,
        mean: s.mean,
        mean_se: s.mean_se,
        variance: s.variance,
        variance_se: s.variance_se,
        quadrature_mean: m.mean,
        quadrature_variance: m.central_variance,
        mean_z: (s.mean - cfg.phi) / s.mean_se,
        variance_z: (s.variance - m.central_variance) / s.variance_se,
    })
}

fn simulate(cfg: &RunConfig) -> Result<(), Failure> {
    emit(cfg, &simulation_report(cfg)?)
}

fn emit<S: Serialize>(cfg: &RunConfig, report: &S) -> Result<(), Failure> {
    let text = match cfg.format {
        Format::Csv => output::key_value_csv(report),
        Format::Json => output::json(report),
    }
    .map_err(Failure::Domain)?;
    write_out(cfg.out.as_deref(), &text)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    let res = match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| format!("stdout: {e}"))
        }
    };
    res.map_err(Failure::Io)
}
