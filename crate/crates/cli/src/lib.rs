//! Command-line front end: argument definitions, run-config merging and the
//! five subcommands. The `ddehopf` binary is a thin wrapper around [`run`].

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Ok = 0,
    VerifyFailed = 1,
    NonConvergence = 2,
    Degenerate = 3,
    BlowUp = 4,
    Usage = 64,
}

impl Exit {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    pub fn new(exit: Exit, message: impl Into<String>) -> CliError {
        CliError { exit, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> CliError {
        CliError::new(Exit::Usage, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(format!("i/o error: {e}"))
    }
}

fn parse_list(s: &str, min: usize, max: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() < min || v.len() > max {
        return Err(if min == max {
            format!("expected {min} comma-separated numbers")
        } else {
            format!("expected {min} to {max} comma-separated numbers")
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err("numbers must be finite".into());
    }
    Ok(v)
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let v = parse_list(s, 2, 2)?;
    Ok([v[0], v[1]])
}

/// `LO,HI` or `LO,HI,STEP`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LamRange {
    pub lo: f64,
    pub hi: f64,
    pub step: Option<f64>,
}

fn parse_lam_range(s: &str) -> Result<LamRange, String> {
    let v = parse_list(s, 2, 3)?;
    if !(v[0] < v[1]) {
        return Err("range must be increasing".into());
    }
    let step = v.get(2).copied();
    if step.is_some_and(|h| !(h > 0.0)) {
        return Err("step must be positive".into());
    }
    Ok(LamRange { lo: v[0], hi: v[1], step })
}

#[derive(Debug, Parser)]
#[command(name = "ddehopf", version, about = "Degenerate Hopf bifurcations in scalar delay equations")]
pub struct Cli {
    /// Run-config file (TOML); flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Built-in model name (sis-inverse, sis-exp) or path to a model file.
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Override the model's delay.
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Output file (default: stdout).
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Sweep worker threads (default: logical cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Omit the timestamped comment line from CSV output.
    #[arg(long, global = true)]
    pub no_header: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Locate and classify the degenerate Hopf point near a guess.
    Analyze {
        /// Starting guess LAM,MU.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        guess: Option<[f64; 2]>,
    },
    /// Tabulate the Hopf curve (alpha, beta) against omega.
    HopfCurve {
        /// Open omega interval LO,HI (default: 0,pi/tau).
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        omega_range: Option<[f64; 2]>,
        /// Number of interior grid points (default 100).
        #[arg(long)]
        points: Option<usize>,
    },
    /// Simulate along a lam grid at fixed mu and classify each attractor.
    Sweep {
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<f64>,
        /// LO,HI[,STEP]; without STEP the range is split into 40 points.
        #[arg(long, value_parser = parse_lam_range, allow_hyphen_values = true)]
        lam_range: Option<LamRange>,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Integrate one parameter point and write the recorded trajectory.
    Simulate {
        #[arg(long, allow_hyphen_values = true)]
        lam: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<f64>,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Run the numerical cross-checks.
    Verify {
        /// Use this tolerance for every check instead of the per-check defaults.
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimArgs {
    /// Integration step; must divide tau (default tau/200).
    #[arg(long)]
    pub step: Option<f64>,
    /// Time discarded before recording (default 2000).
    #[arg(long)]
    pub transient: Option<f64>,
    /// Length of the recorded window (default 500).
    #[arg(long)]
    pub record: Option<f64>,
    /// Offset of the constant history from the equilibrium (default 1e-3).
    #[arg(long, allow_hyphen_values = true)]
    pub perturbation: Option<f64>,
}

/// Execute a parsed command line, writing reports to stdout/stderr.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => {
            let src = std::fs::read_to_string(p)
                .map_err(|e| CliError::usage(format!("cannot read {}: {e}", p.display())))?;
            config::RunConfig::from_toml(&src).map_err(|e| CliError::usage(e.to_string()))?
        }
        None => config::RunConfig::default(),
    };
    let ctx = commands::Context::merge(cli, cfg)?;
    match &cli.command {
        Command::Analyze { guess } => commands::analyze(&ctx, *guess),
        Command::HopfCurve { omega_range, points } => commands::hopf_curve(&ctx, *omega_range, *points),
        Command::Sweep { mu, lam_range, sim } => commands::sweep(&ctx, *mu, *lam_range, sim),
        Command::Simulate { lam, mu, sim } => commands::simulate(&ctx, *lam, *mu, sim),
        Command::Verify { tolerance } => commands::verify(&ctx, *tolerance),
    }
}
