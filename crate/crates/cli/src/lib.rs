//! Command-line front end: `cfinsler <subcommand> --config run.json`.
//!
//! Exit codes: 0 when every reported check passes, 2 when a check fails or a
//! numerical routine gives up, 1 on usage, configuration or I/O errors.

pub mod commands;
pub mod config;
pub mod report;
pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::RunConfig;
pub use report::Report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("input: {0}")]
    Input(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("numerical failure: {0}")]
    Numeric(#[from] cfinsler_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cfinsler", version, about = "Checks and solvers for conformally invariant Lagrangians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for CSV artifacts.
    #[arg(long, env = "CFINSLER_OUT", default_value = "cfinsler-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeylMode {
    Roundtrip,
    Hamiltonian,
    Residual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaraMode {
    Forward,
    Invert,
    Residual,
    Roundtrip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Theory {
    #[value(name = "1d")]
    OneD,
    Weyl,
    Cara,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Homogeneity, Euler identities, infinitesimal invariance, ellipticity.
    Check(Common),
    /// Metric bundle `(g, ω, a, b)` and its identities over the samples.
    Tensors(Common),
    /// Weyl Legendre correspondence.
    Weyl {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "roundtrip")]
        mode: WeylMode,
        /// `(y, p)` records for `--mode hamiltonian`; the samples are used otherwise.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Carathéodory momenta, Plücker coordinates and their inversion.
    Cara {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "roundtrip")]
        mode: CaraMode,
        #[arg(long, default_value_t = 0.0)]
        w: f64,
        /// `(y, A)` records for `--mode invert`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Dirichlet problem on the configured grid.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Boundary values as `x,y,u1..un`; the configured map is used otherwise.
        #[arg(long)]
        boundary: Option<PathBuf>,
        /// Initial field as `x,y,u1..un`; Coons interpolation otherwise.
        #[arg(long)]
        init: Option<PathBuf>,
    },
    /// Hopf differential and energy–momentum divergence.
    Conserve {
        #[command(flatten)]
        common: Common,
        /// Solve the Dirichlet problem first instead of sampling the map.
        #[arg(long)]
        solve: bool,
    },
    /// Hamilton–Jacobi residual and calibration of a candidate slope.
    Hj {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        theory: Theory,
        /// Overrides `hj.w` for the Carathéodory theory.
        #[arg(long)]
        w: Option<f64>,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Check(c) | Command::Tensors(c) => c,
            Command::Weyl { common, .. }
            | Command::Cara { common, .. }
            | Command::Solve { common, .. }
            | Command::Conserve { common, .. }
            | Command::Hj { common, .. } => common,
        }
    }
}

/// Everything a subcommand needs.
pub struct Context {
    pub config: RunConfig,
    pub out_dir: PathBuf,
}

impl Context {
    pub fn artifact(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

/// Runs a parsed subcommand and returns its report.
pub fn execute(cmd: &Command) -> Result<Report, CliError> {
    let common = cmd.common();
    let config = RunConfig::load(&common.config)?;
    std::fs::create_dir_all(&common.out)?;
    let ctx = Context { config, out_dir: common.out.clone() };
    match cmd {
        Command::Check(_) => commands::check::run(&ctx),
        Command::Tensors(_) => commands::tensors::run(&ctx),
        Command::Weyl { mode, input, .. } => commands::weyl::run(&ctx, *mode, input.as_deref()),
        Command::Cara { mode, w, input, .. } => commands::cara::run(&ctx, *mode, *w, input.as_deref()),
        Command::Solve { boundary, init, .. } => commands::solve::run(&ctx, boundary.as_deref(), init.as_deref()),
        Command::Conserve { solve, .. } => commands::conserve::run(&ctx, *solve),
        Command::Hj { theory, w, .. } => commands::hj::run(&ctx, *theory, *w),
    }
}

/// Parses `args` (including the program name), runs the subcommand and
/// writes the report to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            if code == 0 {
                let _ = write!(out, "{e}");
            } else {
                eprint!("{e}");
            }
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(report) => {
            if report.write_to(out).is_err() {
                return 1;
            }
            if report.all_passed() {
                0
            } else {
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            let _ = writeln!(out, "ERROR {e}");
            e.exit_code()
        }
    }
}
