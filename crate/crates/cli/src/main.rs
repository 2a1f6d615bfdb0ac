//! `uhlmann`: Uhlmann curvature, Bures metric and estimation bounds for
//! parameterized density matrices.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uhlmann_core::{FdOptions, Measure, Method};

use crate::commands::{Settings, Status};
use crate::config::{config_error, ConfigError};
use crate::output::Format;

#[derive(Parser)]
#[command(
    name = "uhlmann",
    version,
    about = "Uhlmann curvature and multiparameter estimation bounds"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// `builtin:NAME` or path to a TOML model file
    #[arg(long, global = true)]
    model: Option<String>,
    /// Single point, e.g. `a=0,b=0.6931`
    #[arg(long, global = true)]
    at: Option<String>,
    /// Grid `name=lo:hi:count,...` (inclusive); for `action`, `count` is the
    /// number of cells
    #[arg(long, global = true)]
    grid: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative eigenvalue threshold for the support of rho
    #[arg(long = "rank-tol", global = true)]
    rank_tol: Option<f64>,
    #[arg(long = "pcc-tol", global = true, default_value_t = 1e-9)]
    pcc_tol: f64,
    /// Central-difference step for the dual-contraction and connection routes
    #[arg(long = "fd-step", global = true, default_value_t = 1e-4)]
    fd_step: f64,
    /// Richardson-extrapolate finite differences (steps h and h/2)
    #[arg(long, global = true)]
    richardson: bool,
    /// spectral | dual-contraction | connection
    #[arg(long, global = true, default_value = "spectral")]
    method: Method,
    /// riemannian | lebesgue (curvature action only)
    #[arg(long, global = true, default_value = "riemannian")]
    measure: Measure,
    /// Worker threads for grid evaluation
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Scalar curvature at a point or over a grid
    Curvature,
    /// Full geometry report at one point
    Report,
    /// Precision tradeoff boundary v2_min(v1) at one point
    Tradeoff {
        /// Number of repetitions
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// `lo:hi:count` values of v1 (inclusive)
        #[arg(long)]
        v1: String,
    },
    /// Cross-check curvature routes and estimation identities
    Verify,
    /// Integral of the curvature over a box (`--grid` gives cells per axis)
    Action,
    /// Parse expressions (or a model file given by --model) and report errors
    ParseCheck {
        expressions: Vec<String>,
        /// Declared parameter names
        #[arg(long, value_delimiter = ',')]
        params: Vec<String>,
    },
}

fn settings(g: GlobalArgs, load_model: bool) -> Result<Settings, ConfigError> {
    for (name, v) in [("--pcc-tol", g.pcc_tol), ("--fd-step", g.fd_step)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(config_error(format!("{name} must be positive")));
        }
    }
    if let Some(t) = g.rank_tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(config_error("--rank-tol must lie in (0, 1)"));
        }
    }
    if let Some(jobs) = g.jobs {
        if jobs == 0 {
            return Err(config_error("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| config_error(e.to_string()))?;
    }
    let model = match (&g.model, load_model) {
        (Some(src), true) => {
            let mut m = config::load(src)?;
            if let Some(t) = g.rank_tol {
                m.rank_tol = t;
            }
            Some(m)
        }
        _ => None,
    };
    Ok(Settings {
        model,
        at: g.at,
        grid: g.grid,
        format: g.format,
        out: g.out,
        pcc_tol: g.pcc_tol,
        fd: FdOptions {
            step: g.fd_step,
            richardson: g.richardson,
        },
        method: g.method,
        measure: g.measure,
    })
}

fn run(cli: Cli) -> Result<Status, ConfigError> {
    match cli.command {
        Command::ParseCheck {
            expressions,
            params,
        } => {
            let model_source = cli.global.model.clone();
            let s = settings(cli.global, false)?;
            commands::parse_check(&s, model_source.as_deref(), &expressions, &params)
        }
        Command::Curvature => commands::curvature(&settings(cli.global, true)?),
        Command::Report => commands::report(&settings(cli.global, true)?),
        Command::Tradeoff { n, v1 } => commands::tradeoff(&settings(cli.global, true)?, n, &v1),
        Command::Verify => commands::verify(&settings(cli.global, true)?),
        Command::Action => commands::action(&settings(cli.global, true)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("UHLMANN_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::PointFailures) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
