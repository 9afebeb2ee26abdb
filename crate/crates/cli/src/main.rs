//! `linsys-quanta`: normal forms, modes, stationary and coherent states of
//! linear systems, from a JSON model file.

mod commands;
mod error;
mod parse;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "linsys-quanta", version, about = "Quantum states of linear systems from classical modes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Options {
    /// Reduced Planck constant.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub hbar: f64,
    /// Integration step (default: fastest mode period / 200).
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Final time for `evolve` (default: one period of the slowest mode).
    #[arg(long, global = true)]
    pub tmax: Option<f64>,
    /// Grid points per axis (odd, at least 5).
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,
    /// Largest total excitation Σn_i (or truncation order for `coherent`).
    #[arg(long, global = true)]
    pub max_total: Option<usize>,
    /// Directory for output files; results go to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized defaults.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normal form of a general quadratic Hamiltonian.
    Reduce { model: PathBuf },
    /// Classical eigenmodes.
    Modes { model: PathBuf },
    /// Stationary ground-state shape K₀.
    Ground { model: PathBuf },
    /// Energies of stationary states up to --max-total (default 3).
    Spectrum { model: PathBuf },
    /// Stationary states on a grid, as CSV.
    States { model: PathBuf },
    /// Gaussian packet propagation, as CSV.
    Evolve {
        model: PathBuf,
        /// Initial shape K(0) = scale·K₀ (K₀ = I when there is no ground state).
        #[arg(long, default_value_t = 1.0)]
        shape_scale: f64,
        /// Initial center, comma separated.
        #[arg(long)]
        r0: Option<String>,
        /// Initial momentum, comma separated.
        #[arg(long)]
        p0: Option<String>,
    },
    /// Coherent state weights, center, phase and expansion coefficients.
    Coherent {
        model: PathBuf,
        /// Mode weights λ_i as `re:im` items, comma separated (default: random with |λ| ≤ 0.5).
        #[arg(long)]
        lambda: Option<String>,
        /// Evaluation time.
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        /// Initial phase φ₀.
        #[arg(long, default_value_t = 0.0)]
        phi0: f64,
    },
    /// Finite-difference residuals and Gram matrix of stationary states.
    Verify {
        model: PathBuf,
        /// Residual tolerance.
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
        /// Report format on stdout.
        #[arg(long, value_enum, default_value_t = commands::Format::Json)]
        format: commands::Format,
    },
    /// Multidimensional Hermite polynomial values.
    HermiteEval {
        /// Symmetric γ: rows separated by `;`, entries by `,`, complex entries as `re:im`.
        #[arg(long)]
        gamma: String,
        /// Multi-index, comma separated (default: all indices up to --max-total).
        #[arg(long)]
        index: Option<String>,
        /// Evaluation point, comma separated, complex entries as `re:im`.
        #[arg(long)]
        x: String,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let o = &cli.opts;
    match cli.command {
        Command::Reduce { model } => commands::reduce(&model, o),
        Command::Modes { model } => commands::modes(&model, o),
        Command::Ground { model } => commands::ground(&model, o),
        Command::Spectrum { model } => commands::spectrum(&model, o),
        Command::States { model } => commands::states(&model, o),
        Command::Evolve {
            model,
            shape_scale,
            r0,
            p0,
        } => commands::evolve(&model, o, shape_scale, r0.as_deref(), p0.as_deref()),
        Command::Coherent { model, lambda, t, phi0 } => commands::coherent(&model, o, lambda.as_deref(), t, phi0),
        Command::Verify {
            model,
            tolerance,
            format,
        } => commands::verify(&model, o, tolerance, format),
        Command::HermiteEval { gamma, index, x } => commands::hermite_eval(o, &gamma, index.as_deref(), &x),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LINSYS_QUANTA_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // usage errors count as input validation; exit 2 is reserved
            let err = CliError::argument("usage", e.to_string().trim_end());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
