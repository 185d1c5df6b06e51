//! `hpds`: generate, reduce, simulate, and analyze tensor-based
//! homogeneous polynomial dynamical systems from the command line.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use hpds_cli::commands::{self, GenKind, OutputFormat};
use hpds_cli::CliResult;

#[derive(Parser)]
#[command(
    name = "hpds",
    version,
    about = "Tensor-based HPDS model reduction and system analysis",
    long_about = "Models are degree k-1 homogeneous polynomial systems x' = A x^{k-1} + B u, \
                  y = C x, stored as versioned JSON files. The reduce command projects a model \
                  onto its dominant mode subspace; the analysis commands run the stability, \
                  controllability, and observability rank tests on original or reduced models.\n\n\
                  The environment variable HPDS_REDUCE_THREADS caps internal parallelism \
                  (default: all cores)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a model file (built-in benchmarks or seeded random models).
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        /// State dimension (random kinds).
        #[arg(long)]
        n: Option<usize>,
        /// Tensor order; the vector field has degree k-1 (random kinds).
        #[arg(long)]
        k: Option<usize>,
        /// Number of nonzero coefficients (odeco kind).
        #[arg(long)]
        r: Option<usize>,
        /// Input dimension (almost-symmetric kind).
        #[arg(long, default_value_t = 0)]
        m: usize,
        /// Output dimension (almost-symmetric kind).
        #[arg(long, default_value_t = 0)]
        l: usize,
        /// RNG seed; required for random kinds and recorded in metadata.
        #[arg(long)]
        seed: Option<u64>,
        /// Optional model name recorded in metadata.
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reduce a model with the shared-factor compact HOSVD.
    Reduce {
        #[arg(long)]
        model: PathBuf,
        /// Relative singular-value cutoff (keep sigma > tol * sigma_max).
        #[arg(long)]
        tol: Option<f64>,
        /// Exact retained rank for the state modes.
        #[arg(long)]
        rank: Option<usize>,
        /// Where to write the reduced model (carries the projection V).
        #[arg(long)]
        out_model: PathBuf,
        /// Optional JSON reduction report.
        #[arg(long)]
        out_report: Option<PathBuf>,
    },
    /// Integrate a model with a fixed-step scheme and write the trajectory.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        /// Initial state, comma separated.
        #[arg(long)]
        x0: String,
        /// Control signal: zero | const:... | table:t:u;t:u (default zero).
        #[arg(long)]
        u: Option<String>,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long)]
        tmax: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, value_parser = parse_method, default_value = "rk4")]
        method: hpds::system::Integrator,
        /// Norm bound that stops integration as finite-time blow-up.
        #[arg(long, default_value_t = hpds::system::DEFAULT_DIVERGENCE_BOUND)]
        divergence_bound: f64,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Simulate a model and its reduction side by side and report errors.
    Compare {
        #[arg(long)]
        model: PathBuf,
        /// Reduced model file; must carry the projection basis.
        #[arg(long)]
        reduced: PathBuf,
        #[arg(long)]
        x0: String,
        #[arg(long)]
        tmax: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify stability of an odeco model at an initial state.
    Stability {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        x0: String,
        /// Relative off-diagonal core mass accepted as diagonal.
        #[arg(long, default_value_t = 1e-8)]
        odeco_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the strong-controllability rank test (even tensor order).
    Controllability {
        #[arg(long)]
        model: PathBuf,
        /// Levels beyond M_0 = B (default n-1).
        #[arg(long)]
        max_level: Option<usize>,
        #[arg(long, default_value_t = 1e-8)]
        rank_tol: f64,
        #[arg(long, default_value_t = 50_000)]
        column_cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the local weak observability rank test at a state.
    Observability {
        #[arg(long)]
        model: PathBuf,
        /// Evaluation state, comma separated.
        #[arg(long)]
        x: String,
        #[arg(long)]
        max_level: Option<usize>,
        #[arg(long, default_value_t = 1e-8)]
        rank_tol: f64,
        /// Entry budget for the Kronecker intermediates.
        #[arg(long, default_value_t = 100_000_000)]
        size_cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a model file.
    Info {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_method(s: &str) -> Result<hpds::system::Integrator, String> {
    match s {
        "rk4" => Ok(hpds::system::Integrator::Rk4),
        "euler" => Ok(hpds::system::Integrator::Euler),
        other => Err(format!("unknown method {other:?} (expected rk4 | euler)")),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Gen { kind, n, k, r, m, l, seed, name, out } => {
            commands::cmd_gen(kind, n, k, r, m, l, seed, name, &out)
        }
        Command::Reduce { model, tol, rank, out_model, out_report } => {
            commands::cmd_reduce(&model, tol, rank, &out_model, out_report.as_deref())
        }
        Command::Simulate {
            model,
            x0,
            u,
            t0,
            tmax,
            dt,
            method,
            divergence_bound,
            out,
            format,
        } => commands::cmd_simulate(
            &model,
            &x0,
            u.as_deref(),
            t0,
            tmax,
            dt,
            method,
            divergence_bound,
            out.as_deref(),
            format,
        ),
        Command::Compare { model, reduced, x0, tmax, dt, out } => {
            commands::cmd_compare(&model, &reduced, &x0, tmax, dt, out.as_deref())
        }
        Command::Stability { model, x0, odeco_tol, out } => {
            commands::cmd_stability(&model, &x0, odeco_tol, out.as_deref())
        }
        Command::Controllability { model, max_level, rank_tol, column_cap, out } => {
            commands::cmd_controllability(&model, max_level, rank_tol, column_cap, out.as_deref())
        }
        Command::Observability { model, x, max_level, rank_tol, size_cap, out } => {
            commands::cmd_observability(&model, &x, max_level, rank_tol, size_cap, out.as_deref())
        }
        Command::Info { model, format, out } => commands::cmd_info(&model, format, out.as_deref()),
    }
}

fn main() {
    env_logger::init();
    if let Ok(threads) = std::env::var("HPDS_REDUCE_THREADS") {
        match threads.trim().parse::<usize>() {
            Ok(t) if t > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => eprintln!("warning: ignoring invalid HPDS_REDUCE_THREADS={threads:?}"),
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
