use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use superarray_cli::commands::{self, Axis, CompareArgs, DesignArgs, OptimizeArgs, SweepArgs};
use superarray_cli::{CliError, Result};

/// Steerable differential beamformer design for linear superarrays.
///
/// Angles are given in degrees, frequencies in Hz, lengths in meters.
#[derive(Parser)]
#[command(name = "superarray", version)]
struct Cli {
    /// Maximum worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long, short)]
    config: PathBuf,

    /// Relative Gram diagonal loading; overrides solver.regularization.
    #[arg(long)]
    regularization: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Design one filter and print DF, WNG and approximation error.
    Design {
        #[command(flatten)]
        common: Common,
        #[arg(long, short)]
        geometry: PathBuf,
        #[arg(long = "theta-s")]
        theta_s: f64,
        #[arg(long)]
        freq: f64,
        /// Filter JSON path (default: <output_dir>/filter.json).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write filters for the whole configured grid here.
        #[arg(long)]
        bank: Option<PathBuf>,
    },
    /// Sweep DF, WNG and approximation error over frequency or steering.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, short)]
        geometry: PathBuf,
        #[arg(long, value_enum)]
        axis: Axis,
        /// Steering direction for a frequency sweep.
        #[arg(long = "theta-s")]
        theta_s: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimize positions and directivities with the genetic algorithm.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Overrides ga.seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Continue from a checkpoint file.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Geometry file to place into generation 0 (repeatable).
        #[arg(long)]
        inject: Vec<PathBuf>,
        /// Built-in baseline to place into generation 0 (repeatable): lsa-ii, uniform-omni.
        #[arg(long)]
        baseline: Vec<String>,
        /// Checkpoint and stop after this many generations.
        #[arg(long)]
        stop_after: Option<usize>,
    },
    /// Compare overall error and band-mean DF/WNG of several geometries.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Geometry file (repeatable).
        #[arg(long, short)]
        geometry: Vec<PathBuf>,
        /// Built-in baseline (repeatable).
        #[arg(long)]
        baseline: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Design {
            common,
            geometry,
            theta_s,
            freq,
            out,
            bank,
        } => {
            let loaded = commands::load_config(&common.config, common.regularization)?;
            let line = commands::design(
                &loaded,
                &DesignArgs {
                    geometry,
                    theta_s_deg: theta_s,
                    frequency_hz: freq,
                    out,
                    bank,
                },
            )?;
            println!("{line}");
        }
        Command::Sweep {
            common,
            geometry,
            axis,
            theta_s,
            out,
        } => {
            let loaded = commands::load_config(&common.config, common.regularization)?;
            let path = commands::sweep(
                &loaded,
                &SweepArgs {
                    geometry,
                    axis,
                    theta_s_deg: theta_s,
                    out,
                },
            )?;
            println!("wrote {}", path.display());
        }
        Command::Optimize {
            common,
            seed,
            resume,
            inject,
            baseline,
            stop_after,
        } => {
            let loaded = commands::load_config(&common.config, common.regularization)?;
            let summary = commands::optimize(
                &loaded,
                &OptimizeArgs {
                    seed,
                    resume,
                    inject,
                    baseline,
                    stop_after,
                },
            )?;
            println!(
                "generations={} finished={} fitness={} best={}",
                summary.generations_done,
                summary.finished,
                superarray_cli::output::sig9(summary.fitness),
                summary.best.display()
            );
        }
        Command::Compare {
            common,
            geometry,
            baseline,
            out,
        } => {
            let loaded = commands::load_config(&common.config, common.regularization)?;
            let verdict = commands::compare_cmd(
                &loaded,
                &CompareArgs {
                    geometry,
                    baseline,
                    out,
                },
            )?;
            println!("{verdict}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
