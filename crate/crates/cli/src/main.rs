use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vibronic_cli::runner::{self, StudyKind};
use vibronic_cli::ExperimentConfig;

/// Spin-boson conical-intersection simulator: adiabatic ramps, Fourier-push
/// tomography, geometric-phase integrals, and noise studies.
#[derive(Parser)]
#[command(name = "sim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the adiabatic potential surfaces V+- on a grid.
    Surface(CommonArgs),
    /// Run the scheduled evolution and emit the final distribution.
    Evolve(CommonArgs),
    /// Forward-model the Fourier-push measurement and reconstruct.
    Tomo(CommonArgs),
    /// Evaluate the geometric-phase integrals along the configured path.
    Berry(CommonArgs),
    /// Parameter studies (adiabaticity, fidelity, trotter-convergence,
    /// ci-vs-nonci).
    Study {
        #[command(flatten)]
        common: CommonArgs,
        /// Which study to run.
        #[arg(long, value_enum)]
        kind: StudyKind,
    },
}

fn resolve(common: &CommonArgs) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output.directory = out.clone();
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Surface(c) => runner::run_surface(&resolve(c)?),
        Command::Evolve(c) => runner::run_evolve(&resolve(c)?),
        Command::Tomo(c) => runner::run_tomo(&resolve(c)?),
        Command::Berry(c) => runner::run_berry(&resolve(c)?),
        Command::Study { common, kind } => runner::run_study(&resolve(common)?, *kind),
    }
}

fn main() -> ExitCode {
    vibronic_cli::init_thread_pool();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(runner::exit_code_for(&err) as u8)
        }
    }
}
