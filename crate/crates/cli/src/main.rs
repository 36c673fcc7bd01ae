use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aspir8::experiment::{ConfigError, ExperimentError, MANIFEST_FILE};
use aspir8::{build_experiment, run_experiment, ExperimentConfig};
use clap::{Parser, Subcommand};

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_OUTPUT: u8 = 1;

/// Blood flow in a vessel with an aspiration catheter.
#[derive(Parser)]
#[command(name = "aspir8", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write snapshot CSVs plus a manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Cells per segment.
        #[arg(long = "N", value_name = "INT")]
        n_cells: Option<usize>,
        /// End time in seconds. Snapshot times past it are dropped.
        #[arg(long = "t-end", value_name = "SECONDS")]
        t_end: Option<f64>,
        /// Output directory (defaults to `output_path` from the config).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Check a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(
    path: &Path,
    n_cells: Option<usize>,
    t_end: Option<f64>,
) -> Result<ExperimentConfig, ConfigError> {
    let mut config = ExperimentConfig::from_path(path)?;
    if let Some(n) = n_cells {
        config.n_cells = n;
    }
    if let Some(t) = t_end {
        config.t_end = t;
        let before = config.snapshot_times.len();
        config.snapshot_times.retain(|&s| s <= t);
        if config.snapshot_times.len() < before {
            log::warn!(
                "dropped {} snapshot time(s) after t_end = {t}",
                before - config.snapshot_times.len()
            );
        }
    }
    config.validate()?;
    // catches physical inconsistencies the field checks do not see
    build_experiment(&config)?;
    Ok(config)
}

fn simulate(
    path: PathBuf,
    n_cells: Option<usize>,
    t_end: Option<f64>,
    out: Option<PathBuf>,
) -> ExitCode {
    let config = match load(&path, n_cells, t_end) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let out_dir = out.unwrap_or_else(|| config.output_path.clone());
    log::info!(
        "running {:?} with N = {} to t = {} s into {}",
        config.experiment,
        config.n_cells,
        config.t_end,
        out_dir.display()
    );
    match run_experiment(&config, &out_dir) {
        Ok(summary) => {
            log::info!("{} steps, final time {}", summary.steps, summary.final_time);
            println!(
                "wrote {} snapshot(s) and {} to {}",
                summary.snapshots.len(),
                MANIFEST_FILE,
                out_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(ExperimentError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e @ ExperimentError::Solver(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_SOLVER)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_OUTPUT)
        }
    }
}

fn validate(path: PathBuf) -> ExitCode {
    match load(&path, None, None) {
        Ok(config) => {
            println!(
                "{}: {:?} experiment, N = {}, t_end = {} s, {} snapshot(s)",
                path.display(),
                config.experiment,
                config.n_cells,
                config.t_end,
                config.snapshot_times.len()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ASPIR8_LOG", "warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            config,
            n_cells,
            t_end,
            out,
        } => simulate(config, n_cells, t_end, out),
        Command::Validate { config } => validate(config),
    }
}
