use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use disfom_bench::output::{write_race, write_sweep, write_timings};
use disfom_bench::plot::emit_plot_data;
use disfom_bench::{run_dimension_sweep, run_timing_race, BenchError, ExperimentConfig, Family};

#[derive(Parser)]
#[command(name = "disfom-bench", version, about = "Dimension sweeps and subproblem timing races")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment file; omitted sections take the published defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Overrides the base seed of the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every method on every (dimension, replication) instance.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Worker threads for the independent runs.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Time the bisection solvers against ADMM (single-threaded).
    Race {
        #[command(flatten)]
        common: Common,
    },
    /// Write per-panel plot tables from the outputs found in a directory.
    Plotdata {
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Parse and validate a config without running anything.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: Option<&Path>, seed: Option<u64>) -> Result<ExperimentConfig, BenchError> {
    let mut cfg = match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Sweep { common, workers } => {
            let cfg = load(common.config.as_deref(), common.seed)?;
            let result = run_dimension_sweep(&cfg.sweep, cfg.seed, workers)?;
            report(&write_sweep(&common.out, &cfg, &result)?);
            report(&[write_timings(&common.out, &result)?]);
            for f in &result.failures {
                eprintln!("run failed: {} d={} replication={}: {}", f.method, f.d, f.replication, f.message);
            }
            if !result.failures.is_empty() {
                return Err(BenchError::Partial { failed: result.failures.len(), total: result.total_runs() });
            }
            Ok(())
        }
        Command::Race { common } => {
            let cfg = load(common.config.as_deref(), common.seed)?;
            let result = run_timing_race(&cfg.race, cfg.seed, &[Family::Box, Family::L1Box])?;
            report(&write_race(&common.out, &cfg, &result)?);
            Ok(())
        }
        Command::Plotdata { out } => {
            report(&emit_plot_data(&out)?);
            Ok(())
        }
        Command::ValidateConfig { config } => {
            let cfg = load(Some(&config), None)?;
            println!(
                "ok: {} methods, dims {:?}, {} replications; race dims {:?}",
                cfg.sweep.methods.len(),
                cfg.sweep.dims,
                cfg.sweep.replications,
                cfg.race.dims
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
