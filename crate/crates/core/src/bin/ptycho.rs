use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ptycho::io::{cmd_compare, cmd_reconstruct, cmd_simulate, RunConfig};

#[derive(Parser)]
#[command(name = "ptycho", version, about = "Synthetic blind ptychography experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a phantom, the true probe, amplitudes and the scan geometry.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the phantom and probe seeds.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Reconstruct a simulated dataset and write the convergence trace.
    Reconstruct {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the perturbation and initial-phase seeds.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check whether run A reaches the NRMSE threshold in at most half of
    /// run B's iterations (exit status 0 if so, 1 otherwise).
    Compare {
        csv_a: PathBuf,
        csv_b: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        threshold: f64,
    },
}

fn run(cli: Cli) -> ptycho::Result<bool> {
    match cli.command {
        Command::Simulate { config, out, seed } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.phantom.texture_seed = s;
                cfg.probe.seed = s;
            }
            let out = out.unwrap_or_else(|| cfg.output_dir.clone());
            println!("{}", cmd_simulate(&cfg, &out)?);
            Ok(true)
        }
        Command::Reconstruct {
            config,
            dataset,
            out,
            seed,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.perturbation.seed = s;
                cfg.solver.init_seed = s;
            }
            let out = out.unwrap_or_else(|| cfg.output_dir.clone());
            println!("{}", cmd_reconstruct(&cfg, &dataset, &out)?);
            Ok(true)
        }
        Command::Compare {
            csv_a,
            csv_b,
            threshold,
        } => {
            let report = cmd_compare(&csv_a, &csv_b, threshold)?;
            println!("{report}");
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
