use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wqed_cli::run::{run_command, sweep_command, validate_command, zeno_command};
use wqed_cli::{CliError, WORKERS_ENV};

/// Collective emission of giant emitters in a 1D waveguide.
#[derive(Parser)]
#[command(name = "wqed", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario configuration and write its artifacts.
    Run {
        config: PathBuf,
        /// Overrides `[outputs] directory`.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Compare closed-form kernels with adaptive quadrature.
    ValidateKernels {
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run one scenario per value of a parameter.
    Sweep {
        config: PathBuf,
        /// One of d, M, N, gamma0_over_omega0, cutoff_ratio.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Print Zeno times and Markovian rates for a configuration.
    Zeno { config: PathBuf },
}

fn parse_values(list: &str) -> Result<Vec<f64>, CliError> {
    list.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<f64>().map_err(|_| CliError::config(format!("cannot parse sweep value {v:?}"))))
        .collect()
}

fn configure_workers() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| CliError::config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(CliError::config(format!("{WORKERS_ENV} must be positive")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("cannot start worker pool: {e}")))?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    configure_workers()?;
    match cli.command {
        Command::Run { config, output_dir } => {
            let r = run_command(&config, output_dir.as_deref())?;
            for f in &r.summaries {
                println!(
                    "{}: plateau {:.6} Gamma0, peak {:.6} Gamma0 at omega0 t = {:.4}",
                    f.framework.as_str(),
                    f.plateau,
                    f.peak,
                    f.peak_time
                );
            }
            for n in &r.notes {
                eprintln!("note: {n}");
            }
            println!("wrote {} files (hash {})", r.files.len(), r.hash);
        }
        Command::ValidateKernels { samples, seed, report } => {
            let (text, verdict) = validate_command(samples, seed)?;
            print!("{text}");
            if let Some(path) = report {
                std::fs::write(&path, &text).map_err(|e| CliError::io(&path, e))?;
            }
            verdict?;
        }
        Command::Sweep { config, axis, values, output_dir } => {
            let values = parse_values(&values)?;
            let (summary, _) = sweep_command(&config, &axis, &values, output_dir.as_deref())?;
            print!("{}", std::fs::read_to_string(&summary).unwrap_or_default());
        }
        Command::Zeno { config } => print!("{}", zeno_command(&config)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
