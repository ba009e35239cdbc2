use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hypmcf::commands::{self, Log};
use hypmcf::config::read_config;

#[derive(Parser)]
#[command(name = "hypmcf", version, about = "Hyperbolic mean curvature flow of surfaces")]
struct Cli {
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one evolution and write snapshots, report.csv and metadata.txt.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides output_dir from the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Refinement study against the exact sphere solution.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Maximum relative area discrepancy between two runs.
    Compare {
        /// Run directory or report.csv.
        first: PathBuf,
        second: PathBuf,
        /// Also write the result to DIR/compare.txt.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> hypmcf::Result<()> {
    let log = Log { quiet: cli.quiet };
    match cli.command {
        Command::Evolve { config, output } => {
            let cfg = read_config(&config)?;
            let out = output.unwrap_or_else(|| cfg.output_dir.clone());
            commands::evolve(&cfg, &out, log)?;
        }
        Command::Converge { config, output } => {
            let cfg = read_config(&config)?;
            let out = output.unwrap_or_else(|| cfg.output_dir.clone());
            commands::converge(&cfg, &out, log)?;
        }
        Command::Compare { first, second, output } => {
            let cmp = commands::compare(&first, &second, log)?;
            let text = format!(
                "max_relative_area_discrepancy={:.6e}\nt_start={:.12e}\nt_end={:.12e}\nsamples={}\nwarnings={}\n",
                cmp.max_relative_discrepancy,
                cmp.t_start,
                cmp.t_end,
                cmp.samples,
                cmp.warnings.join("; ")
            );
            print!("{text}");
            if let Some(dir) = output {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("compare.txt"), text)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
