use std::path::PathBuf;
use std::process::ExitCode;

use bergman_lab::config::hamiltonian_listing;
use bergman_lab::{run_experiment, CliError, ExperimentConfig, MANIFEST_FILE};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bergman-lab", version, about = "Partial Bergman density experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file
    Run { config: PathBuf },
    /// Check a config file without running it
    Validate { config: PathBuf },
    /// Print the registered Hamiltonians and their parameters
    ListHamiltonians,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => run(&config),
        Command::Validate { config } => ExperimentConfig::load(&config).map(|cfg| {
            println!("ok: {} experiment on {}", cfg.experiment.name(), cfg.model.name());
        }),
        Command::ListHamiltonians => {
            print!("{}", hamiltonian_listing());
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(path: &std::path::Path) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(path)?;
    let manifest = run_experiment(&cfg)?;
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    for f in &manifest.files {
        println!("wrote {}", cfg.output_dir.join(&f.name).display());
    }
    println!("wrote {}", cfg.output_dir.join(MANIFEST_FILE).display());
    Ok(())
}
