use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rdlab", version, about = "Experiment runner for random dynamics statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        /// Path to a key = value config file.
        config: PathBuf,
        /// Output directory; defaults to the config's `out`, then runs/<command>.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 0 uses all cores. Data files do not depend on this.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Replace the config's master seed for this run.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// List the built-in measures, observables, and maps.
    ListPresets,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, out, workers, seed_override } => {
            match rdlab::run(&config, out, workers, seed_override) {
                Ok(code) => ExitCode::from(code as u8),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::ListPresets => {
            print!("{}", rdlab::list_presets());
            ExitCode::SUCCESS
        }
    }
}
