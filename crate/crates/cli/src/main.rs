use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use ttnet_cli::bench::{self, Scale};

#[derive(Parser)]
#[command(version, about = "Tree tensor networks with automatic structure reconnection")]
struct Cli {
    /// Log progress at info level.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground-state search for a spin model.
    Gss {
        config: PathBuf,
        /// Audit the tree after every sweep step.
        #[arg(long)]
        verify: bool,
    },
    /// Factorize a dense tensor, or restructure a saved tree.
    Ft {
        config: PathBuf,
        #[arg(long)]
        verify: bool,
    },
    /// Write demonstration configs and tensors into a directory.
    Bench {
        dir: PathBuf,
        #[arg(long, value_enum, default_value_t = BenchScale::Desk)]
        scale: BenchScale,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchScale {
    Desk,
    Paper,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    ttnet_cli::init_logging(cli.verbose);
    match cli.command {
        Command::Gss { config, verify } => ttnet_cli::gss(&config, verify),
        Command::Ft { config, verify } => ttnet_cli::ft(&config, verify),
        Command::Bench { dir, scale, seed } => {
            let scale = match scale {
                BenchScale::Desk => Scale::Desk,
                BenchScale::Paper => Scale::Paper,
            };
            for cfg in bench::write_workspace(&dir, scale, seed)? {
                println!("{}", cfg.display());
            }
            Ok(())
        }
    }
}
