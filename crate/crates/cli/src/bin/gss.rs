use std::path::PathBuf;

use clap::Parser;

/// Ground-state search: `gss input.yml`.
#[derive(Parser)]
#[command(version)]
struct Args {
    config: PathBuf,
    /// Audit the tree after every sweep step.
    #[arg(long)]
    verify: bool,
    #[arg(short, long)]
    verbose: bool,
}

fn main() -> anyhow::Result<()> {
    let a = Args::parse();
    ttnet_cli::init_logging(a.verbose);
    ttnet_cli::gss(&a.config, a.verify)
}
