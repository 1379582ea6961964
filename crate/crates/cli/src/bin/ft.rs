use std::path::PathBuf;

use clap::Parser;

/// Tensor factorization or tree reconstruction: `ft input.yml`.
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
    ttnet_cli::ft(&a.config, a.verify)
}
