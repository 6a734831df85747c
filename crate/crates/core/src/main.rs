use anyhow::Context;
use clap::Parser;

use liegraph::cli::{init_threads, run, Cli};

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    init_threads()?;
    let artifact = run(&cli)?;
    match &cli.out {
        Some(path) => std::fs::write(path, &artifact.text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{}", artifact.text),
    }
    Ok(())
}
