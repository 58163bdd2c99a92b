use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use solitonq::config::Kind;
use solitonq::{run, RunOptions};

/// Run a vector-soliton experiment from a TOML config.
#[derive(Debug, Parser)]
#[command(name = "solitonq", version)]
struct Args {
    /// bethe-eval | eigencheck | sample | q-table | protocol | epr | classical | full-pipeline
    kind: Kind,
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: the config's `out`, else ./solitonq-out).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let opts = RunOptions { kind: args.kind, config: args.config, seed: args.seed, out: args.out };
    match run(&opts) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
