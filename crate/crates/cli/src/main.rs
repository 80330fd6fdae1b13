//! `lts`: runs declarative scenario files and writes one CSV per scenario.

mod catalog;
mod config;
mod error;
mod kinds;
mod output;
mod runner;
mod seed;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::error::CliError;
use crate::runner::Options;

#[derive(Parser)]
#[command(name = "lts", version, about = "Local time scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenarios of a config file, or the builtin golden set.
    Run(RunArgs),
    /// Print the scenario kinds with their parameters.
    List {
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML).
    config: Option<PathBuf>,
    /// Run only golden scenarios: those of CONFIG, or the builtin set.
    #[arg(long)]
    all_golden: bool,
    /// Directory for CSV and metadata files.
    #[arg(long, env = "LTS_OUT_DIR", default_value = "lts-out")]
    out_dir: PathBuf,
    /// Seed for every scenario, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
}

fn run(args: RunArgs) -> Result<i32, CliError> {
    let config = match (&args.config, args.all_golden) {
        (Some(path), _) => Config::from_path(path)?,
        (None, true) => runner::builtin_golden()?,
        (None, false) => {
            return Err(CliError::Parse(
                "`run` needs a config file or --all-golden".into(),
            ))
        }
    };
    let opts = Options {
        out_dir: args.out_dir,
        seed: args.seed,
        golden_only: args.all_golden,
    };
    if opts.golden_only && !config.scenarios.iter().any(|s| s.is_golden()) {
        return Err(CliError::Validation("no scenario declares a check".into()));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        pool = pool.num_threads(n as usize);
    }
    let pool = pool.build().map_err(|e| CliError::Io(e.to_string()))?;
    let results = pool.install(|| runner::run_config(&config, &opts));
    Ok(runner::report(&results))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::List { json } => {
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&catalog::catalog_json())
                        .expect("catalog serializes")
                );
            } else {
                print!("{}", catalog::catalog_text());
            }
            0
        }
        Command::Run(args) => run(args).unwrap_or_else(|e| {
            eprintln!("error: {e}");
            e.exit_code()
        }),
    };
    ExitCode::from(code as u8)
}
