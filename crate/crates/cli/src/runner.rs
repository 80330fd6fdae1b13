use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{Config, Params, Scenario};
use crate::error::{CliError, CliResult};
use crate::output::{apply_checks, render_csv, render_metadata, write_atomic, Row, Status};
use crate::{kinds, seed};

pub struct Options {
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub golden_only: bool,
}

pub struct Outcome {
    pub kind: &'static str,
    pub rows: Vec<Row>,
    pub csv: PathBuf,
}

impl Outcome {
    pub fn checked(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.status != Status::Info)
            .count()
    }

    pub fn failed(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.status == Status::Fail)
            .count()
    }
}

/// Seed precedence: `--seed`, then the scenario's own, then the file's, then 0.
fn scenario_seed(opts: &Options, config: &Config, s: &Scenario) -> u64 {
    opts.seed.or(s.seed).or(config.seed).unwrap_or(0)
}

fn run_one(config: &Config, s: &Scenario, opts: &Options) -> CliResult<Outcome> {
    let seed = scenario_seed(opts, config, s);
    let mut rng = seed::stream(seed, &s.name);
    let params = Params::new(&s.params, &config.base_dir);
    let mut rows = kinds::run(s.kind, &params, &mut rng)?;
    apply_checks(&mut rows, &s.checks)?;
    let csv = opts.out_dir.join(&s.output);
    write_atomic(&csv, &render_csv(&s.name, &rows)?)?;
    if s.metadata {
        let meta = render_metadata(
            &s.name,
            s.kind.name(),
            seed,
            seed::stream_seed(seed, &s.name),
            &s.params,
            &rows,
        );
        write_atomic(&metadata_path(&csv), meta.as_bytes())?;
    }
    Ok(Outcome {
        kind: s.kind.name(),
        rows,
        csv,
    })
}

pub fn metadata_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.toml")
}

/// Runs every selected scenario concurrently; results keep config order.
pub fn run_config(config: &Config, opts: &Options) -> Vec<(String, CliResult<Outcome>)> {
    let selected: Vec<&Scenario> = config
        .scenarios
        .iter()
        .filter(|s| !opts.golden_only || s.is_golden())
        .collect();
    selected
        .par_iter()
        .map(|s| {
            (
                s.name.clone(),
                run_one(config, s, opts).map_err(|e| e.in_scenario(&s.name)),
            )
        })
        .collect()
}

/// Prints one line per scenario and returns the process exit code.
pub fn report(results: &[(String, CliResult<Outcome>)]) -> i32 {
    let mut code = 0;
    for (name, r) in results {
        match r {
            Ok(o) => {
                let verdict = match (o.checked(), o.failed()) {
                    (0, _) => "INFO",
                    (_, 0) => "PASS",
                    _ => "FAIL",
                };
                println!(
                    "{verdict}  {name} [{}]: {} rows, {}/{} checks passed -> {}",
                    o.kind,
                    o.rows.len(),
                    o.checked() - o.failed(),
                    o.checked(),
                    o.csv.display()
                );
                if o.failed() > 0 && code == 0 {
                    code = 1;
                }
            }
            Err(e) => {
                eprintln!("ERROR {e}");
                if code < 2 {
                    code = e.exit_code();
                }
            }
        }
    }
    code
}

pub fn builtin_golden() -> CliResult<Config> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    Config::parse(include_str!("../scenarios/golden.cfg"), dir)
        .map_err(|e| CliError::Parse(format!("builtin golden set: {e}")))
}
