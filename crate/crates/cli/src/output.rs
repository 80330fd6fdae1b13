//! CSV rows, tolerance checks and atomic file output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::Check;
use crate::error::{CliError, CliResult};

pub const HEADER: [&str; 6] = [
    "scenario",
    "quantity",
    "parameter",
    "value",
    "tolerance",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Info,
    Pass,
    Fail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Info => "info",
            Status::Pass => "pass",
            Status::Fail => "fail",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub quantity: String,
    pub parameter: String,
    pub value: f64,
    pub tolerance: Option<f64>,
    pub status: Status,
}

impl Row {
    pub fn new(quantity: impl Into<String>, parameter: impl ToString, value: f64) -> Self {
        Row {
            quantity: quantity.into(),
            parameter: parameter.to_string(),
            value,
            tolerance: None,
            status: Status::Info,
        }
    }

    pub fn scalar(quantity: impl Into<String>, value: f64) -> Self {
        Row::new(quantity, "", value)
    }

    pub fn flag(quantity: impl Into<String>, value: bool) -> Self {
        Row::scalar(quantity, if value { 1.0 } else { 0.0 })
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

/// Marks every row matched by a check; a check that matches nothing is an error.
pub fn apply_checks(rows: &mut [Row], checks: &[Check]) -> CliResult<()> {
    for c in checks {
        let mut hit = false;
        for row in rows.iter_mut().filter(|r| r.quantity == c.quantity) {
            if c.parameter.as_ref().is_some_and(|p| *p != row.parameter) {
                continue;
            }
            hit = true;
            let tol = if c.relative {
                c.tolerance * c.expected.abs()
            } else {
                c.tolerance
            };
            row.tolerance = Some(tol);
            let ok = c.passes(row.value) && row.status != Status::Fail;
            row.status = if ok { Status::Pass } else { Status::Fail };
        }
        if !hit {
            let at = c
                .parameter
                .as_ref()
                .map(|p| format!(" at `{p}`"))
                .unwrap_or_default();
            return Err(CliError::Validation(format!(
                "check refers to unknown quantity `{}`{at}",
                c.quantity
            )));
        }
    }
    Ok(())
}

pub fn render_csv(scenario: &str, rows: &[Row]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(HEADER).map_err(io)?;
    for r in rows {
        let tol = r.tolerance.map(format_value).unwrap_or_default();
        w.write_record([
            scenario,
            &r.quantity,
            &r.parameter,
            &format_value(r.value),
            &tol,
            r.status.as_str(),
        ])
        .map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp: PathBuf = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, bytes).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        io(e)
    })
}

/// Run metadata as TOML text: generator, seeds and the resolved parameters.
pub fn render_metadata(
    scenario: &str,
    kind: &str,
    seed: u64,
    stream_seed: u64,
    params: &toml::Table,
    rows: &[Row],
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario = {}", toml::Value::from(scenario));
    let _ = writeln!(out, "kind = {}", toml::Value::from(kind));
    let _ = writeln!(
        out,
        "version = {}",
        toml::Value::from(env!("CARGO_PKG_VERSION"))
    );
    let _ = writeln!(
        out,
        "generator = {}",
        toml::Value::from(crate::seed::GENERATOR)
    );
    let _ = writeln!(out, "seed = \"{seed}\"");
    let _ = writeln!(out, "stream_seed = \"{stream_seed}\"");
    let _ = writeln!(out, "rows = {}", rows.len());
    let checked = rows.iter().filter(|r| r.status != Status::Info).count();
    let _ = writeln!(out, "checked = {checked}");
    if !params.is_empty() {
        let mut wrapper = toml::Table::new();
        wrapper.insert("params".into(), toml::Value::Table(params.clone()));
        out.push('\n');
        out.push_str(&toml::to_string(&wrapper).unwrap_or_default());
    }
    out
}
