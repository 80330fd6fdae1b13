//! Scenario files: TOML with a top-level `seed` and one `[[scenario]]` table
//! per run.
//!
//! ```toml
//! seed = 42
//!
//! [[scenario]]
//! name = "two-qubits"
//! kind = "appendix-a"
//! output = "two_qubits.csv"   # default: <name>.csv
//! metadata = true             # default: true
//!
//! [scenario.params]
//! omega1 = 1.0
//!
//! [[scenario.check]]
//! quantity = "abs_sq"
//! expected = 0.0292
//! tolerance = 5e-4
//! ```

use std::path::{Path, PathBuf};

use lts_core::{CMatrix, CVector, C64};
use toml::{Table, Value};

use crate::catalog::Kind;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct Config {
    pub seed: Option<u64>,
    pub scenarios: Vec<Scenario>,
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub kind: Kind,
    pub seed: Option<u64>,
    pub output: String,
    pub metadata: bool,
    pub params: Table,
    pub checks: Vec<Check>,
}

/// Declared tolerance on one output row.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub quantity: String,
    pub parameter: Option<String>,
    pub expected: f64,
    pub tolerance: f64,
    pub relative: bool,
}

impl Check {
    pub fn passes(&self, value: f64) -> bool {
        let scale = if self.relative {
            self.expected.abs()
        } else {
            1.0
        };
        (value - self.expected).abs() <= self.tolerance * scale
    }
}

fn parse_err(msg: impl Into<String>) -> CliError {
    CliError::Parse(msg.into())
}

fn seed_value(v: &Value, what: &str) -> CliResult<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        Value::String(s) => s
            .parse()
            .map_err(|_| parse_err(format!("{what}: `{s}` is not a 64-bit unsigned integer"))),
        _ => Err(parse_err(format!("{what}: expected a nonnegative integer"))),
    }
}

impl Config {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base).map_err(|e| match e {
            CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str, base_dir: PathBuf) -> CliResult<Self> {
        let root: Table = text
            .parse()
            .map_err(|e: toml::de::Error| parse_err(e.to_string().trim_end().to_string()))?;
        let mut seed = None;
        let mut scenarios = Vec::new();
        for (key, value) in &root {
            match key.as_str() {
                "seed" => seed = Some(seed_value(value, "seed")?),
                "scenario" => {
                    let list = value
                        .as_array()
                        .ok_or_else(|| parse_err("`scenario` must be an array of tables"))?;
                    for (k, entry) in list.iter().enumerate() {
                        let table = entry
                            .as_table()
                            .ok_or_else(|| parse_err(format!("scenario #{k} is not a table")))?;
                        scenarios.push(Scenario::parse(table, k)?);
                    }
                }
                other => return Err(parse_err(format!("unknown top-level key `{other}`"))),
            }
        }
        if scenarios.is_empty() {
            return Err(parse_err("no [[scenario]] tables found"));
        }
        for (k, s) in scenarios.iter().enumerate() {
            if scenarios[..k].iter().any(|o| o.name == s.name) {
                return Err(parse_err(format!("duplicate scenario name `{}`", s.name)));
            }
        }
        Ok(Config {
            seed,
            scenarios,
            base_dir,
        })
    }
}

impl Scenario {
    fn parse(t: &Table, index: usize) -> CliResult<Self> {
        let name = t
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| parse_err(format!("scenario #{index}: missing string key `name`")))?
            .to_string();
        if name.is_empty() || name.contains(['/', '\\']) {
            return Err(parse_err(format!(
                "scenario #{index}: invalid name `{name}`"
            )));
        }
        let at = |m: String| parse_err(format!("scenario `{name}`: {m}"));
        let kind_name = t
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| at("missing string key `kind`".into()))?;
        let kind = Kind::from_name(kind_name)
            .ok_or_else(|| at(format!("unknown kind `{kind_name}` (see `lts list`)")))?;
        let mut s = Scenario {
            output: format!("{name}.csv"),
            name: name.clone(),
            kind,
            seed: None,
            metadata: true,
            params: Table::new(),
            checks: Vec::new(),
        };
        for (key, value) in t {
            match key.as_str() {
                "name" | "kind" => {}
                "seed" => s.seed = Some(seed_value(value, "seed").map_err(|e| at(e.to_string()))?),
                "output" => {
                    s.output = value
                        .as_str()
                        .ok_or_else(|| at("`output` must be a string".into()))?
                        .to_string()
                }
                "metadata" => {
                    s.metadata = value
                        .as_bool()
                        .ok_or_else(|| at("`metadata` must be a boolean".into()))?
                }
                "params" => {
                    s.params = value
                        .as_table()
                        .ok_or_else(|| at("`params` must be a table".into()))?
                        .clone()
                }
                "check" => {
                    let list = value
                        .as_array()
                        .ok_or_else(|| at("`check` must be an array of tables".into()))?;
                    for c in list {
                        let c = c
                            .as_table()
                            .ok_or_else(|| at("`check` entries must be tables".into()))?;
                        s.checks.push(Check::parse(c).map_err(&at)?);
                    }
                }
                other => return Err(at(format!("unknown key `{other}`"))),
            }
        }
        Ok(s)
    }

    pub fn is_golden(&self) -> bool {
        !self.checks.is_empty()
    }
}

impl Check {
    fn parse(t: &Table) -> Result<Self, String> {
        let num = |k: &str| -> Result<Option<f64>, String> {
            match t.get(k) {
                None => Ok(None),
                Some(v) => as_f64(v)
                    .map(Some)
                    .ok_or(format!("check `{k}` must be a number")),
            }
        };
        let quantity = t
            .get("quantity")
            .and_then(Value::as_str)
            .ok_or("check needs a string `quantity`")?
            .to_string();
        let parameter = match t.get("parameter") {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(v) => Some(v.to_string()),
        };
        let expected = num("expected")?.ok_or("check needs `expected`")?;
        let tolerance = num("tolerance")?.ok_or("check needs `tolerance`")?;
        if !(tolerance >= 0.0) {
            return Err("check `tolerance` must be nonnegative".into());
        }
        let relative = match t.get("relative") {
            None => false,
            Some(v) => v.as_bool().ok_or("check `relative` must be a boolean")?,
        };
        for k in t.keys() {
            if !["quantity", "parameter", "expected", "tolerance", "relative"].contains(&k.as_str())
            {
                return Err(format!("unknown check key `{k}`"));
            }
        }
        Ok(Check {
            quantity,
            parameter,
            expected,
            tolerance,
            relative,
        })
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn as_complex(v: &Value) -> Option<C64> {
    match v {
        Value::Array(a) if a.len() == 2 => Some(C64::new(as_f64(&a[0])?, as_f64(&a[1])?)),
        other => as_f64(other).map(|x| C64::new(x, 0.0)),
    }
}

/// Typed access to a scenario's `[params]` table.
pub struct Params<'a> {
    table: &'a Table,
    base_dir: &'a Path,
}

fn invalid(key: &str, what: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("parameter `{key}`: {what}"))
}

impl<'a> Params<'a> {
    pub fn new(table: &'a Table, base_dir: &'a Path) -> Self {
        Params { table, base_dir }
    }

    pub fn has(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.table.keys().map(String::as_str)
    }

    fn require(&self, key: &str) -> CliResult<&'a Value> {
        self.table
            .get(key)
            .ok_or_else(|| invalid(key, "required but missing"))
    }

    pub fn f64(&self, key: &str) -> CliResult<f64> {
        as_f64(self.require(key)?).ok_or_else(|| invalid(key, "expected a number"))
    }

    pub fn opt_f64(&self, key: &str) -> CliResult<Option<f64>> {
        if self.has(key) {
            self.f64(key).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> CliResult<f64> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    pub fn usize(&self, key: &str) -> CliResult<usize> {
        match self.require(key)? {
            Value::Integer(i) if *i >= 0 => Ok(*i as usize),
            _ => Err(invalid(key, "expected a nonnegative integer")),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> CliResult<usize> {
        if self.has(key) {
            self.usize(key)
        } else {
            Ok(default)
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> CliResult<bool> {
        match self.table.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_bool()
                .ok_or_else(|| invalid(key, "expected a boolean")),
        }
    }

    fn array(&self, key: &str) -> CliResult<&'a Vec<Value>> {
        self.require(key)?
            .as_array()
            .ok_or_else(|| invalid(key, "expected an array"))
    }

    pub fn vec_f64(&self, key: &str) -> CliResult<Vec<f64>> {
        self.array(key)?
            .iter()
            .enumerate()
            .map(|(k, v)| {
                as_f64(v).ok_or_else(|| invalid(key, format!("entry {k} is not a number")))
            })
            .collect()
    }

    pub fn opt_vec_f64(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        if self.has(key) {
            self.vec_f64(key).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn vec_usize(&self, key: &str) -> CliResult<Vec<usize>> {
        self.array(key)?
            .iter()
            .map(|v| index_value(v).ok_or_else(|| invalid(key, "expected nonnegative integers")))
            .collect()
    }

    pub fn nested_f64(&self, key: &str) -> CliResult<Vec<Vec<f64>>> {
        self.array(key)?
            .iter()
            .map(|row| {
                row.as_array()
                    .and_then(|r| r.iter().map(as_f64).collect::<Option<Vec<_>>>())
                    .ok_or_else(|| invalid(key, "expected an array of number arrays"))
            })
            .collect()
    }

    pub fn nested_usize(&self, key: &str) -> CliResult<Vec<Vec<usize>>> {
        self.array(key)?
            .iter()
            .map(|v| usize_list(v).ok_or_else(|| invalid(key, "expected arrays of indices")))
            .collect()
    }

    /// A list of partitions, each a list of blocks.
    pub fn partitions(&self, key: &str) -> CliResult<Vec<Vec<Vec<usize>>>> {
        self.array(key)?
            .iter()
            .map(|p| {
                p.as_array()
                    .and_then(|blocks| blocks.iter().map(usize_list).collect::<Option<Vec<_>>>())
                    .ok_or_else(|| {
                        invalid(
                            key,
                            "expected a list of partitions, each a list of index arrays",
                        )
                    })
            })
            .collect()
    }

    /// Complex vector given inline; entries are numbers or `[re, im]` pairs.
    pub fn vector(&self, key: &str) -> CliResult<CVector> {
        let v: Vec<C64> = self
            .array(key)?
            .iter()
            .enumerate()
            .map(|(k, x)| {
                as_complex(x)
                    .ok_or_else(|| invalid(key, format!("entry {k} is not a number or [re, im]")))
            })
            .collect::<CliResult<_>>()?;
        Ok(CVector::from_vec(v))
    }

    /// Square matrix given inline as row-major rows or as a path to a CSV
    /// file; `<key>_imag` supplies an optional imaginary part the same way.
    pub fn matrix(&self, key: &str) -> CliResult<CMatrix> {
        let mut m = self.matrix_part(key)?;
        let imag_key = format!("{key}_imag");
        if self.has(&imag_key) {
            let im = self.matrix_part(&imag_key)?;
            if im.shape() != m.shape() {
                return Err(invalid(&imag_key, "shape differs from the real part"));
            }
            m += im * C64::i();
        }
        Ok(m)
    }

    pub fn matrix_from_value(&self, key: &str, v: &Value) -> CliResult<CMatrix> {
        let rows: Vec<Vec<C64>> = match v {
            Value::String(path) => {
                read_csv_matrix(&self.base_dir.join(path)).map_err(|e| match e {
                    CliError::Parse(m) => CliError::Parse(format!("parameter `{key}`: {m}")),
                    other => other,
                })?
            }
            Value::Array(rows) => rows
                .iter()
                .map(|r| {
                    r.as_array()
                        .and_then(|r| r.iter().map(as_complex).collect::<Option<Vec<_>>>())
                })
                .collect::<Option<_>>()
                .ok_or_else(|| invalid(key, "expected rows of numbers or [re, im] pairs"))?,
            _ => return Err(invalid(key, "expected inline rows or a CSV path")),
        };
        square(key, rows)
    }

    fn matrix_part(&self, key: &str) -> CliResult<CMatrix> {
        self.matrix_from_value(key, self.require(key)?)
    }

    pub fn matrices(&self, key: &str) -> CliResult<Vec<CMatrix>> {
        self.array(key)?
            .iter()
            .map(|v| self.matrix_from_value(key, v))
            .collect()
    }
}

fn index_value(v: &Value) -> Option<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Some(*i as usize),
        _ => None,
    }
}

fn usize_list(v: &Value) -> Option<Vec<usize>> {
    v.as_array()?.iter().map(index_value).collect()
}

fn square(key: &str, rows: Vec<Vec<C64>>) -> CliResult<CMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(invalid(key, "matrix is empty"));
    }
    if let Some((k, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(invalid(
            key,
            format!("row {k} has {} entries, expected {n}", r.len()),
        ));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Comma-separated real rows; blank lines and `#` comments are skipped.
pub fn read_csv_matrix(path: &Path) -> CliResult<Vec<Vec<C64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Validation(format!("cannot read matrix file {}: {e}", path.display()))
    })?;
    let mut rows = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .enumerate()
            .map(|(col, cell)| {
                cell.trim()
                    .parse::<f64>()
                    .map(|x| C64::new(x, 0.0))
                    .map_err(|_| {
                        parse_err(format!(
                            "{} line {}, column {}: `{}` is not a number",
                            path.display(),
                            line_no + 1,
                            col + 1,
                            cell.trim()
                        ))
                    })
            })
            .collect::<CliResult<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> CliResult<Config> {
        Config::parse(text, PathBuf::new())
    }

    #[test]
    fn minimal_config() {
        let c = parse("seed = 3\n[[scenario]]\nname = \"a\"\nkind = \"appendix-a\"\n").unwrap();
        assert_eq!(c.seed, Some(3));
        assert_eq!(c.scenarios[0].output, "a.csv");
        assert!(!c.scenarios[0].is_golden());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse("[[scenario]]\nname = \"a\nkind = 1\n").unwrap_err();
        assert!(
            matches!(e, CliError::Parse(ref m) if m.contains("line 2")),
            "{e}"
        );
    }

    #[test]
    fn structural_errors_are_parse_errors() {
        for text in [
            "[[scenario]]\nkind = \"overlap\"\n",
            "[[scenario]]\nname = \"a\"\nkind = \"nope\"\n",
            "[[scenario]]\nname = \"a\"\nkind = \"overlap\"\ncolour = 1\n",
            "[[scenario]]\nname = \"a\"\nkind = \"overlap\"\n[[scenario]]\nname = \"a\"\nkind = \"bounds\"\n",
            "seed = -1\n[[scenario]]\nname = \"a\"\nkind = \"overlap\"\n",
            "x = 1\n",
        ] {
            assert!(matches!(parse(text), Err(CliError::Parse(_))), "{text}");
        }
    }

    #[test]
    fn matrices_inline_and_complex() {
        let t: Table = "m = [[1, [0, 1]], [[0, -1], 2]]\nm_imag = [[0, 0], [0, 0.5]]"
            .parse()
            .unwrap();
        let p = Params::new(&t, Path::new("."));
        let m = p.matrix("m").unwrap();
        assert_eq!(m[(0, 1)], C64::new(0.0, 1.0));
        assert_eq!(m[(1, 1)], C64::new(2.0, 0.5));
        let bad: Table = "m = [[1, 2], [3]]".parse().unwrap();
        assert!(matches!(
            Params::new(&bad, Path::new(".")).matrix("m"),
            Err(CliError::Validation(_))
        ));
    }

    #[test]
    fn check_tolerances() {
        let c = Check {
            quantity: "q".into(),
            parameter: None,
            expected: 2.0,
            tolerance: 0.1,
            relative: true,
        };
        assert!(c.passes(2.19));
        assert!(!c.passes(2.21));
        assert!(!c.passes(f64::NAN));
    }
}
