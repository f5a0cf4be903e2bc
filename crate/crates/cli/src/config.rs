use std::fmt;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};

/// CLI failure, split by exit status.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Validation(_) => ExitCode::from(2),
            CliError::Numerical(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) | CliError::Numerical(msg) => f.write_str(msg),
        }
    }
}

impl From<bo3_core::Error> for CliError {
    fn from(err: bo3_core::Error) -> Self {
        if err.is_numerical() {
            CliError::Numerical(err.to_string())
        } else {
            CliError::Validation(err.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Parsed `--config` file: a flat JSON object keyed by parameter name.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read config {}: {e}", path.display())))?;
        match serde_json::from_str(&text) {
            Ok(Value::Object(values)) => Ok(Self { values }),
            Ok(_) => Err(CliError::validation(format!("config {}: expected a JSON object", path.display()))),
            Err(e) => Err(CliError::validation(format!("config {}: {e}", path.display()))),
        }
    }

    /// Overlays explicitly given flags on the file; flags win.
    pub fn resolve<T: Serialize + DeserializeOwned>(&self, command: &str, flags: &T) -> CliResult<T> {
        let mut merged = self.values.clone();
        match merged.remove("command") {
            None => {}
            Some(Value::String(c)) if c == command => {}
            Some(other) => {
                return Err(CliError::validation(format!(
                    "config: field `command` is {other}, but `{command}` was invoked"
                )))
            }
        }
        let given = serde_json::to_value(flags).map_err(|e| CliError::validation(e.to_string()))?;
        if let Value::Object(given) = given {
            merged.extend(given.into_iter().filter(|(_, v)| !v.is_null()));
        }
        serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::validation(format!("config: {e}")))
    }
}

/// Inline JSON values in a config file are accepted where a flag takes
/// "inline JSON or a path".
pub fn json_or_string<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    Ok(match Option::<Value>::deserialize(d)? {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s),
        Some(other) => Some(other.to_string()),
    })
}

pub fn require<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::validation(format!("missing required parameter --{flag}")))
}

/// Parses `source` as inline JSON when it looks like JSON, else as a file path.
pub fn read_json<T: DeserializeOwned>(source: &str, what: &str) -> CliResult<T> {
    let trimmed = source.trim_start();
    let (text, origin) = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        (source.to_owned(), format!("inline {what}"))
    } else {
        let text = fs::read_to_string(source)
            .map_err(|e| CliError::validation(format!("cannot read {what} file {source}: {e}")))?;
        (text, format!("{what} file {source}"))
    };
    serde_json::from_str(&text).map_err(|e| CliError::validation(format!("{origin}: {e}")))
}

/// Sorted keys come from serializing through `Value` (a `BTreeMap`).
pub fn to_value<T: Serialize>(x: &T) -> CliResult<Value> {
    serde_json::to_value(x).map_err(|e| CliError::validation(e.to_string()))
}

/// Compact JSON to stdout, or pretty JSON to `out`.
pub fn emit_json(value: &Value, out: Option<&Path>) -> CliResult<()> {
    match out {
        None => {
            println!("{value}");
            Ok(())
        }
        Some(path) => {
            let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::validation(e.to_string()))?;
            text.push('\n');
            write_file(path, text.as_bytes())
        }
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))
}

pub fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

/// `start:step:end` (end inclusive) or a single time.
pub fn parse_times(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::validation(format!("bad time grid `{spec}`; expected T or start:step:end"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<CliResult<_>>()?;
    if parts.iter().any(|x| !x.is_finite()) {
        return Err(bad());
    }
    match parts[..] {
        [t] => Ok(vec![t]),
        [start, step, end] => {
            if !(step > 0.0) || end < start {
                return Err(bad());
            }
            let span = (end - start) / step;
            // Tolerate the rounding in e.g. 0:0.1:1.
            let count = (span + 1e-9).floor() as usize;
            if count > 1_000_000 {
                return Err(CliError::validation("time grid has more than 10^6 points"));
            }
            Ok((0..=count).map(|j| start + j as f64 * step).collect())
        }
        _ => Err(bad()),
    }
}

/// `1,2,5`, `1..16` or `1..=16` (both ranges inclusive).
pub fn parse_indices(spec: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::validation(format!("bad index list `{spec}`; expected 1,2,3 or 1..16"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let indices: Vec<usize> = if let Some((lo, hi)) = spec.split_once("..") {
        let (lo, hi) = (num(lo)?, num(hi.strip_prefix('=').unwrap_or(hi))?);
        if hi < lo {
            return Err(bad());
        }
        (lo..=hi).collect()
    } else {
        spec.split(',').map(num).collect::<CliResult<_>>()?
    };
    if indices.contains(&0) {
        return Err(CliError::validation("gap indices start at 1"));
    }
    Ok(indices)
}
