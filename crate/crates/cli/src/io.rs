use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

/// Exit codes: 0 success, 1 a verified property failed, 2 usage or parse error,
/// 3 input that parses but violates an invariant.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Parse { path: PathBuf, message: String },
    Invariant(String),
    Io { path: PathBuf, source: std::io::Error },
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) | CliError::Parse { .. } | CliError::Io { .. } => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Parse { path, message } => write!(f, "{}: parse error: {message}", path.display()),
            CliError::Invariant(m) => write!(f, "invalid input: {m}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Failed(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<weylcomp_core::Error> for CliError {
    fn from(e: weylcomp_core::Error) -> Self {
        CliError::Invariant(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Messages serde itself produces for shape problems; anything else in the data
/// category comes from a validating constructor.
const SHAPE_ERRORS: [&str; 7] = [
    "invalid type",
    "invalid value",
    "invalid length",
    "unknown variant",
    "unknown field",
    "missing field",
    "duplicate field",
];

fn read_value(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.into(),
        message: e.to_string(),
    })
}

pub fn decode<T: DeserializeOwned>(path: &Path, value: Value) -> CliResult<T> {
    serde_json::from_value(value).map_err(|e| {
        let message = e.to_string();
        if SHAPE_ERRORS.iter().any(|p| message.starts_with(p)) {
            CliError::Parse {
                path: path.into(),
                message,
            }
        } else {
            CliError::Invariant(format!("{}: {message}", path.display()))
        }
    })
}

pub fn load<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let v = read_value(path)?;
    decode(path, v)
}

/// Bare `[[..], ..]` rows are accepted wherever `{"n": .., "matrix": ..}` is expected.
fn wrap_rows(v: Value) -> Value {
    match v {
        Value::Array(rows) => serde_json::json!({ "n": rows.len(), "matrix": rows }),
        other => other,
    }
}

pub fn load_matrix<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let v = read_value(path)?;
    decode(path, wrap_rows(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A finished command result: JSON always, CSV when the command provides a table.
pub struct Output {
    json: Value,
    csv: Option<Vec<Vec<String>>>,
}

impl Output {
    pub fn json<T: Serialize>(v: &T) -> Self {
        Output {
            json: serde_json::to_value(v).expect("reports serialize"),
            csv: None,
        }
    }

    pub fn with_csv(mut self, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        let mut table = vec![header.iter().map(|s| s.to_string()).collect()];
        table.extend(rows);
        self.csv = Some(table);
        self
    }

    fn render(&self, format: Format) -> CliResult<Vec<u8>> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("values serialize");
                s.push('\n');
                Ok(s.into_bytes())
            }
            Format::Csv => {
                let table = self
                    .csv
                    .as_ref()
                    .ok_or_else(|| CliError::Usage("this command has no CSV output".into()))?;
                let mut w = csv::Writer::from_writer(Vec::new());
                for row in table {
                    w.write_record(row).expect("in-memory write");
                }
                Ok(w.into_inner().expect("in-memory flush"))
            }
        }
    }

    /// Writes to `out` atomically (temporary file in the same directory, then rename),
    /// or to standard output.
    pub fn emit(&self, format: Format, out: Option<&Path>) -> CliResult<()> {
        let bytes = self.render(format)?;
        match out {
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(&bytes)
                    .and_then(|_| stdout.flush())
                    .map_err(|source| CliError::Io {
                        path: "<stdout>".into(),
                        source,
                    })
            }
            Some(path) => {
                let dir = path
                    .parent()
                    .filter(|p| !p.as_os_str().is_empty())
                    .unwrap_or(Path::new("."));
                let io = |source| CliError::Io {
                    path: path.into(),
                    source,
                };
                let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
                tmp.write_all(&bytes).map_err(io)?;
                tmp.as_file().sync_all().map_err(io)?;
                tmp.persist(path).map_err(|e| io(e.error))?;
                Ok(())
            }
        }
    }
}

pub fn num(v: f64) -> String {
    format!("{v}")
}
