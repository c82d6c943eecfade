use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};

/// A CSV cell: numbers are printed in scientific notation at the run precision.
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

/// Writes files into one directory, each atomically, and remembers them for
/// the manifest.
pub struct Sink {
    dir: PathBuf,
    precision: usize,
    written: Vec<String>,
}

impl Sink {
    pub fn new(dir: &Path, precision: usize) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Sink {
            dir: dir.to_path_buf(),
            precision,
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    fn format(&self, cell: &Cell) -> String {
        match cell {
            Cell::Num(x) if x.is_finite() => format!("{:.*e}", self.precision, x),
            Cell::Num(_) => String::new(),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        let err = |source| CliError::Write {
            path: path.clone(),
            source,
        };
        let mut tmp = NamedTempFile::new_in(&self.dir).map_err(err)?;
        tmp.write_all(bytes).map_err(err)?;
        tmp.as_file().sync_all().map_err(err)?;
        tmp.persist(&path).map_err(|e| err(e.error))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Write {
            path: self.dir.join(name),
            source: std::io::Error::other(e),
        };
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(row.iter().map(|c| self.format(c))).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Write {
            path: self.dir.join(name),
            source: e.into_error(),
        })?;
        self.write_bytes(name, &bytes)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Write {
            path: self.dir.join(name),
            source: std::io::Error::other(e),
        })?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }
}

#[derive(Serialize, serde::Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub settings: crate::config::Settings,
    pub params: serde_json::Value,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
    pub elapsed_seconds: f64,
}

pub fn manifest_name(stem: &str) -> String {
    format!("{stem}.manifest.json")
}

/// Writes `<stem>.manifest.json` describing everything written so far.
pub fn write_manifest<P: Serialize>(
    sink: &mut Sink,
    stem: &str,
    command: &str,
    settings: &crate::config::Settings,
    params: &P,
    notes: Vec<String>,
    elapsed: Duration,
) -> CliResult<()> {
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        settings: settings.clone(),
        params: serde_json::to_value(params).map_err(|e| CliError::Config(e.to_string()))?,
        outputs: sink.written().to_vec(),
        notes,
        elapsed_seconds: elapsed.as_secs_f64(),
    };
    sink.json(&manifest_name(stem), &manifest)
}

/// File stem of an output name such as `envelope.csv`.
pub fn stem(name: &str) -> String {
    Path::new(name)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| name.to_string())
}
