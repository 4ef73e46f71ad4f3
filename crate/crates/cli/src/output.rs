//! Output directories, the run.json echo and input readers.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};
use shapeflow::Contour;

use crate::error::{CliError, CliResult};

pub fn display<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// An output directory that exists and holds `run.json`.
pub struct OutputDir {
    root: PathBuf,
}

#[derive(Serialize)]
struct RunRecord<'a, A: Serialize, R: Serialize> {
    command: &'a str,
    version: &'a str,
    args: &'a A,
    resolved: &'a R,
}

impl OutputDir {
    pub fn create<A: Serialize, R: Serialize>(
        root: &Path,
        command: &str,
        args: &A,
        resolved: &R,
    ) -> CliResult<Self> {
        std::fs::create_dir_all(root)
            .map_err(|e| CliError::usage(format!("cannot create {}: {e}", root.display())))?;
        let dir = OutputDir {
            root: root.to_path_buf(),
        };
        let record = RunRecord {
            command,
            version: env!("CARGO_PKG_VERSION"),
            args,
            resolved,
        };
        dir.write("run.json", &to_json(&record))?;
        Ok(dir)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&self, name: &str, content: &str) -> CliResult<()> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| io_failure(parent, e))?;
        }
        std::fs::write(&path, content).map_err(|e| io_failure(&path, e))
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> CliError {
    CliError::Numerical(format!("cannot write {}: {e}", path.display()))
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

pub fn read_contour(path: &Path) -> CliResult<Contour> {
    Contour::from_json(&read_text(path)?)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

pub fn require_positive(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::usage(format!(
            "--{name} must be positive, got {v}"
        )))
    }
}
