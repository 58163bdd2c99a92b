//! Run artifacts and the output directory.
//!
//! Artifacts are assembled in memory and only written once the experiment
//! has succeeded: first into a staging directory, then moved into place.
//! A lock file keeps two runs from sharing one directory.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Closed form or deterministic numerics.
    Analytic,
    /// Monte Carlo estimate with a standard error.
    Sampled,
    /// Interpolating model without exact theory behind it.
    Model,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scalar {
    pub value: f64,
    pub se: f64,
    pub provenance: Provenance,
}

/// Contents of results.json. Maps are ordered so the file is stable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Results {
    pub kind: String,
    pub seed: u64,
    pub values: BTreeMap<String, Scalar>,
    pub info: BTreeMap<String, Value>,
}

impl Results {
    pub fn new(kind: &str, seed: u64) -> Self {
        Self { kind: kind.to_string(), seed, values: BTreeMap::new(), info: BTreeMap::new() }
    }

    pub fn analytic(&mut self, key: impl Into<String>, value: f64) {
        self.put(key, value, 0.0, Provenance::Analytic);
    }

    pub fn model(&mut self, key: impl Into<String>, value: f64) {
        self.put(key, value, 0.0, Provenance::Model);
    }

    pub fn sampled(&mut self, key: impl Into<String>, est: solitonq_core::Estimate) {
        self.put(key, est.value, est.se, Provenance::Sampled);
    }

    pub fn put(&mut self, key: impl Into<String>, value: f64, se: f64, provenance: Provenance) {
        self.values.insert(key.into(), Scalar { value, se, provenance });
    }

    pub fn info(&mut self, key: impl Into<String>, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("info value serializes");
        self.info.insert(key.into(), v);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("results serialize");
        s.push('\n');
        s
    }
}

/// CSV text with a header row; floats use the shortest round-trip form.
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { text: format!("{}\n", header.join(",")), columns: header.len() }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn floats(&mut self, cells: &[f64]) {
        let cells: Vec<String> = cells.iter().map(|v| v.to_string()).collect();
        self.row(&cells);
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

/// Everything a run produces.
pub struct Artifacts {
    pub results: Results,
    /// Relative path (e.g. `data/q_table.csv`) to contents.
    pub files: BTreeMap<String, Vec<u8>>,
    pub log: Vec<String>,
}

impl Artifacts {
    pub fn new(kind: &str, seed: u64) -> Self {
        Self { results: Results::new(kind, seed), files: BTreeMap::new(), log: Vec::new() }
    }

    pub fn csv(&mut self, name: &str, csv: Csv) {
        self.files.insert(format!("data/{name}"), csv.into_bytes());
    }

    pub fn file(&mut self, path: &str, bytes: Vec<u8>) {
        self.files.insert(path.to_string(), bytes);
    }

    pub fn log(&mut self, line: impl Into<String>) {
        self.log.push(line.into());
    }
}

const LOCK: &str = ".solitonq.lock";
const STAGING: &str = ".staging";

/// Exclusive handle on an output directory; released on drop.
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn acquire(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| io_err(root, e))?;
        let lock = root.join(LOCK);
        match fs::OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(CliError::Validation(format!(
                    "output directory {} is in use (remove {} if no run is active)",
                    root.display(),
                    lock.display()
                )));
            }
            Err(e) => return Err(io_err(&lock, e)),
        }
        Ok(Self { root: root.to_path_buf() })
    }

    /// Writes all artifacts to staging, then moves them into the directory.
    /// On error the staging area is removed and existing files are untouched.
    pub fn commit(&self, art: &Artifacts, config_toml: &str) -> Result<(), CliError> {
        let staging = self.root.join(STAGING);
        let result = self.stage(&staging, art, config_toml).and_then(|paths| {
            for rel in &paths {
                let dst = self.root.join(rel);
                if let Some(parent) = dst.parent() {
                    fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
                }
                fs::rename(staging.join(rel), &dst).map_err(|e| io_err(&dst, e))?;
            }
            Ok(())
        });
        let _ = fs::remove_dir_all(&staging);
        result
    }

    fn stage(&self, staging: &Path, art: &Artifacts, config_toml: &str) -> Result<Vec<String>, CliError> {
        let _ = fs::remove_dir_all(staging);
        let mut log = art.log.join("\n");
        log.push('\n');
        let mut entries: Vec<(&str, &[u8])> = vec![
            ("config.toml", config_toml.as_bytes()),
            ("log.txt", log.as_bytes()),
        ];
        let results = art.results.to_json();
        entries.push(("results.json", results.as_bytes()));
        entries.extend(art.files.iter().map(|(k, v)| (k.as_str(), v.as_slice())));
        let mut paths = Vec::new();
        for (rel, bytes) in entries {
            let path = staging.join(rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
            }
            fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
            paths.push(rel.to_string());
        }
        Ok(paths)
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(self.root.join(STAGING));
        let _ = fs::remove_file(self.root.join(LOCK));
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}
