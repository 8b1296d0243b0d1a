//! Run directories: CSV and JSON artifacts plus a manifest of hashes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Full double precision: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn json_text<T: Serialize>(value: &T) -> String {
    // Round trip through `Value` so that map keys come out sorted.
    let v = serde_json::to_value(value).expect("report serializes");
    serde_json::to_string_pretty(&v).expect("value serializes") + "\n"
}

#[derive(Debug, Serialize)]
struct FileEntry {
    name: String,
    sha256: String,
    bytes: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config_sha256: &'a str,
    seed: u64,
    tolerances: &'a BTreeMap<String, f64>,
    exit_code: u8,
    files: &'a [FileEntry],
}

pub struct RunDir {
    pub path: PathBuf,
    command: String,
    config_sha256: String,
    seed: u64,
    files: Vec<FileEntry>,
    pub tolerances: BTreeMap<String, f64>,
}

impl RunDir {
    /// `<output_dir>/<command>-<hash>`, named by the hash of the command and
    /// the canonical config without `output_dir`, so that reruns of one
    /// experiment share a name.
    pub fn create(command: &str, config: &ExperimentConfig) -> Result<Self, CliError> {
        let text = config.canonical_json();
        let config_sha256 = sha256_hex(text.as_bytes());
        let mut relocatable = config.clone();
        relocatable.output_dir = PathBuf::new();
        let tag = sha256_hex(format!("{command}\n{}", relocatable.canonical_json()).as_bytes());
        let path = config.output_dir.join(format!("{command}-{}", &tag[..12]));
        fs::create_dir_all(&path).map_err(|e| CliError::io("output", e))?;
        let mut dir = Self {
            path,
            command: command.into(),
            config_sha256,
            seed: config.seed,
            files: Vec::new(),
            tolerances: BTreeMap::new(),
        };
        dir.write_text("config.json", &text)?;
        Ok(dir)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        fs::write(self.path.join(name), text).map_err(|e| CliError::io("output", e))?;
        self.files.retain(|f| f.name != name);
        self.files.push(FileEntry {
            name: name.into(),
            sha256: sha256_hex(text.as_bytes()),
            bytes: text.len(),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.write_text(name, &json_text(value))
    }

    pub fn write_csv(&mut self, name: &str, header: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
        let mut out = header.join(",");
        out.push('\n');
        for row in rows {
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", fmt_f64(*v));
            }
            out.push('\n');
        }
        self.write_text(name, &out)
    }

    pub fn tolerance(&mut self, name: &str, value: f64) {
        self.tolerances.insert(name.into(), value);
    }

    pub fn finish(mut self, exit_code: u8) -> Result<PathBuf, CliError> {
        self.files.sort_by(|a, b| a.name.cmp(&b.name));
        let manifest = Manifest {
            command: &self.command,
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: &self.config_sha256,
            seed: self.seed,
            tolerances: &self.tolerances,
            exit_code,
            files: &self.files,
        };
        let text = json_text(&manifest);
        fs::write(self.path.join("manifest.json"), text).map_err(|e| CliError::io("output", e))?;
        Ok(self.path)
    }
}

/// Column names `prefix_0 .. prefix_{n-1}`.
pub fn columns(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (0..n).map(move |k| format!("{prefix}_{k}"))
}

pub fn header<I: IntoIterator<Item = String>>(first: &[&str], rest: I) -> Vec<String> {
    first.iter().map(|s| s.to_string()).chain(rest).collect()
}
