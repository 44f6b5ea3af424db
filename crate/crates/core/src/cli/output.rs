//! CSV tables, checksums and the run manifest.
//!
//! Every file is written to a temporary name in the output directory and
//! renamed into place; `manifest.json` is written last and marks a complete
//! run.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST: &str = "manifest.json";

/// A float with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// One CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    U(u64),
    S(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::U(x as u64)
    }
}
impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::U(x)
    }
}
impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::I(x)
    }
}
impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}
impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}
impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::S(x.to_string())
    }
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::F(x) => out.push_str(&fmt_f64(*x)),
            Cell::I(x) => write!(out, "{x}").unwrap(),
            Cell::U(x) => write!(out, "{x}").unwrap(),
            Cell::S(s) if s.contains([',', '"', '\n']) => write!(out, "\"{}\"", s.replace('"', "\"\"")).unwrap(),
            Cell::S(s) => out.push_str(s),
        }
    }
}

/// A named CSV table with a fixed header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in {}", self.name);
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                c.render(&mut out);
            }
            out.push('\n');
        }
        out
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        write!(s, "{b:02x}").unwrap();
        s
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// `complete` or `aborted`.
    pub status: String,
    pub config: serde_json::Value,
    pub config_sha256: String,
    pub master_seed: u64,
    pub threads: usize,
    pub sequential: bool,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub wall_seconds: f64,
    pub events: u64,
    pub files: Vec<FileRecord>,
}

impl Manifest {
    pub fn checksums(&self) -> Vec<(&str, &str)> {
        self.files.iter().map(|f| (f.name.as_str(), f.sha256.as_str())).collect()
    }
}

pub fn unix_now() -> f64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    let path = dir.join(name);
    tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
    Ok(path)
}

/// Checks that `dir` can receive a new run.
pub fn prepare_dir(dir: &Path, overwrite: bool) -> Result<()> {
    if dir.join(MANIFEST).exists() && !overwrite {
        return Err(Error::Config(format!(
            "{} already holds a run; pass --overwrite to replace it",
            dir.display()
        )));
    }
    std::fs::create_dir_all(dir)?;
    Ok(())
}

/// Writes `tables` as CSV, fills in `manifest.files` and writes the manifest last.
pub fn write_results(dir: &Path, tables: &[Table], manifest: &mut Manifest) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::with_capacity(tables.len() + 1);
    manifest.files.clear();
    for t in tables {
        let name = format!("{}.csv", t.name);
        let body = t.render();
        paths.push(write_atomic(dir, &name, body.as_bytes())?);
        manifest.files.push(FileRecord { name, bytes: body.len() as u64, sha256: sha256_hex(body.as_bytes()) });
    }
    paths.push(write_manifest(dir, manifest)?);
    Ok(paths)
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<PathBuf> {
    let json = serde_json::to_string_pretty(manifest).map_err(|e| Error::Config(e.to_string()))?;
    write_atomic(dir, MANIFEST, json.as_bytes())
}
