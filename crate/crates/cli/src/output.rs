//! File formats: CSV tables, JSON heat maps and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use srcid::analysis::HeatGrid;

use crate::error::CliError;

/// One output file held in memory until the run succeeds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OutputSet {
    pub files: Vec<OutputFile>,
    /// Free-form remarks recorded in the manifest (e.g. skipped maps).
    pub notes: Vec<String>,
}

impl OutputSet {
    pub fn push(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push(OutputFile { name: name.into(), bytes });
    }

    pub fn get(&self, name: &str) -> Option<&OutputFile> {
        self.files.iter().find(|f| f.name == name)
    }

    pub fn extend(&mut self, other: OutputSet) {
        self.files.extend(other.files);
        self.notes.extend(other.notes);
    }
}

/// Builds a CSV document with a header row.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Self { writer }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn finish(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }
}

/// Shortest round-trip decimal form, identical across platforms.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn heatmap_csv(grid: &HeatGrid) -> Vec<u8> {
    let mut t = Table::new(&["x", "y", "value"]);
    for (p, v) in grid.iter() {
        t.row([num(p.x), num(p.y), num(v)]);
    }
    t.finish()
}

#[derive(Serialize)]
struct HeatmapJson<'a> {
    label: &'a str,
    eps: f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    nx: usize,
    ny: usize,
    /// Row-major, `x` fastest: `values[iy * nx + ix]`.
    values: &'a [f64],
}

pub fn heatmap_json(grid: &HeatGrid, label: &str, eps: f64) -> Vec<u8> {
    let b = grid.spec.bounds;
    let doc = HeatmapJson {
        label,
        eps,
        x0: b.x0,
        x1: b.x1,
        y0: b.y0,
        y1: b.y1,
        nx: grid.spec.nx,
        ny: grid.spec.ny,
        values: &grid.values,
    };
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("heatmap serializes");
    bytes.push(b'\n');
    bytes
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct Manifest {
    pub driver: String,
    pub version: String,
    pub seed: u64,
    pub config_sha256: String,
    pub files: Vec<ManifestEntry>,
    pub notes: Vec<String>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl Manifest {
    pub fn new(driver: &str, seed: u64, config_bytes: &[u8], outputs: &OutputSet) -> Self {
        Self {
            driver: driver.into(),
            version: crate::VERSION.into(),
            seed,
            config_sha256: sha256_hex(config_bytes),
            files: outputs
                .files
                .iter()
                .map(|f| ManifestEntry {
                    name: f.name.clone(),
                    sha256: sha256_hex(&f.bytes),
                    bytes: f.bytes.len(),
                })
                .collect(),
            notes: outputs.notes.clone(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("manifest serializes");
        bytes.push(b'\n');
        bytes
    }
}

/// Writes all files plus the manifest into `dir`.
///
/// Files are first written to a staging directory inside `dir` and only
/// moved into place once every write succeeded; on failure the staging
/// directory is removed and `dir` keeps its previous contents.
pub fn write_outputs(dir: &Path, outputs: &OutputSet, manifest: &Manifest) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let staging = dir.join(format!(".staging-{}-{}", manifest.driver, std::process::id()));
    let result = (|| -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(&staging)?;
        let mut staged = Vec::new();
        for f in &outputs.files {
            let path = staging.join(&f.name);
            fs::write(&path, &f.bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            staged.push(f.name.clone());
        }
        fs::write(staging.join(MANIFEST_NAME), manifest.to_bytes())?;
        staged.push(MANIFEST_NAME.into());
        let mut finals = Vec::new();
        for name in staged {
            let target = dir.join(&name);
            fs::rename(staging.join(&name), &target)?;
            finals.push(target);
        }
        Ok(finals)
    })();
    let _ = fs::remove_dir_all(&staging);
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use srcid::analysis::GridSpec;
    use srcid::Rect;

    #[test]
    fn csv_has_header_and_rows() {
        let grid = HeatGrid::zeros(GridSpec::new(Rect::UNIT, 2, 2).unwrap());
        let text = String::from_utf8(heatmap_csv(&grid)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,y,value");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[2], "1,0,0");
    }

    #[test]
    fn json_heatmap_round_trips() {
        let mut grid = HeatGrid::zeros(GridSpec::new(Rect::UNIT, 3, 2).unwrap());
        grid.values[4] = 0.25;
        let v: serde_json::Value = serde_json::from_slice(&heatmap_json(&grid, "p_emp", 0.04)).unwrap();
        assert_eq!(v["nx"], 3);
        assert_eq!(v["values"][4], 0.25);
    }

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
