use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{fmt_f64, ExperimentConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// A CSV table built in memory so that it can be hashed before writing.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> std::io::Result<Vec<u8>> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row)?;
        }
        writer.into_inner().map_err(|e| e.into_error())
    }
}

pub fn cell(x: f64) -> String {
    fmt_f64(x)
}

pub fn opt_cell(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// One file produced by a command.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn json(path: PathBuf, value: &Value) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("json values always serialize");
        bytes.push(b'\n');
        Self { path, bytes }
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(&self.bytes))
    }
}

/// `<out>.<suffix>`, keeping the full original file name.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".");
    name.push(suffix);
    out.with_file_name(name)
}

pub fn manifest(
    config: &ExperimentConfig,
    columns: &[String],
    artifacts: &[Artifact],
    warnings: &[String],
    threads: usize,
    elapsed: Duration,
) -> Value {
    let outputs: Vec<Value> = artifacts
        .iter()
        .map(|a| json!({ "path": a.path.display().to_string(), "sha256": a.sha256(), "bytes": a.bytes.len() }))
        .collect();
    json!({
        "tool": "bethe-strip",
        "version": env!("CARGO_PKG_VERSION"),
        "command": config.command.name(),
        "config": config.to_pairs(),
        "schema": { "version": SCHEMA_VERSION, "columns": columns },
        "threads": threads,
        "wall_clock_seconds": elapsed.as_secs_f64(),
        "outputs": outputs,
        "warnings": warnings,
    })
}

pub fn write_all(artifacts: &[Artifact]) -> std::io::Result<()> {
    for a in artifacts {
        if let Some(dir) = a.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&a.path, &a.bytes)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_commas_and_leaves_empty_cells() {
        let mut t = Table::new(["J", "x"]);
        t.push(vec!["1,0;0".into(), opt_cell(None)]);
        t.push(vec!["0,1;0".into(), cell(0.1)]);
        let text = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        assert_eq!(text, "J,x\n\"1,0;0\",\n\"0,1;0\",0.1\n");
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("dir/run.csv"), "manifest.json"), PathBuf::from("dir/run.csv.manifest.json"));
    }

    #[test]
    fn digest_is_hex_sha256() {
        let a = Artifact { path: "x".into(), bytes: b"abc".to_vec() };
        assert_eq!(a.sha256(), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
