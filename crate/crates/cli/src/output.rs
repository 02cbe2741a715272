//! Fixed-format CSV tables with a `#` footer, and JSON files.

use std::fs;
use std::path::{Path, PathBuf};

use antipt_core::observables::{g2_label, g3_label, CorrelationRecord};
use serde::Serialize;

use crate::CliError;

/// 17 significant digits, so that reruns diff exactly.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn record_header() -> Vec<String> {
    let mut h: Vec<String> = ["z_m", "n_as", "n_ai", "n_bs", "n_bi"].map(String::from).to_vec();
    h.extend((0..4).map(g2_label));
    h.extend((0..4).map(g3_label));
    h.push("G4".into());
    h.extend(["n_bright_s", "n_bright_i", "n_dark_s", "n_dark_i", "norm"].map(String::from));
    h
}

pub fn record_fields(r: &CorrelationRecord) -> Vec<f64> {
    let mut v = vec![r.z];
    v.extend(r.n);
    v.extend(r.g2);
    v.extend(r.g3);
    v.push(r.g4);
    v.extend(r.n_bright);
    v.extend(r.n_dark);
    v.push(r.norm);
    v
}

#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub footer: Vec<(String, String)>,
}

impl Table {
    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        let mut out = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        for (k, v) in &self.footer {
            out.extend_from_slice(format!("# {k}={v}\n").as_bytes());
        }
        Ok(out)
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

/// Paths of the CSV and its JSON sidecar.
pub fn output_paths(dir: &Path, name: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{name}.csv")), dir.join(format!("{name}.json")))
}
