use super::config::hex;
use crate::dump::write_atomic;
use crate::Result;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

/// A table of numbers written as CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Trace {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Trace {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Everything a run produces except timing, which goes to a sidecar so the
/// record itself is reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub version: String,
    pub stages: BTreeMap<String, Value>,
    pub traces: BTreeMap<String, Trace>,
}

impl RunRecord {
    pub fn new(config_hash: String) -> Self {
        Self { config_hash, version: env!("CARGO_PKG_VERSION").into(), stages: BTreeMap::new(), traces: BTreeMap::new() }
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut v = serde_json::to_vec_pretty(self).expect("record serializes");
        v.push(b'\n');
        v
    }

    pub fn digest(&self) -> String {
        hex(&Sha256::digest(self.to_json()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timing {
    pub wall_clock_seconds: f64,
    pub record_sha256: String,
    pub threads: usize,
}

/// Writes `record.json`, one CSV per trace and `timing.json`, each through a
/// temporary file and rename.
pub fn write_outputs(dir: &Path, record: &RunRecord, seconds: f64) -> Result<String> {
    std::fs::create_dir_all(dir)?;
    let json = record.to_json();
    write_atomic(&dir.join("record.json"), &json)?;
    for (name, t) in &record.traces {
        write_atomic(&dir.join(format!("{name}.csv")), t.to_csv().as_bytes())?;
    }
    let digest = hex(&Sha256::digest(&json));
    let timing = Timing { wall_clock_seconds: seconds, record_sha256: digest.clone(), threads: rayon::current_num_threads() };
    write_atomic(&dir.join("timing.json"), &serde_json::to_vec_pretty(&timing)?)?;
    Ok(digest)
}
