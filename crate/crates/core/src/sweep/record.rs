//! Result rows, their CSV form and the JSON metadata sidecar.
//!
//! Reals are written with 17 significant digits so that tables can be
//! regenerated bit for bit. Rows are sorted before writing, so the output
//! does not depend on the order in which workers finish.

use std::cmp::Ordering;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CSV_HEADER: [&str; 15] = [
    "config_hash",
    "model",
    "atoms",
    "length",
    "hopping",
    "n_pol",
    "quantity",
    "param",
    "value",
    "error",
    "backend",
    "converged",
    "flags",
    "timestamp",
    "code_version",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRecord {
    pub model: String,
    /// Atom number, or the mean atom number of a disordered ensemble.
    pub atoms: f64,
    pub length: Option<usize>,
    pub hopping: Option<f64>,
    pub n_pol: Option<u32>,
    pub quantity: String,
    /// Secondary coordinate: momentum index, lobe, detuning, spread, ...
    pub param: Option<f64>,
    pub value: f64,
    pub error: Option<f64>,
    pub backend: String,
    pub converged: bool,
    /// `;`-separated diagnostics.
    pub flags: String,
}

impl ResultRecord {
    pub fn new(model: &str, atoms: f64, quantity: &str, value: f64) -> Self {
        Self {
            model: model.to_string(),
            atoms,
            length: None,
            hopping: None,
            n_pol: None,
            quantity: quantity.to_string(),
            param: None,
            value,
            error: None,
            backend: String::new(),
            converged: true,
            flags: String::new(),
        }
    }

    pub fn length(mut self, l: usize) -> Self {
        self.length = Some(l);
        self
    }

    pub fn hopping(mut self, t: f64) -> Self {
        self.hopping = Some(t);
        self
    }

    pub fn n_pol(mut self, n: u32) -> Self {
        self.n_pol = Some(n);
        self
    }

    pub fn param(mut self, p: f64) -> Self {
        self.param = Some(p);
        self
    }

    pub fn error(mut self, e: f64) -> Self {
        self.error = Some(e);
        self
    }

    pub fn backend(mut self, b: &str) -> Self {
        self.backend = b.to_string();
        self
    }

    pub fn converged(mut self, c: bool) -> Self {
        self.converged = c;
        self
    }

    pub fn flag(mut self, f: &str) -> Self {
        if !f.is_empty() {
            if !self.flags.is_empty() {
                self.flags.push(';');
            }
            self.flags.push_str(f);
        }
        self
    }

    fn sort_key(&self, other: &Self) -> Ordering {
        let opt = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (a, b) => a.is_some().cmp(&b.is_some()),
        };
        self.quantity
            .cmp(&other.quantity)
            .then(self.atoms.total_cmp(&other.atoms))
            .then(self.length.cmp(&other.length))
            .then(opt(self.hopping, other.hopping))
            .then(self.n_pol.cmp(&other.n_pol))
            .then(opt(self.param, other.param))
            .then(self.backend.cmp(&other.backend))
    }
}

pub fn sort_records(records: &mut [ResultRecord]) {
    records.sort_by(|a, b| a.sort_key(b));
}

/// A real with 17 significant digits.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_real).unwrap_or_default()
}

/// Short SHA-256 of the resolved configuration, ignoring settings that
/// cannot change results (output directory, worker count).
pub fn config_hash(config: &RunConfig) -> String {
    let mut c = config.clone();
    c.out = PathBuf::new();
    c.workers = 1;
    let json = serde_json::to_vec(&c).expect("config serializes");
    hex::encode(&Sha256::digest(&json)[..8])
}

pub fn write_csv<W: Write>(out: W, records: &[ResultRecord], hash: &str, timestamp: u64) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            hash.to_string(),
            r.model.clone(),
            format_real(r.atoms),
            r.length.map(|l| l.to_string()).unwrap_or_default(),
            format_opt(r.hopping),
            r.n_pol.map(|n| n.to_string()).unwrap_or_default(),
            r.quantity.clone(),
            format_opt(r.param),
            format_real(r.value),
            format_opt(r.error),
            r.backend.clone(),
            r.converged.to_string(),
            r.flags.clone(),
            timestamp.to_string(),
            CODE_VERSION.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct Metadata<'a> {
    pub schema_version: u32,
    pub code_version: &'a str,
    pub dataset: &'a str,
    pub config_hash: &'a str,
    pub timestamp: u64,
    pub rows: usize,
    pub failures: &'a [String],
    pub notes: &'a [String],
    pub config: &'a RunConfig,
}

/// Files written for one dataset.
#[derive(Clone, Debug)]
pub struct Written {
    pub csv: PathBuf,
    pub json: PathBuf,
}

pub fn write_dataset(dir: &Path, meta: &Metadata, records: &[ResultRecord]) -> Result<Written> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{}.csv", meta.dataset));
    let json = dir.join(format!("{}.json", meta.dataset));
    write_csv(fs::File::create(&csv)?, records, meta.config_hash, meta.timestamp)?;
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    fs::write(&json, text)?;
    Ok(Written { csv, json })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_keep_seventeen_digits() {
        assert_eq!(format_real(0.1), "1.0000000000000001e-1");
        assert_eq!(format_real(-2.0), "-2.0000000000000000e0");
        let x = std::f64::consts::PI;
        assert_eq!(format_real(x).parse::<f64>().unwrap(), x);
        assert_eq!(format_real(f64::INFINITY), "inf");
    }

    #[test]
    fn rows_sort_by_key() {
        let mut v = vec![
            ResultRecord::new("I", 1.0, "energy", 0.0).length(8).n_pol(9),
            ResultRecord::new("I", 1.0, "energy", 0.0).length(8).n_pol(7),
            ResultRecord::new("I", 1.0, "alpha", 0.0),
        ];
        sort_records(&mut v);
        assert_eq!(v[0].quantity, "alpha");
        assert_eq!(v[1].n_pol, Some(7));
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.out = "elsewhere".into();
        b.workers = 8;
        assert_eq!(config_hash(&a), config_hash(&b));
        b.seed += 1;
        assert_ne!(config_hash(&a), config_hash(&b));
    }
}
