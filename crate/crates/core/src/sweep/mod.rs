//! Parameter sweeps over the solvers, producing one CSV table and one JSON
//! metadata file per dataset.

mod config;
mod datasets;
mod record;
mod tasks;

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

pub use config::{
    Backend, CrossCheckConfig, DetuningConfig, GlassConfig, PhaseConfig, RunConfig, SingleConfig, SiteConfig,
    SolverConfig, TStarConfig, VisibilityConfig,
};
pub use datasets::Collector;
pub use record::{
    config_hash, format_real, sort_records, write_csv, write_dataset, Metadata, ResultRecord, Written, CODE_VERSION,
    CSV_HEADER, SCHEMA_VERSION,
};
pub use tasks::{resolve_backend, solve_chain, task_key, ChainSolution};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dataset {
    Site,
    Ed,
    Dmrg,
    PhaseDiagram,
    Visibility,
    TStar,
    Detuning,
    Glass,
}

impl Dataset {
    pub const ALL: [Dataset; 8] = [
        Self::Site,
        Self::Ed,
        Self::Dmrg,
        Self::PhaseDiagram,
        Self::Visibility,
        Self::TStar,
        Self::Detuning,
        Self::Glass,
    ];

    /// Subcommand and file-stem name.
    pub fn name(self) -> &'static str {
        match self {
            Self::Site => "site",
            Self::Ed => "ed",
            Self::Dmrg => "dmrg",
            Self::PhaseDiagram => "phase-diagram",
            Self::Visibility => "visibility",
            Self::TStar => "tstar",
            Self::Detuning => "detuning",
            Self::Glass => "glass",
        }
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub dataset: Dataset,
    pub config: RunConfig,
    pub config_hash: String,
    pub timestamp: u64,
    /// Sorted rows.
    pub records: Vec<ResultRecord>,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

impl RunOutput {
    pub fn find(&self, quantity: &str) -> impl Iterator<Item = &ResultRecord> {
        let q = quantity.to_string();
        self.records.iter().filter(move |r| r.quantity == q)
    }

    pub fn write(&self, dir: &Path) -> Result<Written> {
        let meta = Metadata {
            schema_version: SCHEMA_VERSION,
            code_version: CODE_VERSION,
            dataset: self.dataset.name(),
            config_hash: &self.config_hash,
            timestamp: self.timestamp,
            rows: self.records.len(),
            failures: &self.failures,
            notes: &self.notes,
            config: &self.config,
        };
        write_dataset(dir, &meta, &self.records)
    }
}

/// Validates `config`, runs one dataset on a pool of `config.workers`
/// threads and returns the sorted rows. Nothing is written.
pub fn run(dataset: Dataset, config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let timestamp = config.timestamp.unwrap_or_else(|| {
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
    });
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut out = Collector::new(config);
    pool.install(|| match dataset {
        Dataset::Site => datasets::site(config, &mut out),
        Dataset::Ed => datasets::single(config, Backend::Ed, &mut out),
        Dataset::Dmrg => datasets::single(config, Backend::Dmrg, &mut out),
        Dataset::PhaseDiagram => datasets::phase_diagram(config, &mut out),
        Dataset::Visibility => datasets::visibility_sweep(config, &mut out),
        Dataset::TStar => datasets::tstar(config, &mut out),
        Dataset::Detuning => datasets::detuning(config, &mut out),
        Dataset::Glass => datasets::glass(config, &mut out),
    })?;
    let mut records = out.records;
    sort_records(&mut records);
    let notes = vec![format!("energies in units of {}", config.model.unit_name())];
    Ok(RunOutput {
        dataset,
        config: config.clone(),
        config_hash: config_hash(config),
        timestamp,
        records,
        failures: out.failures,
        notes,
    })
}

/// [`run`] followed by writing `<out>/<dataset>.csv` and `.json`.
pub fn run_and_write(dataset: Dataset, config: &RunConfig) -> Result<(RunOutput, Written)> {
    let output = run(dataset, config)?;
    let written = output.write(&config.out)?;
    Ok((output, written))
}
