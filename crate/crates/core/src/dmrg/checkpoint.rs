//! Versioned on-disk snapshot of a DMRG run, written after every sweep.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::block::Block;
use super::DmrgParams;
use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;

pub const CHECKPOINT_FORMAT: &str = "cavity-array-dmrg-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub lattice: LatticeSpec,
    pub n_pol: u32,
    pub params: DmrgParams,
    /// Size of the left block at which the sweep stopped.
    pub position: usize,
    pub sweep_energies: Vec<f64>,
    pub sweep_discarded: Vec<f64>,
    pub left: Vec<Option<Block>>,
    pub right: Vec<Option<Block>>,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_vec(self)?)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let data = fs::read(path)?;
        let cp: Self = serde_json::from_slice(&data)?;
        if cp.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint(format!("unknown format {:?}", cp.format)));
        }
        if cp.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {}", cp.version)));
        }
        Ok(cp)
    }

    /// Checks that the snapshot belongs to the given problem.
    pub fn matches(&self, lattice: &LatticeSpec, n_pol: u32) -> Result<()> {
        if &self.lattice != lattice || self.n_pol != n_pol {
            return Err(Error::Checkpoint("checkpoint was written for a different problem".into()));
        }
        let l = lattice.length();
        if self.left.len() != l + 1 || self.right.len() != l + 1 || self.position + 2 > l {
            return Err(Error::Checkpoint("checkpoint block tables are inconsistent".into()));
        }
        if self.left[self.position].is_none() || self.right[l - 2 - self.position].is_none() {
            return Err(Error::Checkpoint("checkpoint is missing the blocks at its position".into()));
        }
        Ok(())
    }
}
