//! Ground-state results shared by the exact and DMRG solvers.

use std::sync::Arc;

use crate::dmrg::{DmrgReport, Mps};
use crate::error::{Error, Result};
use crate::lattice::{vector_photon_correlations, vector_site_excitations, SectorBasis};

/// How the ground state is held for later measurements.
#[derive(Clone, Debug)]
pub enum GroundState {
    /// Amplitudes over an enumerated sector (exact diagonalization).
    Vector { sector: Arc<SectorBasis>, amplitudes: Vec<f64> },
    /// Matrix product state assembled from the DMRG block transformations.
    Mps(Mps),
    /// Only the energy was kept.
    Unmeasured,
}

#[derive(Clone, Debug)]
pub struct GroundStateResult {
    pub energy: f64,
    pub residual_norm: f64,
    /// Matrix-vector products (exact diagonalization) or completed sweeps (DMRG).
    pub iterations: usize,
    pub converged: bool,
    pub state: GroundState,
    pub dmrg: Option<DmrgReport>,
}

impl GroundStateResult {
    /// Hermitian `L x L` matrix `<a_j^dag a_l>`.
    pub fn photon_correlations(&self) -> Result<Vec<Vec<f64>>> {
        photon_correlations(self)
    }

    /// Expected local excitation number on every site.
    pub fn site_excitations(&self) -> Result<Vec<f64>> {
        match &self.state {
            GroundState::Vector { sector, amplitudes } => Ok(vector_site_excitations(sector, amplitudes)),
            GroundState::Mps(mps) => Ok(mps.site_excitations()),
            GroundState::Unmeasured => Err(Error::MeasurementDisabled),
        }
    }
}

pub fn photon_correlations(state: &GroundStateResult) -> Result<Vec<Vec<f64>>> {
    match &state.state {
        GroundState::Vector { sector, amplitudes } => Ok(vector_photon_correlations(sector, amplitudes)),
        GroundState::Mps(mps) => Ok(mps.photon_correlations()),
        GroundState::Unmeasured => Err(Error::MeasurementDisabled),
    }
}
