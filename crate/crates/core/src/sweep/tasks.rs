//! One chain ground state on the backend the run asks for.

use std::sync::Arc;

use crate::dmrg::dmrg_ground_state;
use crate::error::{Error, Result};
use crate::ground::{GroundState, GroundStateResult};
use crate::lanczos::{lowest_eigenpair, LanczosOptions};
use crate::lattice::{assemble_hamiltonian_capped, enumerate_sector, sector_dimension, LatticeSpec};

use super::config::{Backend, RunConfig};

/// A solved chain problem and the backend that produced it.
#[derive(Clone, Debug)]
pub struct ChainSolution {
    pub backend: Backend,
    pub result: GroundStateResult,
    /// Diagnostics for the record's `flags` column.
    pub flags: Vec<String>,
}

impl ChainSolution {
    pub fn flags(&self) -> String {
        self.flags.join(";")
    }

    pub fn discarded(&self) -> Option<f64> {
        self.result.dmrg.as_ref().map(|r| r.final_discarded())
    }
}

/// Exact diagonalization is chosen when the sparse Hamiltonian is expected
/// to stay below the capacity guard. A chain row holds at most one diagonal
/// entry, local off-diagonals and two hops per bond, bounded by `2L + 3`.
pub fn resolve_backend(config: &RunConfig, lattice: &LatticeSpec, n_pol: u32) -> Result<Backend> {
    Ok(match config.backend {
        Backend::Auto => {
            let dim = sector_dimension(lattice, n_pol)?;
            let per_row = 2 * lattice.length() as u128 + 3;
            if dim.saturating_mul(per_row) <= config.solver.max_nonzeros as u128 {
                Backend::Ed
            } else {
                Backend::Dmrg
            }
        }
        b => b,
    })
}

fn solve_ed(config: &RunConfig, lattice: &LatticeSpec, n_pol: u32, measure: bool) -> Result<GroundStateResult> {
    let sector = Arc::new(enumerate_sector(lattice, n_pol)?);
    let h = assemble_hamiltonian_capped(lattice, &sector, 0.0, config.solver.max_nonzeros)?;
    let opts = LanczosOptions { tol: config.solver.lanczos_tol, seed: config.seed, ..Default::default() };
    let pair = lowest_eigenpair(&h, None, &opts)?;
    let state = if measure {
        GroundState::Vector { sector, amplitudes: pair.vector }
    } else {
        GroundState::Unmeasured
    };
    Ok(GroundStateResult {
        energy: pair.value,
        residual_norm: pair.residual,
        iterations: pair.matvecs,
        converged: true,
        state,
        dmrg: None,
    })
}

fn solve_dmrg(
    config: &RunConfig,
    lattice: &LatticeSpec,
    n_pol: u32,
    measure: bool,
    key: &str,
) -> Result<GroundStateResult> {
    let mut params = config.dmrg.clone();
    params.measure = measure;
    if let Some(dir) = &config.checkpoint_dir {
        std::fs::create_dir_all(dir)?;
        params.checkpoint = Some(dir.join(format!("{key}.json")));
        params.resume = true;
    }
    dmrg_ground_state(lattice, n_pol, &params)
}

/// File-name-safe identifier of one chain problem.
pub fn task_key(lattice: &LatticeSpec, n_pol: u32) -> String {
    format!("L{}_t{:.6e}_n{}", lattice.length(), lattice.hopping, n_pol)
}

/// Solves one sector. `index` is the task's position in the sweep; every
/// `cross_check.every`-th task is repeated on the other backend and a
/// disagreement beyond the tolerance is an error.
pub fn solve_chain(
    config: &RunConfig,
    lattice: &LatticeSpec,
    n_pol: u32,
    measure: bool,
    index: usize,
) -> Result<ChainSolution> {
    let backend = resolve_backend(config, lattice, n_pol)?;
    let key = task_key(lattice, n_pol);
    log::info!("{key}: solving with {backend}");
    let result = match backend {
        Backend::Ed => solve_ed(config, lattice, n_pol, measure)?,
        _ => solve_dmrg(config, lattice, n_pol, measure, &key)?,
    };
    let mut flags = Vec::new();
    if let Some(report) = &result.dmrg {
        if !report.converged {
            flags.push("not_converged".to_string());
        }
        if report.final_discarded() > config.dmrg.truncation_weight_cap {
            flags.push("truncation".to_string());
        }
    }

    let every = config.cross_check.every;
    if every > 0 && index % every == 0 {
        let other = match backend {
            Backend::Ed => {
                let mut params = config.dmrg.clone();
                params.measure = false;
                dmrg_ground_state(lattice, n_pol, &params).map(Some)?
            }
            _ => match solve_ed(config, lattice, n_pol, false) {
                Err(Error::CapacityExceeded { .. }) => None,
                other => other.map(Some)?,
            },
        };
        match other {
            Some(other) => {
                let scale = result.energy.abs().max(1.0);
                let diff = (result.energy - other.energy).abs() / scale;
                if diff > config.cross_check.tolerance {
                    return Err(Error::CrossCheck { key, primary: result.energy, other: other.energy });
                }
                flags.push("cross_checked".to_string());
            }
            None => flags.push("cross_check_infeasible".to_string()),
        }
    }
    Ok(ChainSolution { backend, result, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::site::ModelSpec;
    use approx::assert_relative_eq;

    fn lattice(l: usize) -> LatticeSpec {
        LatticeSpec::uniform(ModelSpec::model_i_resonant(1).with_cutoff(4), l, 0.05)
    }

    #[test]
    fn auto_prefers_exact_for_small_sectors() {
        let mut c = RunConfig::default();
        assert_eq!(resolve_backend(&c, &lattice(4), 4).unwrap(), Backend::Ed);
        c.solver.max_nonzeros = 10;
        assert_eq!(resolve_backend(&c, &lattice(4), 4).unwrap(), Backend::Dmrg);
        c.backend = Backend::Ed;
        assert_eq!(resolve_backend(&c, &lattice(4), 4).unwrap(), Backend::Ed);
    }

    #[test]
    fn cross_check_agrees_on_short_chains() {
        let mut c = RunConfig::default();
        c.cross_check.every = 1;
        let ed = solve_chain(&c, &lattice(4), 4, true, 0).unwrap();
        assert_eq!(ed.backend, Backend::Ed);
        assert!(ed.flags.contains(&"cross_checked".to_string()));
        c.backend = Backend::Dmrg;
        let dm = solve_chain(&c, &lattice(4), 4, true, 0).unwrap();
        assert_relative_eq!(ed.result.energy, dm.result.energy, max_relative = 1e-6);
    }
}
