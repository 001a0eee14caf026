//! Exact diagonalization of the coupled-cavity chain in a fixed sector of
//! total excitation number.
//!
//! The chain Hamiltonian is
//!
//! ```text
//! H = sum_i H_i - t sum_<ij> (a_i^dag a_j + a_j^dag a_i) - mu sum_i n_i
//! ```
//!
//! with open boundaries. Sector states are tuples of local basis indices,
//! enumerated lexicographically and ranked through a combinatorial table so
//! that lookups never need a hash map.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground::{GroundState, GroundStateResult};
use crate::lanczos::{lowest_eigenpair, LanczosOptions};
use crate::site::{sector_states, LocalHamiltonian, ModelKind, ModelSpec, SiteBasis};
use crate::sparse::Csr;

/// Default refusal threshold for assembled sector Hamiltonians.
pub const DEFAULT_MAX_NONZEROS: usize = 20_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub sites: Vec<ModelSpec>,
    pub hopping: f64,
}

impl LatticeSpec {
    pub fn uniform(spec: ModelSpec, length: usize, hopping: f64) -> Self {
        Self { sites: vec![spec; length], hopping }
    }

    pub fn length(&self) -> usize {
        self.sites.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites.len() < 2 {
            return Err(Error::InvalidSpec("chain length must be at least 2".into()));
        }
        if !(self.hopping.is_finite() && self.hopping >= 0.0) {
            return Err(Error::InvalidSpec("hopping must be finite and non-negative".into()));
        }
        let kind = self.sites[0].kind();
        for s in &self.sites {
            s.validate()?;
            if s.kind() != kind {
                return Err(Error::InvalidSpec("all sites must use the same model".into()));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> ModelKind {
        self.sites[0].kind()
    }

    /// Same chain with the site order reversed.
    pub fn reversed(&self) -> Self {
        Self { sites: self.sites.iter().rev().copied().collect(), hopping: self.hopping }
    }

    /// Largest total excitation the chain can hold.
    pub fn capacity(&self) -> u32 {
        self.sites.iter().map(ModelSpec::max_excitation).sum()
    }
}

/// Per-site operator tables in column form.
#[derive(Clone, Debug)]
pub(crate) struct SiteTables {
    pub basis: SiteBasis,
    /// Nonzero entries of column `s` of the local Hamiltonian.
    pub ham_cols: Vec<Vec<(usize, f64)>>,
    /// `a |s> = amp |s'>`, if nonzero.
    pub lower: Vec<Option<(usize, f64)>>,
    pub raise: Vec<Option<(usize, f64)>>,
}

impl SiteTables {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        let basis = SiteBasis::build(spec)?;
        let h = LocalHamiltonian::build(&basis).to_dense();
        let d = basis.len();
        let ham_cols = (0..d)
            .map(|j| (0..d).filter(|&i| h[(i, j)] != 0.0).map(|i| (i, h[(i, j)])).collect())
            .collect();
        let a = crate::site::local_photon_operator(&basis);
        let ad = crate::site::local_photon_creation(&basis);
        let mut lower = vec![None; d];
        let mut raise = vec![None; d];
        for (i, j, v) in a.triplets() {
            lower[j] = Some((i, v));
        }
        for (i, j, v) in ad.triplets() {
            raise[j] = Some((i, v));
        }
        Ok(Self { basis, ham_cols, lower, raise })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Enumerated lattice states with a fixed total excitation number.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    pub total_excitations: u32,
    length: usize,
    configs: Vec<u16>,
    pub(crate) sites: Vec<Arc<SiteTables>>,
    /// `rank_offset[i][r][s]`: number of configurations that precede local
    /// state `s` at site `i` when `r` excitations remain for sites `i..`.
    rank_offset: Vec<Vec<Vec<usize>>>,
}

impl SectorBasis {
    pub fn len(&self) -> usize {
        self.configs.len() / self.length.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// Local basis indices of state `k`.
    pub fn config(&self, k: usize) -> &[u16] {
        &self.configs[k * self.length..(k + 1) * self.length]
    }

    pub fn site_basis(&self, i: usize) -> &SiteBasis {
        &self.sites[i].basis
    }

    pub fn index_of(&self, config: &[u16]) -> Option<usize> {
        if config.len() != self.length {
            return None;
        }
        let mut r = self.total_excitations as i64;
        let mut rank = 0usize;
        for (i, &s) in config.iter().enumerate() {
            let s = s as usize;
            if s >= self.sites[i].dim() {
                return None;
            }
            let row = self.rank_offset[i].get(r as usize)?;
            rank += row[s];
            r -= self.sites[i].basis.excitation(s) as i64;
            if r < 0 {
                return None;
            }
        }
        (r == 0).then_some(rank)
    }
}

fn site_tables(lattice: &LatticeSpec) -> Result<Vec<Arc<SiteTables>>> {
    let mut out: Vec<Arc<SiteTables>> = Vec::with_capacity(lattice.length());
    for spec in &lattice.sites {
        match out.iter().find(|t| t.basis.spec == *spec) {
            Some(t) => out.push(Arc::clone(t)),
            None => out.push(Arc::new(SiteTables::new(spec)?)),
        }
    }
    Ok(out)
}

/// Number of chain configurations with `n_pol` excitations, without
/// enumerating them. Saturates instead of overflowing.
pub fn sector_dimension(lattice: &LatticeSpec, n_pol: u32) -> Result<u128> {
    lattice.validate()?;
    let n = n_pol as usize;
    let mut count = vec![0u128; n + 1];
    count[0] = 1;
    for spec in &lattice.sites {
        let local: Vec<u128> = (0..=n as u32).map(|q| sector_states(spec, q).len() as u128).collect();
        let mut next = vec![0u128; n + 1];
        for (r, slot) in next.iter_mut().enumerate() {
            for e in 0..=r {
                *slot = slot.saturating_add(local[e].saturating_mul(count[r - e]));
            }
        }
        count = next;
    }
    Ok(count[n])
}

/// All chain configurations carrying exactly `n_pol` excitations.
pub fn enumerate_sector(lattice: &LatticeSpec, n_pol: u32) -> Result<SectorBasis> {
    lattice.validate()?;
    let sites = site_tables(lattice)?;
    let l = sites.len();
    let n = n_pol as usize;

    // count[i][r]: completions of sites i.. with r excitations
    let mut count = vec![vec![0usize; n + 1]; l + 1];
    count[l][0] = 1;
    for i in (0..l).rev() {
        for r in 0..=n {
            count[i][r] = (0..sites[i].dim())
                .map(|s| sites[i].basis.excitation(s) as usize)
                .filter(|&e| e <= r)
                .map(|e| count[i + 1][r - e])
                .sum();
        }
    }
    let dim = count[0][n];
    if dim == 0 {
        return Err(Error::EmptySector(n_pol as i64));
    }

    let rank_offset: Vec<Vec<Vec<usize>>> = (0..l)
        .map(|i| {
            (0..=n)
                .map(|r| {
                    let mut acc = 0usize;
                    (0..sites[i].dim())
                        .map(|s| {
                            let here = acc;
                            let e = sites[i].basis.excitation(s) as usize;
                            if e <= r {
                                acc += count[i + 1][r - e];
                            }
                            here
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut configs = Vec::with_capacity(dim * l);
    let mut current = vec![0u16; l];
    fn fill(
        i: usize,
        r: usize,
        sites: &[Arc<SiteTables>],
        count: &[Vec<usize>],
        current: &mut Vec<u16>,
        out: &mut Vec<u16>,
    ) {
        if i == sites.len() {
            if r == 0 {
                out.extend_from_slice(current);
            }
            return;
        }
        for s in 0..sites[i].dim() {
            let e = sites[i].basis.excitation(s) as usize;
            if e > r {
                break;
            }
            if count[i + 1][r - e] == 0 {
                continue;
            }
            current[i] = s as u16;
            fill(i + 1, r - e, sites, count, current, out);
        }
    }
    fill(0, n, &sites, &count, &mut current, &mut configs);
    debug_assert_eq!(configs.len(), dim * l);

    Ok(SectorBasis { total_excitations: n_pol, length: l, configs, sites, rank_offset })
}

/// Sparse sector Hamiltonian, refusing to exceed `max_nonzeros`.
pub fn assemble_hamiltonian_capped(
    lattice: &LatticeSpec,
    sector: &SectorBasis,
    mu: f64,
    max_nonzeros: usize,
) -> Result<Csr> {
    lattice.validate()?;
    if sector.is_empty() {
        return Err(Error::EmptySector(sector.total_excitations as i64));
    }
    let l = sector.length();
    let t = lattice.hopping;
    let shift = -mu * sector.total_excitations as f64;
    let mut rows = Vec::with_capacity(sector.len());
    let mut nnz = 0usize;
    let mut scratch = vec![0u16; l];

    for k in 0..sector.len() {
        let config = sector.config(k);
        let mut row: Vec<(usize, f64)> = vec![(k, shift)];
        for i in 0..l {
            let tables = &sector.sites[i];
            let s = config[i] as usize;
            for &(s2, v) in &tables.ham_cols[s] {
                if s2 == s {
                    row[0].1 += v;
                } else {
                    scratch.copy_from_slice(config);
                    scratch[i] = s2 as u16;
                    let target = sector.index_of(&scratch).expect("local terms conserve the sector");
                    row.push((target, v));
                }
            }
        }
        if t != 0.0 {
            for i in 0..l.saturating_sub(1) {
                for (from, to) in [(i + 1, i), (i, i + 1)] {
                    // a^dag_to a_from
                    let Some((sf, af)) = sector.sites[from].lower[config[from] as usize] else { continue };
                    let Some((st, at)) = sector.sites[to].raise[config[to] as usize] else { continue };
                    scratch.copy_from_slice(config);
                    scratch[from] = sf as u16;
                    scratch[to] = st as u16;
                    let target = sector.index_of(&scratch).expect("hopping conserves the sector");
                    row.push((target, -t * af * at));
                }
            }
        }
        row.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
        for (c, v) in row {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|e| e.1 != 0.0 || e.0 == k);
        nnz += merged.len();
        if nnz > max_nonzeros {
            return Err(Error::CapacityExceeded { nonzeros: nnz, limit: max_nonzeros });
        }
        rows.push(merged);
    }
    Ok(Csr::from_sorted_rows(sector.len(), rows))
}

pub fn assemble_hamiltonian(lattice: &LatticeSpec, sector: &SectorBasis, mu: f64) -> Result<Csr> {
    assemble_hamiltonian_capped(lattice, sector, mu, DEFAULT_MAX_NONZEROS)
}

/// Lowest eigenpair of an assembled sector Hamiltonian.
pub fn ground_state(matrix: &Csr, tol: f64) -> Result<GroundStateResult> {
    let opts = LanczosOptions { tol, ..Default::default() };
    let pair = lowest_eigenpair(matrix, None, &opts)?;
    Ok(GroundStateResult {
        energy: pair.value,
        residual_norm: pair.residual,
        iterations: pair.matvecs,
        converged: true,
        state: GroundState::Unmeasured,
        dmrg: None,
    })
}

/// Enumerate, assemble and solve one (lattice, sector) problem, keeping the
/// ground vector for measurements.
pub fn solve_sector(lattice: &LatticeSpec, n_pol: u32, tol: f64) -> Result<GroundStateResult> {
    let sector = Arc::new(enumerate_sector(lattice, n_pol)?);
    let h = assemble_hamiltonian(lattice, &sector, 0.0)?;
    let opts = LanczosOptions { tol, ..Default::default() };
    let pair = lowest_eigenpair(&h, None, &opts)?;
    Ok(GroundStateResult {
        energy: pair.value,
        residual_norm: pair.residual,
        iterations: pair.matvecs,
        converged: true,
        state: GroundState::Vector { sector, amplitudes: pair.vector },
        dmrg: None,
    })
}

/// `<a_j^dag a_l>` for a state expanded in a sector basis.
pub fn vector_photon_correlations(sector: &SectorBasis, psi: &[f64]) -> Vec<Vec<f64>> {
    let l = sector.length();
    let mut corr = vec![vec![0.0; l]; l];
    let mut scratch = vec![0u16; l];
    for (k, &amp) in psi.iter().enumerate() {
        if amp == 0.0 {
            continue;
        }
        let config = sector.config(k);
        for j in 0..l {
            let photons = sector.site_basis(j).state(config[j] as usize).photons as f64;
            corr[j][j] += amp * amp * photons;
        }
        for from in 0..l {
            let Some((sf, af)) = sector.sites[from].lower[config[from] as usize] else { continue };
            for to in 0..l {
                if to == from {
                    continue;
                }
                let Some((st, at)) = sector.sites[to].raise[config[to] as usize] else { continue };
                scratch.copy_from_slice(config);
                scratch[from] = sf as u16;
                scratch[to] = st as u16;
                if let Some(target) = sector.index_of(&scratch) {
                    // <psi| a_to^dag a_from |psi>
                    corr[to][from] += psi[target] * amp * af * at;
                }
            }
        }
    }
    corr
}

/// Per-site expectation of the local excitation number.
pub fn vector_site_excitations(sector: &SectorBasis, psi: &[f64]) -> Vec<f64> {
    let l = sector.length();
    let mut out = vec![0.0; l];
    for (k, &amp) in psi.iter().enumerate() {
        let config = sector.config(k);
        for (i, o) in out.iter_mut().enumerate() {
            *o += amp * amp * sector.site_basis(i).excitation(config[i] as usize) as f64;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::site::site_ground_energy;
    use approx::assert_abs_diff_eq;

    fn chain(n_atoms: u32, cutoff: u32, length: usize, t: f64) -> LatticeSpec {
        LatticeSpec::uniform(ModelSpec::model_i(n_atoms, 1.0, 1.0, 1.0, cutoff), length, t)
    }

    #[test]
    fn single_excitation_two_sites() {
        let sector = enumerate_sector(&chain(1, 1, 2, 0.1), 1).unwrap();
        assert_eq!(sector.len(), 4);
        assert_eq!(enumerate_sector(&chain(1, 1, 2, 0.1), 0).unwrap().len(), 1);
    }

    #[test]
    fn sector_count_matches_product_space_filter() {
        let lattice = chain(1, 2, 3, 0.0);
        let sector = enumerate_sector(&lattice, 2).unwrap();
        let b = sector.site_basis(0).clone();
        let d = b.len();
        let mut brute = 0;
        for x in 0..d {
            for y in 0..d {
                for z in 0..d {
                    if b.excitation(x) + b.excitation(y) + b.excitation(z) == 2 {
                        brute += 1;
                        let idx = sector.index_of(&[x as u16, y as u16, z as u16]).unwrap();
                        assert_eq!(sector.config(idx), &[x as u16, y as u16, z as u16]);
                    }
                }
            }
        }
        assert_eq!(sector.len(), brute);
        assert_eq!(sector_dimension(&lattice, 2).unwrap(), brute as u128);
    }

    #[test]
    fn overfull_sector_is_rejected() {
        let lattice = chain(1, 1, 2, 0.0);
        assert!(matches!(enumerate_sector(&lattice, 5), Err(Error::EmptySector(5))));
    }

    #[test]
    fn photon_hop_element() {
        let lattice = chain(1, 1, 2, 0.25);
        let sector = enumerate_sector(&lattice, 1).unwrap();
        let h = assemble_hamiltonian(&lattice, &sector, 0.0).unwrap();
        let b = sector.site_basis(0);
        let vac = 0u16;
        let photon = b.states().iter().position(|s| s.photons == 1).unwrap() as u16;
        let left = sector.index_of(&[photon, vac]).unwrap();
        let right = sector.index_of(&[vac, photon]).unwrap();
        assert_abs_diff_eq!(h.get(left, right), -0.25);
        assert_eq!(h.nrows(), 4);
        assert!(h.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn chemical_potential_is_a_sector_constant() {
        let lattice = chain(1, 3, 3, 0.2);
        let sector = enumerate_sector(&lattice, 3).unwrap();
        let e0 = ground_state(&assemble_hamiltonian(&lattice, &sector, 0.0).unwrap(), 1e-10).unwrap().energy;
        let e1 = ground_state(&assemble_hamiltonian(&lattice, &sector, 0.37).unwrap(), 1e-10).unwrap().energy;
        assert_abs_diff_eq!(e1 - e0, -0.37 * 3.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_hopping_splits_into_site_energies() {
        let spec = ModelSpec::model_i(1, 1.0, 1.0, 1.0, 4);
        let lattice = LatticeSpec::uniform(spec, 2, 0.0);
        for n in 0..=5u32 {
            let e = solve_sector(&lattice, n, 1e-11).unwrap().energy;
            let best = (0..=n)
                .map(|k| site_ground_energy(&spec, k).unwrap() + site_ground_energy(&spec, n - k).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert_abs_diff_eq!(e, best, epsilon = 1e-10);
        }
    }

    #[test]
    fn capacity_guard_refuses_large_sectors() {
        let lattice = chain(1, 4, 6, 0.1);
        let sector = enumerate_sector(&lattice, 6).unwrap();
        let err = assemble_hamiltonian_capped(&lattice, &sector, 0.0, 100).unwrap_err();
        assert!(matches!(err, Error::CapacityExceeded { limit: 100, .. }));
    }

    #[test]
    fn toy_correlator() {
        // (|1 photon, vac> + |vac, 1 photon>)/sqrt(2)
        let lattice = chain(1, 1, 2, 0.0);
        let sector = enumerate_sector(&lattice, 1).unwrap();
        let b = sector.site_basis(0);
        let photon = b.states().iter().position(|s| s.photons == 1).unwrap() as u16;
        let mut psi = vec![0.0; sector.len()];
        psi[sector.index_of(&[photon, 0]).unwrap()] = 0.5f64.sqrt();
        psi[sector.index_of(&[0, photon]).unwrap()] = 0.5f64.sqrt();
        let c = vector_photon_correlations(&sector, &psi);
        assert_abs_diff_eq!(c[0][1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c[1][0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c[0][0], 0.5, epsilon = 1e-15);
    }
}
