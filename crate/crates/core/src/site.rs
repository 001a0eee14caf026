//! Single-cavity models: local bases, Hamiltonians and photon operators.
//!
//! Two light-matter models are supported. Model I is a Tavis-Cummings cavity:
//! `N` two-level atoms collectively coupled to the cavity mode,
//!
//! ```text
//! H = eps (S^z + N/2) + omega a^dag a + beta (S^+ a + S^- a^dag)
//! ```
//!
//! represented in the maximal-spin multiplet `S = N/2`, where a state is
//! `(photons, m)` with `m` collectively excited atoms. Model II is the
//! four-level scheme
//!
//! ```text
//! H = delta S33 + Delta S44 + Omega (S23 + S32)
//!   + g (S13 a^dag + S31 a) + g (S24 a^dag + S42 a)
//! ```
//!
//! written in the interaction picture (no bare photon energy), represented in
//! the totally symmetric atomic subspace labelled by level occupations
//! `(n1, n2, n3, n4)` with `n1 + n2 + n3 + n4 = N`.
//!
//! Both models conserve the local excitation number, so every Hamiltonian is
//! stored as dense blocks over excitation sectors.

use std::cmp::Ordering;

use log::warn;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lanczos::{lowest_eigenpair, LanczosOptions};
use crate::sparse::Csr;

/// Default photon cutoff for Model I.
pub const MODEL_I_DEFAULT_CUTOFF: u32 = 6;
/// Default photon cutoff for Model II.
pub const MODEL_II_DEFAULT_CUTOFF: u32 = 4;

/// Sector blocks at or above this dimension are solved iteratively.
const DENSE_SECTOR_LIMIT: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    ModelI,
    ModelII,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model")]
pub enum Couplings {
    /// Tavis-Cummings couplings. `epsilon` is the atomic transition energy,
    /// `omega` the cavity frequency and `beta` the atom-field coupling.
    #[serde(rename = "I")]
    ModelI { epsilon: f64, omega: f64, beta: f64 },
    /// Four-level couplings: detunings `delta` (level 3) and `big_delta`
    /// (level 4), Rabi frequency `rabi` of the classical drive and cavity
    /// coupling `g` (taken equal on both cavity transitions).
    #[serde(rename = "II")]
    ModelII { delta: f64, big_delta: f64, rabi: f64, g: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub atoms: u32,
    pub photon_cutoff: u32,
    pub couplings: Couplings,
}

impl ModelSpec {
    pub fn model_i(atoms: u32, epsilon: f64, omega: f64, beta: f64, photon_cutoff: u32) -> Self {
        Self { atoms, photon_cutoff, couplings: Couplings::ModelI { epsilon, omega, beta } }
    }

    /// Model I at resonance with `eps = omega = 1` and `beta = 1`.
    pub fn model_i_resonant(atoms: u32) -> Self {
        Self::model_i(atoms, 1.0, 1.0, 1.0, MODEL_I_DEFAULT_CUTOFF)
    }

    pub fn model_ii(atoms: u32, delta: f64, big_delta: f64, rabi: f64, g: f64, photon_cutoff: u32) -> Self {
        Self { atoms, photon_cutoff, couplings: Couplings::ModelII { delta, big_delta, rabi, g } }
    }

    /// Model II with zero detunings and `g = Omega = 1`.
    pub fn model_ii_resonant(atoms: u32) -> Self {
        Self::model_ii(atoms, 0.0, 0.0, 1.0, 1.0, MODEL_II_DEFAULT_CUTOFF)
    }

    pub fn kind(&self) -> ModelKind {
        match self.couplings {
            Couplings::ModelI { .. } => ModelKind::ModelI,
            Couplings::ModelII { .. } => ModelKind::ModelII,
        }
    }

    pub fn with_atoms(mut self, atoms: u32) -> Self {
        self.atoms = atoms;
        self
    }

    pub fn with_cutoff(mut self, photon_cutoff: u32) -> Self {
        self.photon_cutoff = photon_cutoff;
        self
    }

    /// Detuning `omega - eps` (Model I) or `Delta - delta` (Model II).
    pub fn detuning(&self) -> f64 {
        match self.couplings {
            Couplings::ModelI { epsilon, omega, .. } => omega - epsilon,
            Couplings::ModelII { delta, big_delta, .. } => big_delta - delta,
        }
    }

    /// The coupling that sets the energy unit: `beta` for Model I, `Omega`
    /// for Model II (falling back to `g` when the drive is off).
    pub fn energy_unit(&self) -> f64 {
        match self.couplings {
            Couplings::ModelI { beta, .. } => beta,
            Couplings::ModelII { rabi, g, .. } => {
                if rabi > 0.0 {
                    rabi
                } else if g > 0.0 {
                    g
                } else {
                    1.0
                }
            }
        }
    }

    pub fn unit_name(&self) -> &'static str {
        match self.couplings {
            Couplings::ModelI { .. } => "beta",
            Couplings::ModelII { rabi, g, .. } => {
                if rabi > 0.0 {
                    "Omega"
                } else if g > 0.0 {
                    "g"
                } else {
                    "1"
                }
            }
        }
    }

    /// Same model with every energy divided by [`Self::energy_unit`].
    pub fn in_coupling_units(&self) -> Self {
        let u = self.energy_unit();
        let couplings = match self.couplings {
            Couplings::ModelI { epsilon, omega, beta } => {
                Couplings::ModelI { epsilon: epsilon / u, omega: omega / u, beta: beta / u }
            }
            Couplings::ModelII { delta, big_delta, rabi, g } => Couplings::ModelII {
                delta: delta / u,
                big_delta: big_delta / u,
                rabi: rabi / u,
                g: g / u,
            },
        };
        Self { couplings, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms == 0 {
            return Err(Error::InvalidSpec("atom number must be at least 1".into()));
        }
        if self.photon_cutoff == 0 {
            return Err(Error::InvalidSpec("photon cutoff must be at least 1".into()));
        }
        let finite = |x: f64, name: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{name} must be finite")))
            }
        };
        match self.couplings {
            Couplings::ModelI { epsilon, omega, beta } => {
                finite(epsilon, "epsilon")?;
                finite(omega, "omega")?;
                finite(beta, "beta")?;
                if beta <= 0.0 {
                    return Err(Error::InvalidSpec("beta must be positive".into()));
                }
            }
            Couplings::ModelII { delta, big_delta, rabi, g } => {
                finite(delta, "delta")?;
                finite(big_delta, "Delta")?;
                finite(rabi, "Omega")?;
                finite(g, "g")?;
                if rabi < 0.0 || g < 0.0 {
                    return Err(Error::InvalidSpec("Omega and g must be non-negative".into()));
                }
            }
        }
        Ok(())
    }

    /// Largest excitation number representable with the photon cutoff.
    pub fn max_excitation(&self) -> u32 {
        match self.kind() {
            ModelKind::ModelI => self.photon_cutoff + self.atoms,
            ModelKind::ModelII => self.photon_cutoff + 2 * self.atoms,
        }
    }

    /// True when sector `q` would contain more states with a larger cutoff.
    pub fn sector_touches_cutoff(&self, q: u32) -> bool {
        q > self.photon_cutoff && q - self.photon_cutoff - 1 <= self.max_excitation() - self.photon_cutoff
    }
}

/// Atomic part of a local state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Atomic {
    /// Maximal-spin multiplet with `m` excited atoms.
    Spin { m: u32 },
    /// Occupations of the four atomic levels.
    Levels([u32; 4]),
}

impl Atomic {
    pub fn excitation(&self) -> u32 {
        match *self {
            Atomic::Spin { m } => m,
            Atomic::Levels([_, n2, n3, n4]) => n2 + n3 + 2 * n4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteState {
    pub photons: u32,
    pub atomic: Atomic,
}

impl SiteState {
    pub fn excitation(&self) -> u32 {
        self.photons + self.atomic.excitation()
    }
}

impl Ord for SiteState {
    fn cmp(&self, other: &Self) -> Ordering {
        self.excitation()
            .cmp(&other.excitation())
            .then(self.photons.cmp(&other.photons))
            .then(self.atomic.cmp(&other.atomic))
    }
}

impl PartialOrd for SiteState {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Atomic labels of Model II with `r` atomic excitations, lexicographic.
fn levels_with_excitation(atoms: u32, r: u32) -> Vec<[u32; 4]> {
    let mut out = Vec::new();
    for n4 in 0..=r / 2 {
        let s = r - 2 * n4;
        for n2 in 0..=s {
            let n3 = s - n2;
            let used = n2 + n3 + n4;
            if used <= atoms {
                out.push([atoms - used, n2, n3, n4]);
            }
        }
    }
    out.sort();
    out
}

/// States of excitation sector `q`, ascending in photon number and then in
/// atomic label.
pub fn sector_states(spec: &ModelSpec, q: u32) -> Vec<SiteState> {
    let mut states = Vec::new();
    for photons in 0..=q.min(spec.photon_cutoff) {
        let r = q - photons;
        match spec.kind() {
            ModelKind::ModelI => {
                if r <= spec.atoms {
                    states.push(SiteState { photons, atomic: Atomic::Spin { m: r } });
                }
            }
            ModelKind::ModelII => {
                for levels in levels_with_excitation(spec.atoms, r) {
                    states.push(SiteState { photons, atomic: Atomic::Levels(levels) });
                }
            }
        }
    }
    states
}

/// The enumerated local Hilbert space of one cavity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteBasis {
    pub spec: ModelSpec,
    states: Vec<SiteState>,
    /// `sector_offsets[q]..sector_offsets[q + 1]` indexes sector `q`.
    sector_offsets: Vec<usize>,
}

impl SiteBasis {
    pub fn build(spec: &ModelSpec) -> Result<Self> {
        spec.validate()?;
        let mut states = Vec::new();
        let mut sector_offsets = vec![0];
        for q in 0..=spec.max_excitation() {
            states.extend(sector_states(spec, q));
            sector_offsets.push(states.len());
        }
        Ok(Self { spec: *spec, states, sector_offsets })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[SiteState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> SiteState {
        self.states[i]
    }

    pub fn excitation(&self, i: usize) -> u32 {
        self.states[i].excitation()
    }

    pub fn max_excitation(&self) -> u32 {
        (self.sector_offsets.len() - 2) as u32
    }

    pub fn sector_range(&self, q: u32) -> std::ops::Range<usize> {
        let q = q as usize;
        if q + 1 >= self.sector_offsets.len() {
            return self.states.len()..self.states.len();
        }
        self.sector_offsets[q]..self.sector_offsets[q + 1]
    }

    pub fn index_of(&self, state: &SiteState) -> Option<usize> {
        self.states.binary_search(state).ok()
    }
}

/// Off-diagonal and diagonal action of the local Hamiltonian on one state.
fn hamiltonian_action(spec: &ModelSpec, s: &SiteState) -> Vec<(SiteState, f64)> {
    let n = spec.atoms as f64;
    let p = s.photons;
    let pf = p as f64;
    let cutoff = spec.photon_cutoff;
    let mut out = Vec::new();
    match (spec.couplings, s.atomic) {
        (Couplings::ModelI { epsilon, omega, beta }, Atomic::Spin { m }) => {
            let mf = m as f64;
            // eps (S^z + N/2) counts excited atoms
            out.push((*s, epsilon * mf + omega * pf));
            if m < spec.atoms && p > 0 {
                let amp = beta * ((n - mf) * (mf + 1.0)).sqrt() * pf.sqrt();
                out.push((SiteState { photons: p - 1, atomic: Atomic::Spin { m: m + 1 } }, amp));
            }
            if m > 0 && p < cutoff {
                let amp = beta * (mf * (n - mf + 1.0)).sqrt() * (pf + 1.0).sqrt();
                out.push((SiteState { photons: p + 1, atomic: Atomic::Spin { m: m - 1 } }, amp));
            }
        }
        (Couplings::ModelII { delta, big_delta, rabi, g }, Atomic::Levels(lv)) => {
            let [n1, n2, n3, n4] = lv.map(|x| x as f64);
            out.push((*s, delta * n3 + big_delta * n4));
            let with = |levels: [u32; 4], photons: u32| SiteState { photons, atomic: Atomic::Levels(levels) };
            // Omega (S23 + S32)
            if lv[2] > 0 {
                out.push((with([lv[0], lv[1] + 1, lv[2] - 1, lv[3]], p), rabi * (n3 * (n2 + 1.0)).sqrt()));
            }
            if lv[1] > 0 {
                out.push((with([lv[0], lv[1] - 1, lv[2] + 1, lv[3]], p), rabi * (n2 * (n3 + 1.0)).sqrt()));
            }
            // g (S13 a^dag + S31 a)
            if lv[2] > 0 && p < cutoff {
                let amp = g * (n3 * (n1 + 1.0)).sqrt() * (pf + 1.0).sqrt();
                out.push((with([lv[0] + 1, lv[1], lv[2] - 1, lv[3]], p + 1), amp));
            }
            if lv[0] > 0 && p > 0 {
                let amp = g * (n1 * (n3 + 1.0)).sqrt() * pf.sqrt();
                out.push((with([lv[0] - 1, lv[1], lv[2] + 1, lv[3]], p - 1), amp));
            }
            // g (S24 a^dag + S42 a)
            if lv[3] > 0 && p < cutoff {
                let amp = g * (n4 * (n2 + 1.0)).sqrt() * (pf + 1.0).sqrt();
                out.push((with([lv[0], lv[1] + 1, lv[2], lv[3] - 1], p + 1), amp));
            }
            if lv[1] > 0 && p > 0 {
                let amp = g * (n2 * (n4 + 1.0)).sqrt() * pf.sqrt();
                out.push((with([lv[0], lv[1] - 1, lv[2], lv[3] + 1], p - 1), amp));
            }
        }
        _ => unreachable!("atomic label does not match the model kind"),
    }
    out
}

/// Dense block of the local Hamiltonian over `states` (one excitation sector).
pub fn sector_block(spec: &ModelSpec, states: &[SiteState]) -> DMatrix<f64> {
    let d = states.len();
    let mut h = DMatrix::zeros(d, d);
    for (j, s) in states.iter().enumerate() {
        for (target, amp) in hamiltonian_action(spec, s) {
            let i = states.binary_search(&target).expect("Hamiltonian conserves the excitation number");
            h[(i, j)] += amp;
        }
    }
    h
}

#[derive(Clone, Debug)]
pub struct SectorBlock {
    pub excitation: u32,
    pub offset: usize,
    pub matrix: DMatrix<f64>,
}

/// The local Hamiltonian as dense blocks over excitation sectors.
#[derive(Clone, Debug)]
pub struct LocalHamiltonian {
    dim: usize,
    pub sectors: Vec<SectorBlock>,
}

impl LocalHamiltonian {
    pub fn build(basis: &SiteBasis) -> Self {
        let sectors = (0..=basis.max_excitation())
            .map(|q| {
                let range = basis.sector_range(q);
                SectorBlock {
                    excitation: q,
                    offset: range.start,
                    matrix: sector_block(&basis.spec, &basis.states()[range]),
                }
            })
            .collect();
        Self { dim: basis.len(), sectors }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for b in &self.sectors {
            let d = b.matrix.nrows();
            m.view_mut((b.offset, b.offset), (d, d)).copy_from(&b.matrix);
        }
        m
    }

    pub fn block(&self, q: u32) -> Option<&SectorBlock> {
        self.sectors.get(q as usize)
    }
}

/// Photon annihilation operator in the local basis.
pub fn local_photon_operator(basis: &SiteBasis) -> Csr {
    let mut triplets = Vec::new();
    for (j, s) in basis.states().iter().enumerate() {
        if s.photons > 0 {
            let lowered = SiteState { photons: s.photons - 1, ..*s };
            let i = basis.index_of(&lowered).expect("lowered state lies inside the cutoff");
            triplets.push((i, j, (s.photons as f64).sqrt()));
        }
    }
    Csr::from_triplets(basis.len(), basis.len(), triplets)
}

/// Photon creation operator, stored as its own matrix.
pub fn local_photon_creation(basis: &SiteBasis) -> Csr {
    let mut triplets = Vec::new();
    for (j, s) in basis.states().iter().enumerate() {
        if s.photons < basis.spec.photon_cutoff {
            let raised = SiteState { photons: s.photons + 1, ..*s };
            if let Some(i) = basis.index_of(&raised) {
                triplets.push((i, j, (s.photons as f64 + 1.0).sqrt()));
            }
        }
    }
    Csr::from_triplets(basis.len(), basis.len(), triplets)
}

/// Diagonal excitation-number operator.
pub fn excitation_operator(basis: &SiteBasis) -> Csr {
    let t = (0..basis.len()).map(|i| (i, i, basis.excitation(i) as f64)).collect();
    Csr::from_triplets(basis.len(), basis.len(), t)
}

/// Lowest eigenpair of one local sector.
#[derive(Clone, Debug)]
pub struct SectorGround {
    pub energy: f64,
    pub vector: DVector<f64>,
    pub states: Vec<SiteState>,
    /// Gap to the next eigenvalue in the same sector, when it exists.
    pub gap: Option<f64>,
}

pub fn sector_ground(spec: &ModelSpec, q: u32) -> Result<SectorGround> {
    spec.validate()?;
    let states = sector_states(spec, q);
    if states.is_empty() {
        return Err(Error::EmptySector(q as i64));
    }
    let h = sector_block(spec, &states);
    if states.len() < DENSE_SECTOR_LIMIT {
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..states.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let energy = eig.eigenvalues[order[0]];
        let gap = order.get(1).map(|&k| eig.eigenvalues[k] - energy);
        let vector = eig.eigenvectors.column(order[0]).into_owned();
        Ok(SectorGround { energy, vector, states, gap })
    } else {
        let csr = Csr::from_triplets(
            states.len(),
            states.len(),
            h.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(k, v)| (k % states.len(), k / states.len(), *v)).collect(),
        );
        let opts = LanczosOptions { tol: 1e-12, ..Default::default() };
        let pair = lowest_eigenpair(&csr, None, &opts)?;
        Ok(SectorGround { energy: pair.value, vector: DVector::from_vec(pair.vector), states, gap: None })
    }
}

/// Sector energy together with the outcome of the cutoff check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectorEnergy {
    pub energy: f64,
    /// Change of the energy when the photon cutoff is doubled (0 when the
    /// sector cannot feel the cutoff).
    pub cutoff_shift: f64,
}

impl SectorEnergy {
    pub fn cutoff_converged(&self) -> bool {
        self.cutoff_shift.abs() < 1e-10
    }
}

/// Lowest energy of sector `q`, with the photon-cutoff sensitivity check.
pub fn site_ground_energy_checked(spec: &ModelSpec, q: u32) -> Result<SectorEnergy> {
    let energy = sector_ground(spec, q)?.energy;
    let cutoff_shift = if spec.sector_touches_cutoff(q) {
        let wider = spec.with_cutoff(2 * spec.photon_cutoff);
        sector_ground(&wider, q)?.energy - energy
    } else {
        0.0
    };
    let out = SectorEnergy { energy, cutoff_shift };
    if !out.cutoff_converged() {
        warn!("sector {q}: energy shifts by {cutoff_shift:e} when the photon cutoff is doubled");
    }
    Ok(out)
}

/// Lowest energy `E(q)` of the local Hamiltonian with `q` excitations.
pub fn site_ground_energy(spec: &ModelSpec, q: u32) -> Result<f64> {
    Ok(site_ground_energy_checked(spec, q)?.energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn model_i(n: u32, cutoff: u32) -> ModelSpec {
        ModelSpec::model_i(n, 1.0, 1.0, 1.0, cutoff)
    }

    #[test]
    fn model_i_basis_order() {
        let b = SiteBasis::build(&model_i(1, 2)).unwrap();
        let labels: Vec<(u32, u32)> = b
            .states()
            .iter()
            .map(|s| match s.atomic {
                Atomic::Spin { m } => (s.photons, m),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(labels, vec![(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1)]);
    }

    #[test]
    fn model_ii_atomic_label_counts() {
        for (n, count) in [(1u32, 4usize), (2, 10), (3, 20)] {
            let b = SiteBasis::build(&ModelSpec::model_ii_resonant(n).with_cutoff(3)).unwrap();
            let zero_photon = b.states().iter().filter(|s| s.photons == 0).count();
            assert_eq!(zero_photon, count);
            assert_eq!(b.len(), count * 4);
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(SiteBasis::build(&model_i(0, 2)).is_err());
        assert!(SiteBasis::build(&model_i(1, 0)).is_err());
        assert!(SiteBasis::build(&ModelSpec::model_i(1, 1.0, 1.0, 0.0, 2)).is_err());
        assert!(SiteBasis::build(&ModelSpec::model_ii(1, 0.0, 0.0, -1.0, 1.0, 2)).is_err());
    }

    #[test]
    fn resonant_single_atom_sector_one_block() {
        let spec = ModelSpec::model_i(1, 0.8, 0.8, 0.3, 3);
        let b = SiteBasis::build(&spec).unwrap();
        let h = LocalHamiltonian::build(&b);
        let block = &h.block(1).unwrap().matrix;
        // basis {(0,1), (1,0)}
        assert_abs_diff_eq!(block[(0, 0)], 0.8);
        assert_abs_diff_eq!(block[(1, 1)], 0.8);
        assert_abs_diff_eq!(block[(0, 1)], 0.3);
        assert_abs_diff_eq!(block[(1, 0)], 0.3);
    }

    #[test]
    fn collective_coupling_scales_with_sqrt_n() {
        let h = LocalHamiltonian::build(&SiteBasis::build(&model_i(3, 2)).unwrap());
        let block = &h.block(1).unwrap().matrix;
        assert_abs_diff_eq!(block[(0, 1)], 3f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn model_ii_single_excitation_sector() {
        let spec = ModelSpec::model_ii(1, 0.0, 0.0, 0.7, 0.4, 2);
        let states = sector_states(&spec, 1);
        // (0; 0,0,1,0), (0; 0,1,0,0), (1; 1,0,0,0)
        let expected = vec![
            SiteState { photons: 0, atomic: Atomic::Levels([0, 0, 1, 0]) },
            SiteState { photons: 0, atomic: Atomic::Levels([0, 1, 0, 0]) },
            SiteState { photons: 1, atomic: Atomic::Levels([1, 0, 0, 0]) },
        ];
        assert_eq!(states, expected);
        let h = sector_block(&spec, &states);
        let want = DMatrix::from_row_slice(3, 3, &[0.0, 0.7, 0.4, 0.7, 0.0, 0.0, 0.4, 0.0, 0.0]);
        assert_abs_diff_eq!(h, want, epsilon = 1e-15);
    }

    #[test]
    fn photon_operator_elements() {
        let b = SiteBasis::build(&model_i(2, 3)).unwrap();
        let a = local_photon_operator(&b);
        let idx = |p, m| b.index_of(&SiteState { photons: p, atomic: Atomic::Spin { m } }).unwrap();
        assert_abs_diff_eq!(a.get(idx(0, 1), idx(1, 1)), 1.0);
        assert_abs_diff_eq!(a.get(idx(1, 2), idx(2, 2)), 2f64.sqrt());
        assert_eq!(a.row(idx(0, 0)).count(), 1);
        assert_eq!(a.transpose(), local_photon_creation(&b));
    }

    #[test]
    fn closed_form_sector_energies() {
        for n in 1..=20u32 {
            let spec = ModelSpec::model_i(n, 1.3, 1.3, 0.9, 6);
            let e1 = site_ground_energy(&spec, 1).unwrap();
            let e2 = site_ground_energy(&spec, 2).unwrap();
            let nf = n as f64;
            assert_abs_diff_eq!(e1, 1.3 - 0.9 * nf.sqrt(), epsilon = 1e-10);
            assert_abs_diff_eq!(e2, 2.6 - 0.9 * (4.0 * nf - 2.0).sqrt(), epsilon = 1e-10);
            assert_eq!(site_ground_energy(&spec, 0).unwrap(), 0.0);
        }
    }

    #[test]
    fn cutoff_check_flags_truncated_sectors() {
        let spec = model_i(1, 1);
        let report = site_ground_energy_checked(&spec, 2).unwrap();
        assert!(!report.cutoff_converged());
        let exact = site_ground_energy_checked(&model_i(1, 6), 2).unwrap();
        assert!(exact.cutoff_converged());
    }

    #[test]
    fn empty_sector_is_an_error() {
        let spec = model_i(1, 2);
        assert!(matches!(sector_ground(&spec, 4), Err(Error::EmptySector(4))));
    }
}
