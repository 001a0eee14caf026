//! Two-site DMRG for open chains with conserved total excitation number.
//!
//! The chain is grown in an infinite-system warmup (left and right blocks
//! with excitation targets proportional to their length) and then swept
//! back and forth at fixed length. Each sweep starts and ends at the middle
//! of the chain; the energy there is the sweep energy. Ground-state guesses
//! are carried from step to step through the stored block transformations.

mod block;
mod checkpoint;
mod mps;
mod superblock;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use block::Block;
pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use mps::Mps;

use crate::error::{Error, Result};
use crate::ground::{GroundState, GroundStateResult};
use crate::lanczos::{lowest_eigenpair, LanczosOptions};
use crate::lattice::LatticeSpec;
use block::{renormalize, Enlarged, LocalSite};
use superblock::{predict_left, predict_right, truncate, Side, Superblock};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DmrgParams {
    /// States kept per block during sweeps.
    pub kept_states: usize,
    /// States kept per block while the chain is grown.
    pub warmup_states: usize,
    /// Upper bound on full sweeps.
    pub sweeps: usize,
    pub min_sweeps: usize,
    /// Sweep-to-sweep energy change, relative to `max(|E|, 1)`.
    pub energy_tolerance: f64,
    /// Largest discarded weight of the last sweep for a run to count as converged.
    pub truncation_weight_cap: f64,
    /// Lanczos residual tolerance at the chain centre, where sweep energies
    /// are recorded.
    pub lanczos_tol: f64,
    /// Looser tolerance for the other sweep steps.
    pub step_lanczos_tol: f64,
    pub measure: bool,
    pub seed: u64,
    /// Snapshot written after every sweep.
    pub checkpoint: Option<PathBuf>,
    /// Continue from the snapshot at `checkpoint` if it exists.
    pub resume: bool,
}

impl Default for DmrgParams {
    fn default() -> Self {
        Self {
            kept_states: 64,
            warmup_states: 64,
            sweeps: 6,
            min_sweeps: 2,
            energy_tolerance: 1e-8,
            truncation_weight_cap: 1e-5,
            lanczos_tol: 1e-7,
            step_lanczos_tol: 1e-5,
            measure: true,
            seed: 0x5eed_1a2c,
            checkpoint: None,
            resume: false,
        }
    }
}

impl DmrgParams {
    /// Sets both the sweep and the warmup truncation.
    pub fn with_kept_states(mut self, m: usize) -> Self {
        self.kept_states = m;
        self.warmup_states = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kept_states < 8 || self.warmup_states < 8 {
            return Err(Error::InvalidSpec("kept_states and warmup_states must be at least 8".into()));
        }
        if self.min_sweeps < 2 || self.sweeps < self.min_sweeps {
            return Err(Error::InvalidSpec("need 2 <= min_sweeps <= sweeps".into()));
        }
        if !(self.energy_tolerance > 0.0 && self.lanczos_tol > 0.0 && self.step_lanczos_tol > 0.0) {
            return Err(Error::InvalidSpec("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DmrgReport {
    /// Energy at the chain centre after each completed sweep.
    pub sweep_energies: Vec<f64>,
    /// Largest discarded density-matrix weight of each sweep.
    pub sweep_discarded: Vec<f64>,
    pub converged: bool,
    /// Largest number of block states actually kept.
    pub max_kept: usize,
    pub lanczos_residual: f64,
}

impl DmrgReport {
    pub fn final_discarded(&self) -> f64 {
        self.sweep_discarded.last().copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Direction {
    Right,
    Left,
}

struct Step {
    /// Sites in the left block.
    position: usize,
    left: Enlarged,
    right: Enlarged,
    psi: Vec<f64>,
    energy: f64,
    residual: f64,
}

struct Engine<'a> {
    lattice: &'a LatticeSpec,
    n_pol: u32,
    params: &'a DmrgParams,
    sites: Vec<LocalSite>,
    left: Vec<Option<Block>>,
    right: Vec<Option<Block>>,
    max_kept: usize,
    /// Left block size at which sweeps start and end.
    centre: usize,
}

impl<'a> Engine<'a> {
    fn new(lattice: &'a LatticeSpec, n_pol: u32, params: &'a DmrgParams) -> Result<Self> {
        let l = lattice.length();
        let sites = lattice.sites.iter().map(LocalSite::new).collect::<Result<Vec<_>>>()?;
        let mut left = vec![None; l + 1];
        let mut right = vec![None; l + 1];
        left[0] = Some(Block::empty());
        right[0] = Some(Block::empty());
        Ok(Self { lattice, n_pol, params, sites, left, right, max_kept: 0, centre: (l - 1) / 2 })
    }

    fn len(&self) -> usize {
        self.sites.len()
    }

    fn opts(&self, position: usize) -> LanczosOptions {
        let tol = if position == self.centre {
            self.params.lanczos_tol
        } else {
            self.params.step_lanczos_tol.max(self.params.lanczos_tol)
        };
        LanczosOptions { tol, max_krylov: 80, seed: self.params.seed, ..Default::default() }
    }

    fn enlarge(&self, left_size: usize, right_size: usize) -> (Enlarged, Enlarged) {
        let t = self.lattice.hopping;
        let lb = self.left[left_size].as_ref().expect("left block available");
        let rb = self.right[right_size].as_ref().expect("right block available");
        let l = self.len();
        (Enlarged::new(lb, &self.sites[left_size], t), Enlarged::new(rb, &self.sites[l - 1 - right_size], t))
    }

    fn solve(
        &self,
        position: usize,
        left: Enlarged,
        right: Enlarged,
        target: u32,
        guess: Option<Vec<f64>>,
    ) -> Result<Step> {
        let pair = {
            let sb = Superblock::new(&left, &right, self.lattice.hopping, target);
            if sb.blocks.is_empty() {
                return Err(Error::Infeasible(format!(
                    "no superblock states with {target} excitations at position {position}"
                )));
            }
            lowest_eigenpair(&sb, guess.as_deref(), &self.opts(position))?
        };
        Ok(Step { position, left, right, psi: pair.vector, energy: pair.value, residual: pair.residual })
    }

    /// New block of `sites` sites from one side of the superblock.
    fn decimate(&self, step: &Step, side: Side, target: u32, sites: usize, m: usize) -> (Block, f64, usize) {
        let sb = Superblock::new(&step.left, &step.right, self.lattice.hopping, target);
        let tr = truncate(&sb, &step.psi, side, m);
        let block = match side {
            Side::Left => renormalize(&step.left, tr.kept, sites),
            Side::Right => renormalize(&step.right, tr.kept, sites),
        };
        (block, tr.discarded_weight, tr.kept_states)
    }

    /// Infinite-system growth up to the full length.
    fn warmup(&mut self) -> Result<Step> {
        let len = self.len();
        let (mut l, mut r) = (0usize, 0usize);
        loop {
            let size = l + r + 2;
            let target = if size == len {
                self.n_pol
            } else {
                let cap: u32 = self.lattice.sites[..=l].iter().chain(&self.lattice.sites[len - 1 - r..])
                    .map(|s| s.max_excitation())
                    .sum();
                let share = (self.n_pol as f64 * size as f64 / len as f64).round() as u32;
                share.min(cap)
            };
            let (el, er) = self.enlarge(l, r);
            let step = self.solve(l, el, er, target, None)?;
            log::debug!("warmup size {size}: E = {:.12}", step.energy);
            if size == len {
                return Ok(step);
            }
            let (lb, _, kept) = self.decimate(&step, Side::Left, target, l + 1, self.params.warmup_states);
            self.max_kept = self.max_kept.max(kept);
            self.left[l + 1] = Some(lb);
            if l + r + 4 <= len {
                let (rb, _, kept) = self.decimate(&step, Side::Right, target, r + 1, self.params.warmup_states);
                self.max_kept = self.max_kept.max(kept);
                self.right[r + 1] = Some(rb);
                r += 1;
            }
            l += 1;
        }
    }

    fn move_right(&mut self, step: Step) -> Result<(Step, f64)> {
        let len = self.len();
        let p = step.position;
        let r = len - 2 - p;
        let (new_left, discarded, kept) = self.decimate(&step, Side::Left, self.n_pol, p + 1, self.params.kept_states);
        self.max_kept = self.max_kept.max(kept);
        self.left[p + 1] = Some(new_left);
        let (el, er) = self.enlarge(p + 1, r - 1);
        let guess = {
            let old = Superblock::new(&step.left, &step.right, self.lattice.hopping, self.n_pol);
            let new = Superblock::new(&el, &er, self.lattice.hopping, self.n_pol);
            predict_right(
                &old,
                &step.psi,
                self.left[p + 1].as_ref().expect("just stored"),
                self.right[r].as_ref().expect("right block available"),
                &new,
            )
        };
        Ok((self.solve(p + 1, el, er, self.n_pol, Some(guess))?, discarded))
    }

    fn move_left(&mut self, step: Step) -> Result<(Step, f64)> {
        let len = self.len();
        let p = step.position;
        let r = len - 2 - p;
        let (new_right, discarded, kept) = self.decimate(&step, Side::Right, self.n_pol, r + 1, self.params.kept_states);
        self.max_kept = self.max_kept.max(kept);
        self.right[r + 1] = Some(new_right);
        let (el, er) = self.enlarge(p - 1, r + 1);
        let guess = {
            let old = Superblock::new(&step.left, &step.right, self.lattice.hopping, self.n_pol);
            let new = Superblock::new(&el, &er, self.lattice.hopping, self.n_pol);
            predict_left(
                &old,
                &step.psi,
                self.right[r + 1].as_ref().expect("just stored"),
                self.left[p].as_ref().expect("left block available"),
                &new,
            )
        };
        Ok((self.solve(p - 1, el, er, self.n_pol, Some(guess))?, discarded))
    }

    /// One full sweep from the centre to the right end, to the left end and
    /// back. Returns the final step and the largest discarded weight.
    fn sweep(&mut self, mut step: Step) -> Result<(Step, f64)> {
        let len = self.len();
        let centre = step.position;
        let mut dir = Direction::Right;
        let mut max_discarded = 0.0f64;
        let mut turned = 0;
        loop {
            if turned == 2 && step.position == centre {
                return Ok((step, max_discarded));
            }
            match dir {
                Direction::Right if step.position + 2 == len => {
                    dir = Direction::Left;
                    turned += 1;
                }
                Direction::Left if step.position == 0 => {
                    dir = Direction::Right;
                    turned += 1;
                }
                Direction::Right => {
                    let (next, w) = self.move_right(step)?;
                    max_discarded = max_discarded.max(w);
                    step = next;
                }
                Direction::Left => {
                    let (next, w) = self.move_left(step)?;
                    max_discarded = max_discarded.max(w);
                    step = next;
                }
            }
        }
    }

    fn checkpoint(&self, position: usize, report: &DmrgReport) -> Checkpoint {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            lattice: self.lattice.clone(),
            n_pol: self.n_pol,
            params: self.params.clone(),
            position,
            sweep_energies: report.sweep_energies.clone(),
            sweep_discarded: report.sweep_discarded.clone(),
            left: self.left.clone(),
            right: self.right.clone(),
        }
    }

    fn into_result(self, step: Step, report: DmrgReport) -> GroundStateResult {
        let state = if self.params.measure {
            let sb = Superblock::new(&step.left, &step.right, self.lattice.hopping, self.n_pol);
            GroundState::Mps(Mps::from_superblock(
                &self.sites,
                &self.left,
                &self.right,
                step.position,
                &sb,
                &step.psi,
                2 * self.params.kept_states,
            ))
        } else {
            GroundState::Unmeasured
        };
        GroundStateResult {
            energy: step.energy,
            residual_norm: step.residual,
            iterations: report.sweep_energies.len(),
            converged: report.converged,
            state,
            dmrg: Some(report),
        }
    }
}

/// Ground state of `lattice` with `n_pol` total excitations.
///
/// A result whose sweep energies did not settle within `sweeps` is
/// returned with `converged = false`; callers decide whether that is fatal.
pub fn dmrg_ground_state(lattice: &LatticeSpec, n_pol: u32, params: &DmrgParams) -> Result<GroundStateResult> {
    lattice.validate()?;
    params.validate()?;
    if n_pol > lattice.capacity() {
        return Err(Error::EmptySector(n_pol as i64));
    }
    let len = lattice.length();
    let mut engine = Engine::new(lattice, n_pol, params)?;
    let mut report = DmrgReport::default();

    let resumed = match (&params.checkpoint, params.resume) {
        (Some(path), true) if path.exists() => {
            let cp = Checkpoint::load(path)?;
            cp.matches(lattice, n_pol)?;
            engine.left = cp.left;
            engine.right = cp.right;
            report.sweep_energies = cp.sweep_energies;
            report.sweep_discarded = cp.sweep_discarded;
            let (el, er) = engine.enlarge(cp.position, len - 2 - cp.position);
            log::info!("resuming after {} sweeps", report.sweep_energies.len());
            Some(engine.solve(cp.position, el, er, n_pol, None)?)
        }
        _ => None,
    };
    let mut step = match resumed {
        Some(step) => step,
        None => engine.warmup()?,
    };

    if len == 2 {
        // the superblock is the whole chain: exact
        report.sweep_energies.push(step.energy);
        report.sweep_discarded.push(0.0);
        report.converged = true;
        report.lanczos_residual = step.residual;
        return Ok(engine.into_result(step, report));
    }

    while report.sweep_energies.len() < params.sweeps {
        let (next, discarded) = engine.sweep(step)?;
        step = next;
        let energy = step.energy;
        let change = report.sweep_energies.last().map(|&e| (e - energy).abs());
        report.sweep_energies.push(energy);
        report.sweep_discarded.push(discarded);
        log::info!(
            "sweep {}: E = {energy:.12}, discarded weight {discarded:.3e}",
            report.sweep_energies.len()
        );
        if discarded > params.truncation_weight_cap {
            log::warn!("discarded weight {discarded:.3e} exceeds {:.1e}", params.truncation_weight_cap);
        }
        if let Some(path) = &params.checkpoint {
            engine.checkpoint(step.position, &report).save(path)?;
        }
        if report.sweep_energies.len() >= params.min_sweeps
            && change.is_some_and(|c| c <= params.energy_tolerance * energy.abs().max(1.0))
            && discarded <= params.truncation_weight_cap
        {
            report.converged = true;
            break;
        }
    }
    if !report.converged {
        log::warn!("DMRG energy not converged after {} sweeps", report.sweep_energies.len());
    }
    report.max_kept = engine.max_kept;
    report.lanczos_residual = step.residual;
    Ok(engine.into_result(step, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::solve_sector;
    use crate::site::{site_ground_energy, ModelSpec};
    use approx::assert_relative_eq;

    fn chain(l: usize, t: f64) -> LatticeSpec {
        LatticeSpec::uniform(ModelSpec::model_i_resonant(1).with_cutoff(4), l, t)
    }

    #[test]
    fn matches_exact_diagonalization_on_short_chains() {
        for &t in &[0.0, 0.05, 0.1] {
            for n in [3, 4, 5] {
                let lat = chain(4, t);
                let exact = solve_sector(&lat, n, 1e-12).unwrap().energy;
                let res = dmrg_ground_state(&lat, n, &DmrgParams::default()).unwrap();
                assert!(res.converged);
                assert_relative_eq!(res.energy, exact, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn decoupled_unit_filling_is_additive() {
        let lat = chain(6, 0.0);
        let e1 = site_ground_energy(&lat.sites[0], 1).unwrap();
        let res = dmrg_ground_state(&lat, 6, &DmrgParams::default()).unwrap();
        assert_relative_eq!(res.energy, 6.0 * e1, max_relative = 1e-9);
    }

    #[test]
    fn correlations_match_exact_vector() {
        let lat = chain(5, 0.08);
        let exact = solve_sector(&lat, 6, 1e-12).unwrap();
        let res = dmrg_ground_state(&lat, 6, &DmrgParams::default()).unwrap();
        let a = exact.photon_correlations().unwrap();
        let b = res.photon_correlations().unwrap();
        for j in 0..5 {
            for k in 0..5 {
                assert!((a[j][k] - b[j][k]).abs() < 1e-5, "{j} {k}: {} vs {}", a[j][k], b[j][k]);
            }
        }
        let occ: f64 = res.site_excitations().unwrap().iter().sum();
        assert_relative_eq!(occ, 6.0, max_relative = 1e-8);
    }

    #[test]
    fn two_and_three_site_chains() {
        for l in [2, 3] {
            let lat = chain(l, 0.2);
            let exact = solve_sector(&lat, l as u32, 1e-12).unwrap().energy;
            let res = dmrg_ground_state(&lat, l as u32, &DmrgParams::default()).unwrap();
            assert_relative_eq!(res.energy, exact, max_relative = 1e-9);
        }
    }

    #[test]
    fn resumes_from_checkpoint() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        let lat = chain(6, 0.1);
        let mut params = DmrgParams { checkpoint: Some(path.clone()), sweeps: 2, ..Default::default() };
        let first = dmrg_ground_state(&lat, 6, &params).unwrap();
        assert!(path.exists());
        params.resume = true;
        params.sweeps = 4;
        let second = dmrg_ground_state(&lat, 6, &params).unwrap();
        let report = second.dmrg.unwrap();
        assert!(report.sweep_energies.len() > 2);
        assert_eq!(report.sweep_energies[..2], first.dmrg.unwrap().sweep_energies[..]);
        assert!(second.energy <= first.energy + 1e-9);
    }
}
