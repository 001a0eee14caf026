//! Run configuration, read from TOML. Every section and key is optional;
//! missing keys take the defaults below, and the fully resolved config is
//! written next to every result table.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dmrg::DmrgParams;
use crate::effective::{DetuningQuantity, CRITICAL_RATIO, CROSSOVER_FACTOR};
use crate::error::{Error, Result};
use crate::glass::{LITERATURE_WINDOW, REFERENCE_EPSILON};
use crate::lattice::DEFAULT_MAX_NONZEROS;
use crate::site::ModelSpec;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Ed,
    Dmrg,
    #[default]
    Auto,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ed" => Ok(Self::Ed),
            "dmrg" => Ok(Self::Dmrg),
            "auto" => Ok(Self::Auto),
            other => Err(Error::Config(format!("unknown backend {other:?} (expected ed, dmrg or auto)"))),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Ed => "ed",
            Self::Dmrg => "dmrg",
            Self::Auto => "auto",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Lanczos residual tolerance of exact diagonalization.
    pub lanczos_tol: f64,
    /// Largest sparse Hamiltonian exact diagonalization may assemble.
    pub max_nonzeros: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { lanczos_tol: 1e-10, max_nonzeros: DEFAULT_MAX_NONZEROS }
    }
}

/// One chain problem, for the `ed` and `dmrg` commands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SingleConfig {
    pub length: usize,
    /// Defaults to one excitation per site.
    pub n_pol: Option<u32>,
    pub hopping: f64,
    pub correlations: bool,
}

impl Default for SingleConfig {
    fn default() -> Self {
        Self { length: 4, n_pol: None, hopping: 0.1, correlations: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SiteConfig {
    /// Sectors `0..=max_sector` are reported.
    pub max_sector: u32,
    /// Lobes `1..=lobes` for `U_eff` and `w`.
    pub lobes: u32,
}

impl Default for SiteConfig {
    fn default() -> Self {
        Self { max_sector: 4, lobes: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseConfig {
    pub hoppings: Vec<f64>,
    /// Lobe densities `rho`.
    pub densities: Vec<u32>,
    pub lengths: Vec<usize>,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self { hoppings: vec![0.0, 0.05, 0.1], densities: vec![1], lengths: vec![8, 12, 16] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VisibilityConfig {
    pub hoppings: Vec<f64>,
    pub lengths: Vec<usize>,
    pub density: u32,
    /// Hoppings at which the full `S(k)` is written.
    pub spectrum_at: Vec<f64>,
}

impl Default for VisibilityConfig {
    fn default() -> Self {
        Self { hoppings: vec![0.01, 0.1, 0.2], lengths: vec![8, 12], density: 1, spectrum_at: vec![0.01, 0.2] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TStarConfig {
    /// Atom numbers; the model's own atom number is replaced by each.
    pub atoms: Vec<u32>,
    pub ratio: f64,
}

impl Default for TStarConfig {
    fn default() -> Self {
        Self { atoms: (1..=100).collect(), ratio: CRITICAL_RATIO }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetuningConfig {
    pub detunings: Vec<f64>,
    pub quantity: DetuningQuantity,
    /// Lobes compared; defaults to `2N` (Model I) or `4N` (Model II).
    pub lobes: Option<u32>,
    /// Atom numbers of the crossover-detuning scan (empty to skip).
    pub crossover_atoms: Vec<u32>,
    pub crossover_factor: f64,
    pub crossover_step: f64,
    pub crossover_max: f64,
}

impl Default for DetuningConfig {
    fn default() -> Self {
        Self {
            detunings: (0..=20).map(|i| i as f64 * 0.5).collect(),
            quantity: DetuningQuantity::LobeWidths,
            lobes: None,
            crossover_atoms: Vec::new(),
            crossover_factor: CROSSOVER_FACTOR,
            crossover_step: 0.25,
            crossover_max: 200.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlassConfig {
    pub means: Vec<f64>,
    /// Spreads `dN = mean * max_ratio * i / (points - 1)` for `i < points`.
    pub spread_points: usize,
    pub spread_max_ratio: f64,
    pub samples: usize,
    pub epsilon: f64,
    pub window: (f64, f64),
    /// Ensemble used for the window report: mean atom number.
    pub window_mean: f64,
    /// Its spread; defaults to the `epsilon` crossing of the `window_mean` curve.
    pub window_spread: Option<f64>,
    /// `(mean, spread)` of the per-cavity trace, if wanted.
    pub trace: Option<(f64, f64)>,
}

impl Default for GlassConfig {
    fn default() -> Self {
        Self {
            means: vec![1.0, 10.0, 100.0, 1000.0],
            spread_points: 201,
            spread_max_ratio: 2.0,
            samples: 10_000,
            epsilon: REFERENCE_EPSILON,
            window: LITERATURE_WINDOW,
            window_mean: 100.0,
            window_spread: None,
            trace: Some((100.0, 20.0)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossCheckConfig {
    /// Re-run every `every`-th energy on the other backend (0 disables).
    pub every: usize,
    /// Allowed relative energy difference.
    pub tolerance: f64,
}

impl Default for CrossCheckConfig {
    fn default() -> Self {
        Self { every: 0, tolerance: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub backend: Backend,
    pub seed: u64,
    pub workers: usize,
    pub out: PathBuf,
    /// Unconverged results make the run fail.
    pub strict: bool,
    /// Unix time written into every record; the current time when absent.
    pub timestamp: Option<u64>,
    /// Per-task DMRG checkpoints, resumed when present.
    pub checkpoint_dir: Option<PathBuf>,
    pub solver: SolverConfig,
    pub dmrg: DmrgParams,
    pub cross_check: CrossCheckConfig,
    pub single: SingleConfig,
    pub site: SiteConfig,
    pub phase: PhaseConfig,
    pub visibility: VisibilityConfig,
    pub tstar: TStarConfig,
    pub detuning: DetuningConfig,
    pub glass: GlassConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::model_i_resonant(1),
            backend: Backend::Auto,
            seed: 2024,
            workers: 1,
            out: PathBuf::from("out"),
            strict: false,
            timestamp: None,
            checkpoint_dir: None,
            solver: SolverConfig::default(),
            dmrg: DmrgParams::default(),
            cross_check: CrossCheckConfig::default(),
            single: SingleConfig::default(),
            site: SiteConfig::default(),
            phase: PhaseConfig::default(),
            visibility: VisibilityConfig::default(),
            tstar: TStarConfig::default(),
            detuning: DetuningConfig::default(),
            glass: GlassConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        self.model.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.dmrg.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        let all_hoppings = self.phase.hoppings.iter().chain(&self.visibility.hoppings).chain([&self.single.hopping]);
        for t in all_hoppings {
            if !(t.is_finite() && *t >= 0.0) {
                return bad("hoppings must be finite and non-negative");
            }
        }
        if self.phase.lengths.iter().chain(&self.visibility.lengths).any(|&l| l < 2) || self.single.length < 2 {
            return bad("chain lengths must be at least 2");
        }
        if self.phase.densities.contains(&0) || self.visibility.density == 0 {
            return bad("lobe densities start at 1");
        }
        if self.tstar.atoms.contains(&0) || self.detuning.crossover_atoms.contains(&0) {
            return bad("atom numbers must be at least 1");
        }
        if self.glass.spread_points < 2 || self.glass.samples == 0 {
            return bad("glass sweeps need at least two spreads and one sample");
        }
        if !(self.solver.lanczos_tol > 0.0 && self.cross_check.tolerance > 0.0) {
            return bad("tolerances must be positive");
        }
        Ok(())
    }

    /// Atom-number spreads of the glass curve for `mean`.
    pub fn glass_spreads(&self, mean: f64) -> Vec<f64> {
        let n = self.glass.spread_points;
        (0..n).map(|i| mean * self.glass.spread_max_ratio * i as f64 / (n - 1) as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        let text = c.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn partial_files_fill_in_defaults() {
        let c = RunConfig::from_toml(
            r#"
            backend = "dmrg"
            [model]
            atoms = 2
            photon_cutoff = 6
            couplings = { model = "I", epsilon = 1.0, omega = 1.0, beta = 1.0 }
            [phase]
            lengths = [16, 24]
            "#,
        )
        .unwrap();
        assert_eq!(c.backend, Backend::Dmrg);
        assert_eq!(c.model.atoms, 2);
        assert_eq!(c.phase.lengths, vec![16, 24]);
        assert_eq!(c.phase.densities, vec![1]);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        assert!(matches!(RunConfig::from_toml("bogus = 1"), Err(Error::Config(_))));
        let mut c = RunConfig::default();
        c.phase.lengths = vec![1];
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }
}
