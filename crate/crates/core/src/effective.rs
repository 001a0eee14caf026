//! Mapping of one cavity onto an effective Bose-Hubbard site: on-site
//! interaction `U_eff(n)`, hopping weights `w(n)`, the critical-hopping
//! estimate built from them, first-order lobe boundaries and detuning scans.
//!
//! Sector energies are computed with the photon cutoff raised to at least
//! `n + 1`, which makes every sector that enters exactly representable.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::site::{sector_ground, Couplings, ModelKind, ModelSpec, SectorGround};

/// Critical ratio `t_eff / U_eff` of the one-dimensional Bose-Hubbard model
/// at unit filling.
pub const CRITICAL_RATIO: f64 = 0.3;
/// Default dominance factor of the detuning crossover.
pub const CROSSOVER_FACTOR: f64 = 2.0;
/// Sector gaps below this make the ground state ambiguous.
pub const DEGENERACY_TOLERANCE: f64 = 1e-10;

fn containing(spec: &ModelSpec, top: u32) -> ModelSpec {
    spec.with_cutoff(spec.photon_cutoff.max(top))
}

/// `U_eff(n) = E(n+1) - 2E(n) + E(n-1)` of a single cavity, `n >= 1`.
pub fn u_eff(spec: &ModelSpec, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::MissingSector(0));
    }
    let s = containing(spec, n + 1);
    let e = |q| sector_ground(&s, q).map(|g| g.energy);
    Ok(e(n + 1)? - 2.0 * e(n)? + e(n - 1)?)
}

/// Closed form of `U_eff(1)` for Model I on resonance, in units of `beta`.
pub fn u_eff_resonant_closed_form(atoms: u32) -> f64 {
    let n = atoms as f64;
    2.0 * n.sqrt() * (1.0 - (1.0 - 1.0 / (2.0 * n)).sqrt())
}

fn checked_ground(spec: &ModelSpec, q: u32) -> Result<SectorGround> {
    let g = sector_ground(spec, q)?;
    if let Some(gap) = g.gap {
        if gap < DEGENERACY_TOLERANCE {
            return Err(Error::DegenerateGround { sector: q, gap });
        }
    }
    Ok(g)
}

/// `w(n) = |<g_{n+1}| a^dag |g_n>|^2`.
pub fn hop_weight(spec: &ModelSpec, n: u32) -> Result<f64> {
    let s = containing(spec, n + 1);
    let lo = checked_ground(&s, n)?;
    let hi = checked_ground(&s, n + 1)?;
    let index: HashMap<_, _> = hi.states.iter().enumerate().map(|(i, st)| (*st, i)).collect();
    let mut amp = 0.0;
    for (i, st) in lo.states.iter().enumerate() {
        let mut up = *st;
        up.photons += 1;
        if let Some(&j) = index.get(&up) {
            amp += hi.vector[j] * ((st.photons + 1) as f64).sqrt() * lo.vector[i];
        }
    }
    Ok(amp * amp)
}

/// `t* = ratio * U_eff(1) / w(0)`.
pub fn t_star_estimate_with(spec: &ModelSpec, ratio: f64) -> Result<f64> {
    Ok(ratio * u_eff(spec, 1)? / hop_weight(spec, 0)?)
}

pub fn t_star_estimate(spec: &ModelSpec) -> Result<f64> {
    t_star_estimate_with(spec, CRITICAL_RATIO)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParameters {
    pub spec: ModelSpec,
    /// `(n, U_eff(n))` for `n = 1..=lobes`.
    pub u_eff: Vec<(u32, f64)>,
    /// `(n, w(n))` for `n = 0..=lobes`.
    pub hop_weight: Vec<(u32, f64)>,
    pub t_star: f64,
}

pub fn effective_parameters(spec: &ModelSpec, lobes: u32) -> Result<EffectiveParameters> {
    let lobes = lobes.max(1);
    let u = (1..=lobes).map(|n| u_eff(spec, n).map(|v| (n, v))).collect::<Result<Vec<_>>>()?;
    let w = (0..=lobes).map(|n| hop_weight(spec, n).map(|v| (n, v))).collect::<Result<Vec<_>>>()?;
    let t_star = CRITICAL_RATIO * u[0].1 / w[0].1;
    Ok(EffectiveParameters { spec: *spec, u_eff: u, hop_weight: w, t_star })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LobeEstimate {
    pub hopping: f64,
    pub mu_minus: f64,
    pub mu_plus: f64,
}

/// First-order strong-coupling boundaries of lobe `n` on a chain:
/// `mu+ = mu+(0) - 2 t w(n)`, `mu- = mu-(0) + 2 t w(n-1)`.
pub fn strong_coupling_boundaries(spec: &ModelSpec, n: u32, t_grid: &[f64]) -> Result<Vec<LobeEstimate>> {
    if n == 0 {
        return Err(Error::MissingSector(0));
    }
    let s = containing(spec, n + 1);
    let e = |q| sector_ground(&s, q).map(|g| g.energy);
    let (e_lo, e_mid, e_hi) = (e(n - 1)?, e(n)?, e(n + 1)?);
    let (w_up, w_down) = (hop_weight(spec, n)?, hop_weight(spec, n - 1)?);
    Ok(t_grid
        .iter()
        .map(|&t| LobeEstimate {
            hopping: t,
            mu_minus: e_mid - e_lo + 2.0 * t * w_down,
            mu_plus: e_hi - e_mid - 2.0 * t * w_up,
        })
        .collect())
}

/// The same model with its detuning set to `detuning`, shifting the cavity
/// frequency (Model I) or the level-4 detuning (Model II).
pub fn with_detuning(spec: &ModelSpec, detuning: f64) -> ModelSpec {
    let couplings = match spec.couplings {
        Couplings::ModelI { epsilon, beta, .. } => Couplings::ModelI { epsilon, omega: epsilon + detuning, beta },
        Couplings::ModelII { delta, rabi, g, .. } => Couplings::ModelII { delta, big_delta: delta + detuning, rabi, g },
    };
    ModelSpec { couplings, ..*spec }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetuningQuantity {
    LobeWidths,
    TStar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetuningPoint {
    pub detuning: f64,
    /// Widths `U_eff(rho)` of lobes `rho = 1..=lobes`, or the single `t*`.
    pub values: Vec<f64>,
}

/// Lobe widths at zero hopping: `U_eff(rho)` for `rho = 1..=lobes`.
pub fn lobe_widths(spec: &ModelSpec, lobes: u32) -> Result<Vec<f64>> {
    (1..=lobes).map(|rho| u_eff(spec, rho)).collect()
}

pub fn detuning_sweep(
    spec: &ModelSpec,
    grid: &[f64],
    quantity: DetuningQuantity,
    lobes: u32,
) -> Result<Vec<DetuningPoint>> {
    grid.iter()
        .map(|&d| {
            if !d.is_finite() {
                return Err(Error::InvalidSpec("detuning must be finite".into()));
            }
            let s = with_detuning(spec, d);
            let values = match quantity {
                DetuningQuantity::LobeWidths => lobe_widths(&s, lobes)?,
                DetuningQuantity::TStar => vec![t_star_estimate(&s)?],
            };
            Ok(DetuningPoint { detuning: d, values })
        })
        .collect()
}

/// Default number of lobes compared in the crossover test.
pub fn default_lobes(spec: &ModelSpec) -> u32 {
    match spec.kind() {
        ModelKind::ModelI => 2 * spec.atoms,
        ModelKind::ModelII => 4 * spec.atoms,
    }
}

/// Does the `rho = N` lobe exceed `factor` times every other lobe among
/// `1..=lobes`?
pub fn lobe_n_dominates(spec: &ModelSpec, lobes: u32, factor: f64) -> Result<bool> {
    let widths = lobe_widths(spec, lobes.max(spec.atoms + 1))?;
    let target = widths[spec.atoms as usize - 1];
    let others = widths
        .iter()
        .enumerate()
        .filter(|(i, _)| *i + 1 != spec.atoms as usize)
        .map(|(_, w)| *w)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(target > factor * others)
}

/// Smallest non-negative detuning, in units of the coupling, at which the
/// `rho = N` lobe dominates (see [`lobe_n_dominates`]). Scans upwards in
/// steps of `step` up to `max_detuning`, then bisects to `tol`.
pub fn crossover_detuning(
    spec: &ModelSpec,
    lobes: u32,
    factor: f64,
    step: f64,
    max_detuning: f64,
    tol: f64,
) -> Result<Option<f64>> {
    if !(step > 0.0 && tol > 0.0) {
        return Err(Error::InvalidSpec("step and tolerance must be positive".into()));
    }
    let dominates = |d: f64| lobe_n_dominates(&with_detuning(spec, d), lobes, factor);
    if dominates(0.0)? {
        return Ok(Some(0.0));
    }
    let mut lo = 0.0;
    let mut hi = None;
    let mut d = step;
    while d <= max_detuning + 1e-12 {
        if dominates(d)? {
            hi = Some(d);
            break;
        }
        lo = d;
        d += step;
    }
    let Some(mut hi) = hi else { return Ok(None) };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if dominates(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn power_law_exponent(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints(points.len()));
    }
    if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::InvalidSpec("power-law fit needs positive data".into()));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn first_lobe_matches_closed_form() {
        for n in [1, 2, 5, 17, 50] {
            let u = u_eff(&ModelSpec::model_i_resonant(n), 1).unwrap();
            assert_abs_diff_eq!(u, u_eff_resonant_closed_form(n), epsilon = 1e-10);
        }
        assert_abs_diff_eq!(u_eff_resonant_closed_form(1), 2.0 - 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(u_eff_resonant_closed_form(100), 0.0500627, epsilon = 1e-7);
    }

    #[test]
    fn single_atom_hop_weight_is_one_half() {
        let w = hop_weight(&ModelSpec::model_i_resonant(1), 0).unwrap();
        assert_abs_diff_eq!(w, 0.5, epsilon = 1e-12);
        let t = t_star_estimate(&ModelSpec::model_i_resonant(1)).unwrap();
        assert_abs_diff_eq!(t, 0.6 * (2.0 - 2f64.sqrt()), epsilon = 1e-10);
    }

    #[test]
    fn four_level_hop_weight_follows_atom_ratio() {
        for n in [1, 2, 3, 6] {
            let w = hop_weight(&ModelSpec::model_ii_resonant(n), 0).unwrap();
            assert_abs_diff_eq!(w, n as f64 / (2.0 * (n as f64 + 1.0)), epsilon = 1e-10);
        }
    }

    #[test]
    fn hop_weight_ignores_the_cutoff() {
        let spec = ModelSpec::model_i_resonant(3).with_cutoff(2);
        let a = hop_weight(&spec, 0).unwrap();
        let b = hop_weight(&spec.with_cutoff(4), 0).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        let w1 = hop_weight(&spec, 1).unwrap();
        assert!(w1 > 0.0 && w1 <= 2.0);
    }

    #[test]
    fn degenerate_sector_is_reported() {
        // atoms and photon decoupled and degenerate
        let spec = ModelSpec::model_ii(1, 0.0, 0.0, 0.0, 0.0, 2);
        assert!(matches!(hop_weight(&spec, 0), Err(Error::DegenerateGround { sector: 1, .. })));
    }

    #[test]
    fn strong_coupling_slopes() {
        let spec = ModelSpec::model_i_resonant(1);
        let b = strong_coupling_boundaries(&spec, 1, &[0.0, 0.1]).unwrap();
        assert_abs_diff_eq!(b[0].mu_plus - b[0].mu_minus, 2.0 - 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(b[0].mu_minus, 0.0, epsilon = 1e-12);
        let w0 = hop_weight(&spec, 0).unwrap();
        let w1 = hop_weight(&spec, 1).unwrap();
        assert_abs_diff_eq!((b[1].mu_minus - b[0].mu_minus) / 0.1, 2.0 * w0, epsilon = 1e-10);
        assert_abs_diff_eq!((b[1].mu_plus - b[0].mu_plus) / 0.1, -2.0 * w1, epsilon = 1e-10);
    }

    #[test]
    fn zero_detuning_reproduces_resonance() {
        let spec = ModelSpec::model_i_resonant(4);
        let sweep = detuning_sweep(&spec, &[0.0], DetuningQuantity::LobeWidths, 3).unwrap();
        assert_abs_diff_eq!(sweep[0].values[0], u_eff(&spec, 1).unwrap(), epsilon = 1e-14);
        let t = detuning_sweep(&spec, &[0.0], DetuningQuantity::TStar, 1).unwrap();
        assert_abs_diff_eq!(t[0].values[0], t_star_estimate(&spec).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn power_law_of_exact_data() {
        let pts: Vec<(f64, f64)> = (1..10).map(|n| (n as f64, 3.0 * (n as f64).powf(-0.5))).collect();
        assert_abs_diff_eq!(power_law_exponent(&pts).unwrap(), -0.5, epsilon = 1e-12);
    }
}
