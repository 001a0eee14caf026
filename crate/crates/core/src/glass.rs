//! Atom-number disorder between cavities and the hopping window in which a
//! polariton glass is expected.
//!
//! Atom numbers are drawn from a rounded Gaussian (redrawn below one atom).
//! Sampling runs in fixed-size chunks, each on its own ChaCha stream of the
//! master seed, so the ensemble does not depend on the worker count.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::effective::{hop_weight, u_eff};
use crate::error::{Error, Result};
use crate::site::ModelSpec;

/// Bose-glass window of `t_eff / <U_eff>` at filling slightly above one.
pub const LITERATURE_WINDOW: (f64, f64) = (0.078, 0.133);
/// Disorder strength of the uniform-interaction reference model.
pub const REFERENCE_EPSILON: f64 = 0.25;
/// Samples per random stream.
pub const CHUNK: usize = 4096;

/// Reference levels for `dU/<U>`: `epsilon` itself and the standard
/// deviation `epsilon / sqrt(3)` of a uniform spread of half-width epsilon.
pub fn reference_levels(epsilon: f64) -> (f64, f64) {
    (epsilon, epsilon / 3f64.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlassEnsemble {
    pub mean_atoms: f64,
    pub std_atoms: f64,
    pub seed: u64,
    pub samples: Vec<u32>,
}

pub fn sample_atom_numbers(mean: f64, std: f64, count: usize, seed: u64) -> Result<GlassEnsemble> {
    if !(mean.is_finite() && mean >= 1.0) {
        return Err(Error::Infeasible(format!("mean atom number {mean} is below one")));
    }
    if !(std.is_finite() && std >= 0.0) {
        return Err(Error::InvalidSpec("atom-number spread must be finite and non-negative".into()));
    }
    let normal = Normal::new(mean, std).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    let chunks = count.div_ceil(CHUNK);
    let samples = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(count - c * CHUNK);
            let mut out = Vec::with_capacity(len);
            while out.len() < len {
                let n = normal.sample(&mut rng).round();
                if n >= 1.0 {
                    out.push(n as u32);
                }
            }
            out
        })
        .collect();
    Ok(GlassEnsemble { mean_atoms: mean, std_atoms: std, seed, samples })
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Mean and population standard deviation with compensated sums.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mut s = CompensatedSum::default();
    values.iter().for_each(|&v| s.add(v));
    let mean = s.value() / n;
    let mut q = CompensatedSum::default();
    values.iter().for_each(|&v| q.add((v - mean) * (v - mean)));
    (mean, (q.value() / n).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UeffStatistics {
    pub mean: f64,
    pub std: f64,
    pub relative_std: f64,
    pub count: usize,
}

/// `U_eff(1)` for every distinct atom number in the ensemble.
pub fn u_eff_table(ensemble: &GlassEnsemble, template: &ModelSpec) -> Result<BTreeMap<u32, f64>> {
    let mut distinct: Vec<u32> = ensemble.samples.clone();
    distinct.sort_unstable();
    distinct.dedup();
    distinct
        .par_iter()
        .map(|&n| u_eff(&template.with_atoms(n), 1).map(|u| (n, u)))
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().collect())
}

/// Per-cavity `U_eff(1; N_i)` in sample order.
pub fn per_cavity_u_eff(ensemble: &GlassEnsemble, template: &ModelSpec) -> Result<Vec<f64>> {
    let table = u_eff_table(ensemble, template)?;
    Ok(ensemble.samples.iter().map(|n| table[n]).collect())
}

pub fn u_eff_statistics(ensemble: &GlassEnsemble, template: &ModelSpec) -> Result<UeffStatistics> {
    if ensemble.samples.is_empty() {
        return Err(Error::TooFewPoints(0));
    }
    let values = per_cavity_u_eff(ensemble, template)?;
    let (mean, std) = mean_and_std(&values);
    Ok(UeffStatistics { mean, std, relative_std: std / mean, count: values.len() })
}

/// Small-spread estimate `|dU/dN| dN / U` from the resonant Model I closed
/// form.
pub fn linearized_relative_std(mean: f64, std: f64) -> f64 {
    let s = (1.0 - 1.0 / (2.0 * mean)).sqrt();
    let u = 2.0 * mean.sqrt() * (1.0 - s);
    let du = (1.0 - s) / mean.sqrt() - 1.0 / (2.0 * mean.powf(1.5) * s);
    du.abs() * std / u
}

/// `(dN, dU/<U>)` along a grid of atom-number spreads.
pub fn relative_std_curve(
    mean: f64,
    spreads: &[f64],
    count: usize,
    seed: u64,
    template: &ModelSpec,
) -> Result<Vec<(f64, f64)>> {
    spreads
        .iter()
        .map(|&s| {
            let e = sample_atom_numbers(mean, s, count, seed)?;
            Ok((s, u_eff_statistics(&e, template)?.relative_std))
        })
        .collect()
}

/// First upward crossing of `level`, linearly interpolated.
pub fn crossing(curve: &[(f64, f64)], level: f64) -> Option<f64> {
    curve.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        (y0 < level && y1 >= level).then(|| x0 + (level - y0) * (x1 - x0) / (y1 - y0))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlassWindow {
    pub t_low: f64,
    pub t_high: f64,
    pub u_mean: f64,
    /// Hopping weight at the mean atom number.
    pub hop_weight: f64,
    pub literature: (f64, f64),
}

/// Hopping interval `bound * <U_eff> / w(0; <N>)` for both window edges.
pub fn glass_window(
    stats: &UeffStatistics,
    template: &ModelSpec,
    mean_atoms: f64,
    literature: (f64, f64),
) -> Result<GlassWindow> {
    let (lo, hi) = literature;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi) {
        return Err(Error::InvalidSpec("window bounds must satisfy 0 <= low <= high".into()));
    }
    let atoms = (mean_atoms.round() as u32).max(1);
    let w = hop_weight(&template.with_atoms(atoms), 0)?;
    Ok(GlassWindow {
        t_low: lo * stats.mean / w,
        t_high: hi * stats.mean / w,
        u_mean: stats.mean,
        hop_weight: w,
        literature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_spread_is_constant() {
        let e = sample_atom_numbers(7.4, 0.0, 5000, 1).unwrap();
        assert!(e.samples.iter().all(|&n| n == 7));
        let s = u_eff_statistics(&e, &ModelSpec::model_i_resonant(1)).unwrap();
        assert_eq!(s.relative_std, 0.0);
    }

    #[test]
    fn wide_spread_stays_physical() {
        let e = sample_atom_numbers(1.0, 2.0, 20_000, 9).unwrap();
        assert_eq!(e.samples.len(), 20_000);
        assert!(e.samples.iter().all(|&n| n >= 1));
        assert!(matches!(sample_atom_numbers(0.5, 1.0, 10, 0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn sampler_moments() {
        let e = sample_atom_numbers(100.0, 20.0, 100_000, 42).unwrap();
        let v: Vec<f64> = e.samples.iter().map(|&n| n as f64).collect();
        let (m, s) = mean_and_std(&v);
        assert!((98.0..=102.0).contains(&m), "{m}");
        assert!((19.6..=20.4).contains(&s), "{s}");
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = sample_atom_numbers(10.0, 3.0, 10_000, 5).unwrap();
        let b = sample_atom_numbers(10.0, 3.0, 10_000, 5).unwrap();
        let c = sample_atom_numbers(10.0, 3.0, 10_000, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn compensated_sum_is_exact_on_cancellation() {
        let v = [1e16, 1.0, -1e16, 1.0];
        let mut s = CompensatedSum::default();
        v.iter().for_each(|&x| s.add(x));
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn window_is_linear_in_mean_interaction() {
        let spec = ModelSpec::model_i_resonant(1);
        let stats = UeffStatistics { mean: 0.05, std: 0.0, relative_std: 0.0, count: 1 };
        let a = glass_window(&stats, &spec, 100.0, LITERATURE_WINDOW).unwrap();
        let doubled = UeffStatistics { mean: 0.1, ..stats };
        let b = glass_window(&doubled, &spec, 100.0, LITERATURE_WINDOW).unwrap();
        assert_abs_diff_eq!(b.t_low, 2.0 * a.t_low, epsilon = 1e-15);
        assert_abs_diff_eq!(b.t_high, 2.0 * a.t_high, epsilon = 1e-15);
        assert_abs_diff_eq!(a.t_high / a.t_low, 0.133 / 0.078, epsilon = 1e-12);
        let flat = glass_window(&stats, &spec, 100.0, (0.1, 0.1)).unwrap();
        assert_eq!(flat.t_low, flat.t_high);
    }

    #[test]
    fn interpolated_crossing() {
        let curve = [(0.0, 0.0), (1.0, 0.1), (2.0, 0.3)];
        assert_abs_diff_eq!(crossing(&curve, 0.2).unwrap(), 1.5);
        assert!(crossing(&curve, 0.5).is_none());
    }
}
