//! Quantities derived from sector energies and photon correlators:
//! Mott-lobe boundaries, finite-size compressibility, the momentum
//! distribution S(k) with its visibility, and 1/L extrapolation.
//!
//! Energies are always taken at zero chemical potential. The `-mu n_pol`
//! term is constant inside a sector, so the lobe boundaries are the
//! chemical potentials at which neighbouring sectors cross.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ground-state energy per total excitation number.
pub type EnergyTable = BTreeMap<u32, f64>;

fn energy(table: &EnergyTable, n: u32) -> Result<f64> {
    table.get(&n).copied().ok_or(Error::MissingSector(n))
}

/// `(mu_minus, mu_plus)` of the sector with `n` excitations.
pub fn chemical_potential_bounds(table: &EnergyTable, n: u32) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::MissingSector(0));
    }
    let (lo, mid, hi) = (energy(table, n - 1)?, energy(table, n)?, energy(table, n + 1)?);
    Ok((mid - lo, hi - mid))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Compressibility {
    /// `1 / (L * (E(n+1) - 2E(n) + E(n-1)))`; infinite when the gap closed.
    pub value: f64,
    pub curvature: f64,
    /// Discrete curvature was zero or negative.
    pub gap_closed: bool,
}

/// Finite-size compressibility from the inverse charge gap per site.
pub fn compressibility(table: &EnergyTable, n: u32, length: usize) -> Result<Compressibility> {
    let (mu_minus, mu_plus) = chemical_potential_bounds(table, n)?;
    let curvature = mu_plus - mu_minus;
    if curvature <= 0.0 {
        return Ok(Compressibility { value: f64::INFINITY, curvature, gap_closed: true });
    }
    Ok(Compressibility { value: 1.0 / (length as f64 * curvature), curvature, gap_closed: false })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumDistribution {
    /// `S(k)` for `k = 0..L-1`.
    pub values: Vec<f64>,
}

impl MomentumDistribution {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Largest `|C_jl - C_lj|` of a square matrix.
pub fn asymmetry(corr: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (j, row) in corr.iter().enumerate() {
        for (l, v) in row.iter().enumerate() {
            worst = worst.max((v - corr[l][j]).abs());
        }
    }
    worst
}

/// `S(k) = (1/L) sum_{j,l} exp(2 pi i k (j - l) / L) <a_j^dag a_l>` on the
/// integer grid, with the open-chain correlator inserted as is.
pub fn momentum_distribution(corr: &[Vec<f64>]) -> Result<MomentumDistribution> {
    let l = corr.len();
    if corr.iter().any(|row| row.len() != l) {
        return Err(Error::InvalidSpec("correlator must be square".into()));
    }
    let defect = asymmetry(corr);
    if defect > 1e-8 {
        return Err(Error::NotHermitian(defect));
    }
    // sum along each diagonal j - l = d, then a cosine transform
    let mut diag = vec![0.0; 2 * l.max(1) - 1];
    for (j, row) in corr.iter().enumerate() {
        for (m, v) in row.iter().enumerate() {
            diag[j + l - 1 - m] += v;
        }
    }
    let values = (0..l)
        .map(|k| {
            let mut s = 0.0;
            for (idx, d) in diag.iter().enumerate() {
                let shift = idx as f64 - (l as f64 - 1.0);
                s += (2.0 * PI * k as f64 * shift / l as f64).cos() * d;
            }
            s / l as f64
        })
        .collect();
    Ok(MomentumDistribution { values })
}

/// `V = (S_max - S_min) / (S_max + S_min)`.
pub fn visibility(s: &MomentumDistribution) -> Result<f64> {
    let max = s.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = s.values.iter().copied().fold(f64::INFINITY, f64::min);
    let denom = max + min;
    if s.values.is_empty() || s.values.iter().all(|&v| v == 0.0) || denom <= 0.0 {
        return Err(Error::UndefinedVisibility);
    }
    Ok(((max - min) / denom).clamp(0.0, 1.0))
}

/// Least-squares line `value = intercept + slope / L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub intercept: f64,
    pub slope: f64,
    /// Standard error of the intercept; the fit residual used by the
    /// gap-closing test.
    pub intercept_error: f64,
    /// Root-mean-square deviation of the points from the line.
    pub rms_residual: f64,
    pub points: usize,
}

/// Linear fit in `1/L` over at least three distinct sizes.
pub fn extrapolate_thermodynamic(values: &[(usize, f64)]) -> Result<Extrapolation> {
    let mut sizes: Vec<usize> = values.iter().map(|p| p.0).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 || sizes[0] == 0 {
        return Err(Error::TooFewPoints(sizes.len()));
    }
    let n = values.len() as f64;
    let xs: Vec<f64> = values.iter().map(|p| 1.0 / p.0 as f64).collect();
    let ys: Vec<f64> = values.iter().map(|p| p.1).collect();
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let sigma2 = ssr / (n - 2.0);
    let intercept_error = (sigma2 * (1.0 / n + xm * xm / sxx)).sqrt();
    Ok(Extrapolation { intercept, slope, intercept_error, rms_residual: (ssr / n).sqrt(), points: values.len() })
}

/// Lobe boundaries at one hopping for several chain lengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseBoundaryPoint {
    pub hopping: f64,
    pub density: u32,
    /// `(L, mu_minus, mu_plus)`.
    pub per_size: Vec<(usize, f64, f64)>,
    pub mu_minus: Option<Extrapolation>,
    pub mu_plus: Option<Extrapolation>,
    pub gap: Option<Extrapolation>,
}

impl PhaseBoundaryPoint {
    /// `tables` maps each chain length to its sector energies; the lobe
    /// sector is `density * L`.
    pub fn from_energies(hopping: f64, density: u32, tables: &[(usize, EnergyTable)]) -> Result<Self> {
        let mut per_size = Vec::with_capacity(tables.len());
        for (l, table) in tables {
            let (lo, hi) = chemical_potential_bounds(table, density * *l as u32)?;
            per_size.push((*l, lo, hi));
        }
        per_size.sort_by_key(|p| p.0);
        let fit = |f: fn(&(usize, f64, f64)) -> f64| {
            let pts: Vec<(usize, f64)> = per_size.iter().map(|p| (p.0, f(p))).collect();
            extrapolate_thermodynamic(&pts).ok()
        };
        Ok(Self {
            hopping,
            density,
            mu_minus: fit(|p| p.1),
            mu_plus: fit(|p| p.2),
            gap: fit(|p| p.2 - p.1),
            per_size,
        })
    }

    /// Extrapolated gap within twice its fit error of zero (or below).
    pub fn gap_closed(&self) -> Option<bool> {
        self.gap.as_ref().map(|g| g.intercept <= 2.0 * g.intercept_error)
    }
}

/// Smallest hopping on the grid at which the extrapolated gap has closed.
pub fn critical_hopping(points: &[PhaseBoundaryPoint]) -> Option<f64> {
    let mut sorted: Vec<&PhaseBoundaryPoint> = points.iter().collect();
    sorted.sort_by(|a, b| a.hopping.total_cmp(&b.hopping));
    sorted.into_iter().find(|p| p.gap_closed() == Some(true)).map(|p| p.hopping)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn brute(corr: &[Vec<f64>]) -> Vec<f64> {
        let l = corr.len();
        (0..l)
            .map(|k| {
                let mut re = 0.0;
                let mut im = 0.0;
                for j in 0..l {
                    for m in 0..l {
                        let phase = 2.0 * PI * (k * j) as f64 / l as f64 - 2.0 * PI * (k * m) as f64 / l as f64;
                        re += phase.cos() * corr[j][m];
                        im += phase.sin() * corr[j][m];
                    }
                }
                assert!(im.abs() < 1e-10);
                re / l as f64
            })
            .collect()
    }

    #[test]
    fn two_site_fourier_sum() {
        let s = momentum_distribution(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert_abs_diff_eq!(s.values[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.values[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(visibility(&s).unwrap(), 1.0);
    }

    #[test]
    fn diagonal_correlator_has_flat_distribution() {
        let corr = vec![vec![0.3, 0.0, 0.0], vec![0.0, 0.3, 0.0], vec![0.0, 0.0, 0.3]];
        let s = momentum_distribution(&corr).unwrap();
        for v in &s.values {
            assert_abs_diff_eq!(*v, 0.3, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(visibility(&s).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn matches_double_loop() {
        let corr = vec![
            vec![0.7, 0.2, -0.1, 0.05],
            vec![0.2, 0.6, 0.3, 0.01],
            vec![-0.1, 0.3, 0.9, 0.4],
            vec![0.05, 0.01, 0.4, 0.5],
        ];
        let s = momentum_distribution(&corr).unwrap();
        for (a, b) in s.values.iter().zip(brute(&corr)) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_asymmetric_and_empty_input() {
        let corr = vec![vec![0.5, 0.1], vec![0.2, 0.5]];
        assert!(matches!(momentum_distribution(&corr), Err(Error::NotHermitian(_))));
        let zero = MomentumDistribution { values: vec![0.0; 3] };
        assert!(matches!(visibility(&zero), Err(Error::UndefinedVisibility)));
        assert_abs_diff_eq!(visibility(&MomentumDistribution { values: vec![1.0, 0.0] }).unwrap(), 1.0);
    }

    #[test]
    fn bounds_and_compressibility() {
        let table: EnergyTable = [(3, -1.0), (4, -1.5), (5, -1.2)].into_iter().collect();
        let (lo, hi) = chemical_potential_bounds(&table, 4).unwrap();
        assert_abs_diff_eq!(lo, -0.5);
        assert_abs_diff_eq!(hi, 0.3);
        let k = compressibility(&table, 4, 4).unwrap();
        assert_abs_diff_eq!(k.value, 1.0 / (4.0 * 0.8), epsilon = 1e-14);
        assert!(matches!(chemical_potential_bounds(&table, 5), Err(Error::MissingSector(6))));
        let flat: EnergyTable = [(1, 0.0), (2, 1.0), (3, 2.0)].into_iter().collect();
        assert!(compressibility(&flat, 2, 2).unwrap().gap_closed);
    }

    #[test]
    fn linear_fit_recovers_intercept() {
        let pts: Vec<(usize, f64)> = [8, 16, 24, 48].iter().map(|&l| (l, 0.25 - 1.5 / l as f64)).collect();
        let fit = extrapolate_thermodynamic(&pts).unwrap();
        assert_abs_diff_eq!(fit.intercept, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.slope, -1.5, epsilon = 1e-10);
        assert!(fit.intercept_error < 1e-12);
        let flat = extrapolate_thermodynamic(&[(4, 2.0), (8, 2.0), (16, 2.0)]).unwrap();
        assert_abs_diff_eq!(flat.intercept, 2.0, epsilon = 1e-12);
        assert!(matches!(extrapolate_thermodynamic(&[(4, 1.0), (4, 2.0), (8, 1.0)]), Err(Error::TooFewPoints(2))));
    }

    #[test]
    fn gap_closing_uses_fit_error() {
        let open: Vec<(usize, EnergyTable)> = [8usize, 16, 32]
            .iter()
            .map(|&l| {
                let n = l as u32;
                (l, [(n - 1, 0.0), (n, -0.2), (n + 1, 0.5 + 1.0 / l as f64)].into_iter().collect())
            })
            .collect();
        let p = PhaseBoundaryPoint::from_energies(0.1, 1, &open).unwrap();
        assert_eq!(p.gap_closed(), Some(false));
        let closed: Vec<(usize, EnergyTable)> = [8usize, 16, 32]
            .iter()
            .map(|&l| {
                let n = l as u32;
                (l, [(n - 1, 0.0), (n, 0.0), (n + 1, 2.0 / l as f64)].into_iter().collect())
            })
            .collect();
        let q = PhaseBoundaryPoint::from_energies(0.3, 1, &closed).unwrap();
        assert_eq!(q.gap_closed(), Some(true));
        assert_eq!(critical_hopping(&[p, q]), Some(0.3));
    }
}
