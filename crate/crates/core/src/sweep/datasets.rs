//! The dataset runners behind each CLI subcommand.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::effective::{
    crossover_detuning, default_lobes, detuning_sweep, effective_parameters, hop_weight, power_law_exponent,
    t_star_estimate_with, u_eff, DetuningQuantity,
};
use crate::error::{Error, Result};
use crate::glass::{
    crossing, glass_window, per_cavity_u_eff, reference_levels, relative_std_curve, sample_atom_numbers,
    u_eff_statistics,
};
use crate::lattice::LatticeSpec;
use crate::observables::{compressibility, momentum_distribution, visibility, EnergyTable, PhaseBoundaryPoint};
use crate::site::{site_ground_energy_checked, ModelKind};

use super::config::{Backend, RunConfig};
use super::record::ResultRecord;
use super::tasks::{solve_chain, ChainSolution};

/// Model label and atom number shared by every row of a run.
#[derive(Clone, Copy, Debug)]
pub struct Stamp {
    model: &'static str,
    atoms: f64,
}

impl Stamp {
    pub fn row(self, quantity: &str, value: f64) -> ResultRecord {
        ResultRecord::new(self.model, self.atoms, quantity, value)
    }
}

/// Rows and per-row failures of one run.
#[derive(Debug, Default)]
pub struct Collector {
    pub records: Vec<ResultRecord>,
    pub failures: Vec<String>,
    strict: bool,
    model: &'static str,
    atoms: f64,
}

impl Collector {
    pub fn new(config: &RunConfig) -> Self {
        let model = match config.model.kind() {
            ModelKind::ModelI => "I",
            ModelKind::ModelII => "II",
        };
        Self { records: Vec::new(), failures: Vec::new(), strict: config.strict, model, atoms: config.model.atoms as f64 }
    }

    pub fn row(&self, quantity: &str, value: f64) -> ResultRecord {
        self.stamp().row(quantity, value)
    }

    pub fn stamp(&self) -> Stamp {
        Stamp { model: self.model, atoms: self.atoms }
    }

    pub fn push(&mut self, r: ResultRecord) {
        self.records.push(r);
    }

    /// Records a failed subtask as a `NaN` row, or aborts in strict mode.
    pub fn fail(&mut self, row: ResultRecord, err: Error) -> Result<()> {
        if self.strict {
            return Err(err);
        }
        let msg = err.to_string();
        log::error!("{}: {msg}", row.quantity);
        self.failures.push(format!("{}: {msg}", row.quantity));
        self.records.push(ResultRecord { value: f64::NAN, converged: false, ..row }.flag(&format!("error={msg}")));
        Ok(())
    }

    /// Unconverged chain results are fatal in strict mode.
    fn check(&self, sol: &ChainSolution) -> Result<()> {
        if self.strict && !sol.result.converged {
            let report = sol.result.dmrg.clone().unwrap_or_default();
            return Err(Error::NotConverged {
                iterations: report.sweep_energies.len(),
                residual: report.final_discarded().max(sol.result.residual_norm),
            });
        }
        Ok(())
    }

    fn chain_row(&self, quantity: &str, value: f64, lat: &LatticeSpec, n_pol: u32, sol: &ChainSolution) -> ResultRecord {
        self.row(quantity, value)
            .length(lat.length())
            .hopping(lat.hopping)
            .n_pol(n_pol)
            .backend(&sol.backend.to_string())
            .converged(sol.result.converged)
            .flag(&sol.flags())
    }
}

#[derive(Clone, Debug)]
struct ChainTask {
    lattice: LatticeSpec,
    n_pol: u32,
    measure: bool,
}

fn solve_all(config: &RunConfig, tasks: &[ChainTask]) -> Vec<Result<ChainSolution>> {
    tasks
        .par_iter()
        .enumerate()
        .map(|(i, t)| solve_chain(config, &t.lattice, t.n_pol, t.measure, i))
        .collect()
}

fn nan_or(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

/// Single-cavity spectra and effective Bose-Hubbard parameters.
pub fn site(config: &RunConfig, out: &mut Collector) -> Result<()> {
    let st = out.stamp();
    let spec = &config.model;
    for q in 0..=config.site.max_sector {
        let row = st.row("site_energy", 0.0).n_pol(q);
        match site_ground_energy_checked(spec, q) {
            Ok(e) => {
                let flag = if e.cutoff_converged() { "" } else { "cutoff_sensitive" };
                out.push(ResultRecord { value: e.energy, error: Some(e.cutoff_shift.abs()), ..row }.flag(flag));
            }
            Err(e) => out.fail(row, e)?,
        }
    }
    match effective_parameters(spec, config.site.lobes) {
        Ok(p) => {
            for (n, u) in p.u_eff {
                out.push(st.row("u_eff", u).n_pol(n));
            }
            for (n, w) in p.hop_weight {
                out.push(st.row("hop_weight", w).n_pol(n));
            }
            out.push(st.row("t_star", p.t_star));
        }
        Err(e) => out.fail(st.row("effective_parameters", 0.0), e)?,
    }
    Ok(())
}

/// One chain on a fixed backend: energy, convergence history, densities and
/// the momentum distribution.
pub fn single(config: &RunConfig, backend: Backend, out: &mut Collector) -> Result<()> {
    let st = out.stamp();
    let mut config = config.clone();
    config.backend = backend;
    let s = &config.single;
    let lat = LatticeSpec::uniform(config.model, s.length, s.hopping);
    let n_pol = s.n_pol.unwrap_or(s.length as u32);
    let task = ChainTask { lattice: lat.clone(), n_pol, measure: s.correlations };
    let sol = match solve_all(&config, &[task]).pop().expect("one task") {
        Ok(sol) => sol,
        Err(e) => {
            let row = st.row("energy", 0.0).length(lat.length()).hopping(lat.hopping).n_pol(n_pol);
            return out.fail(row.backend(&backend.to_string()), e);
        }
    };
    out.check(&sol)?;
    let r = &sol.result;
    out.push(out.chain_row("energy", r.energy, &lat, n_pol, &sol).error(r.residual_norm));
    out.push(out.chain_row("iterations", r.iterations as f64, &lat, n_pol, &sol));
    if let Some(report) = &r.dmrg {
        for (i, (e, w)) in report.sweep_energies.iter().zip(&report.sweep_discarded).enumerate() {
            out.push(out.chain_row("sweep_energy", *e, &lat, n_pol, &sol).param(i as f64 + 1.0));
            out.push(out.chain_row("sweep_discarded", *w, &lat, n_pol, &sol).param(i as f64 + 1.0));
        }
        out.push(out.chain_row("max_kept", report.max_kept as f64, &lat, n_pol, &sol));
    }
    if s.correlations {
        for (i, d) in r.site_excitations()?.into_iter().enumerate() {
            out.push(out.chain_row("site_excitation", d, &lat, n_pol, &sol).param(i as f64));
        }
        emit_spectrum(out, r.photon_correlations()?, &lat, n_pol, &sol, true)?;
    }
    Ok(())
}

fn emit_spectrum(
    out: &mut Collector,
    corr: Vec<Vec<f64>>,
    lat: &LatticeSpec,
    n_pol: u32,
    sol: &ChainSolution,
    full: bool,
) -> Result<()> {
    let s = match momentum_distribution(&corr) {
        Ok(s) => s,
        Err(e) => return out.fail(out.chain_row("visibility", 0.0, lat, n_pol, sol), e),
    };
    if full {
        for (k, v) in s.values.iter().enumerate() {
            out.push(out.chain_row("momentum_distribution", *v, lat, n_pol, sol).param(k as f64));
        }
    }
    match visibility(&s) {
        Ok(v) => out.push(out.chain_row("visibility", v, lat, n_pol, sol)),
        Err(e) => out.fail(out.chain_row("visibility", 0.0, lat, n_pol, sol), e)?,
    }
    Ok(())
}

/// Mott-lobe boundaries: sector energies around `rho L` for every hopping,
/// density and length, the chemical potentials and compressibility per
/// length, and their 1/L extrapolation.
pub fn phase_diagram(config: &RunConfig, out: &mut Collector) -> Result<()> {
    let st = out.stamp();
    let p = &config.phase;
    // unique (hopping index, L, n) problems
    let mut keys = BTreeMap::new();
    for &rho in &p.densities {
        for (ti, _) in p.hoppings.iter().enumerate() {
            for &l in &p.lengths {
                let n = rho * l as u32;
                for m in [n - 1, n, n + 1] {
                    keys.insert((ti, l, m), ());
                }
            }
        }
    }
    let keys: Vec<(usize, usize, u32)> = keys.into_keys().collect();
    let tasks: Vec<ChainTask> = keys
        .iter()
        .map(|&(ti, l, n)| ChainTask {
            lattice: LatticeSpec::uniform(config.model, l, p.hoppings[ti]),
            n_pol: n,
            measure: false,
        })
        .collect();
    let solved = solve_all(config, &tasks);

    let mut energies: BTreeMap<(usize, usize), EnergyTable> = BTreeMap::new();
    for ((key, task), res) in keys.iter().zip(&tasks).zip(solved) {
        match res {
            Ok(sol) => {
                out.check(&sol)?;
                let r = &sol.result;
                out.push(out.chain_row("energy", r.energy, &task.lattice, task.n_pol, &sol).error(r.residual_norm));
                if sol.result.converged {
                    energies.entry((key.0, key.1)).or_default().insert(key.2, r.energy);
                }
            }
            Err(e) => {
                let row = st.row("energy", 0.0).length(key.1).hopping(p.hoppings[key.0]).n_pol(key.2);
                out.fail(row, e)?;
            }
        }
    }

    for &rho in &p.densities {
        let mut boundary_points = Vec::new();
        for (ti, &t) in p.hoppings.iter().enumerate() {
            let mut tables = Vec::new();
            for &l in &p.lengths {
                let n = rho * l as u32;
                let base = |q: &str| st.row(q, 0.0).length(l).hopping(t).n_pol(n).param(rho as f64);
                let Some(table) = energies.get(&(ti, l)) else { continue };
                match compressibility(table, n, l) {
                    Ok(k) => {
                        let (lo, hi) = (table[&n] - table[&(n - 1)], table[&(n + 1)] - table[&n]);
                        out.push(ResultRecord { value: lo, ..base("mu_minus") });
                        out.push(ResultRecord { value: hi, ..base("mu_plus") });
                        out.push(ResultRecord { value: k.curvature, ..base("gap") });
                        let flag = if k.gap_closed { "gap_closed" } else { "" };
                        out.push(ResultRecord { value: k.value, ..base("compressibility") }.flag(flag));
                        tables.push((l, table.clone()));
                    }
                    Err(e) => out.fail(base("mu_minus"), e)?,
                }
            }
            if tables.is_empty() {
                continue;
            }
            let point = PhaseBoundaryPoint::from_energies(t, rho, &tables)?;
            let base = |q: &str| st.row(q, 0.0).hopping(t).param(rho as f64);
            for (q, fit) in [("mu_minus_inf", &point.mu_minus), ("mu_plus_inf", &point.mu_plus), ("gap_inf", &point.gap)] {
                match fit {
                    Some(f) => {
                        let mut r = ResultRecord { value: f.intercept, ..base(q) }.error(f.intercept_error);
                        if q == "gap_inf" {
                            r = r.flag(if point.gap_closed() == Some(true) { "gap_closed" } else { "gap_open" });
                        }
                        out.push(r);
                    }
                    None => out.push(ResultRecord { value: f64::NAN, ..base(q) }.flag("too_few_sizes")),
                }
            }
            boundary_points.push(point);
        }
        if let Some(tc) = crate::observables::critical_hopping(&boundary_points) {
            out.push(st.row("critical_hopping", tc).param(rho as f64));
        }
    }
    Ok(())
}

/// Visibility of the lobe-filling ground state on a hopping grid, with the
/// full `S(k)` at the requested hoppings.
pub fn visibility_sweep(config: &RunConfig, out: &mut Collector) -> Result<()> {
    let st = out.stamp();
    let v = &config.visibility;
    let mut tasks = Vec::new();
    for &l in &v.lengths {
        for &t in &v.hoppings {
            tasks.push(ChainTask {
                lattice: LatticeSpec::uniform(config.model, l, t),
                n_pol: v.density * l as u32,
                measure: true,
            });
        }
    }
    let solved = solve_all(config, &tasks);
    for (task, res) in tasks.iter().zip(solved) {
        let (lat, n) = (&task.lattice, task.n_pol);
        let sol = match res {
            Ok(sol) => sol,
            Err(e) => {
                out.fail(st.row("visibility", 0.0).length(lat.length()).hopping(lat.hopping).n_pol(n), e)?;
                continue;
            }
        };
        out.check(&sol)?;
        out.push(out.chain_row("energy", sol.result.energy, lat, n, &sol).error(sol.result.residual_norm));
        if let Some(w) = sol.discarded() {
            out.push(out.chain_row("discarded_weight", w, lat, n, &sol));
        }
        let full = v.spectrum_at.iter().any(|&t| (t - lat.hopping).abs() <= 1e-12);
        let corr = sol.result.photon_correlations()?;
        emit_spectrum(out, corr, lat, n, &sol, full)?;
    }
    Ok(())
}

/// `t*` and its ingredients against the atom number, with the fitted
/// power-law exponent.
pub fn tstar(config: &RunConfig, out: &mut Collector) -> Result<()> {
    let st = out.stamp();
    let ratio = config.tstar.ratio;
    let results: Vec<(u32, Result<(f64, f64, f64)>)> = config
        .tstar
        .atoms
        .par_iter()
        .map(|&n| {
            let spec = config.model.with_atoms(n);
            let r = (|| Ok((u_eff(&spec, 1)?, hop_weight(&spec, 0)?, t_star_estimate_with(&spec, ratio)?)))();
            (n, r)
        })
        .collect();
    let mut points = Vec::new();
    for (n, r) in results {
        let at = |q: &str, v: f64| ResultRecord { atoms: n as f64, ..st.row(q, v) };
        match r {
            Ok((u, w, ts)) => {
                out.push(at("u_eff", u).n_pol(1));
                out.push(at("hop_weight", w).n_pol(0));
                out.push(at("t_star", ts));
                points.push((n as f64, ts));
            }
            Err(e) => out.fail(at("t_star", 0.0), e)?,
        }
    }
    if points.len() >= 2 {
        let slope = power_law_exponent(&points)?;
        let r = ResultRecord { atoms: 0.0, ..st.row("t_star_exponent", slope) };
        out.push(r.param(points.len() as f64));
    }
    Ok(())
}

/// Lobe widths or `t*` against detuning, and the detuning at which the
/// `rho = N` lobe takes over.
pub fn detuning(config: &RunConfig, out: &mut Collector) -> Result<()> {
    let st = out.stamp();
    let d = &config.detuning;
    let spec = &config.model;
    let lobes = d.lobes.unwrap_or_else(|| default_lobes(spec));
    let points: Vec<Result<_>> = d
        .detunings
        .par_iter()
        .map(|&x| detuning_sweep(spec, &[x], d.quantity, lobes).map(|mut v| v.remove(0)))
        .collect();
    for (x, p) in d.detunings.iter().zip(points) {
        match p {
            Ok(p) => match d.quantity {
                DetuningQuantity::LobeWidths => {
                    for (i, w) in p.values.iter().enumerate() {
                        out.push(st.row("lobe_width", *w).param(*x).n_pol(i as u32 + 1));
                    }
                }
                DetuningQuantity::TStar => out.push(st.row("t_star", p.values[0]).param(*x)),
            },
            Err(e) => out.fail(st.row("detuning", 0.0).param(*x), e)?,
        }
    }

    let crossovers: Vec<(u32, Result<Option<f64>>)> = d
        .crossover_atoms
        .par_iter()
        .map(|&n| {
            let s = spec.with_atoms(n);
            let lobes = d.lobes.unwrap_or_else(|| default_lobes(&s));
            (n, crossover_detuning(&s, lobes, d.crossover_factor, d.crossover_step, d.crossover_max, 1e-6))
        })
        .collect();
    let mut found = Vec::new();
    for (n, r) in crossovers {
        let row = ResultRecord { atoms: n as f64, ..st.row("crossover_detuning", 0.0) }.param(d.crossover_factor);
        match r {
            Ok(Some(x)) => {
                out.push(ResultRecord { value: x, ..row });
                if x > 0.0 {
                    found.push((n as f64, x));
                }
            }
            Ok(None) => out.push(ResultRecord { value: nan_or(None), ..row }.flag("not_found")),
            Err(e) => out.fail(row, e)?,
        }
    }
    if found.len() >= 2 {
        let slope = power_law_exponent(&found)?;
        out.push(ResultRecord { atoms: 0.0, ..st.row("crossover_exponent", slope) }.param(found.len() as f64));
    }
    Ok(())
}

/// Relative interaction spread against atom-number spread for each mean,
/// its crossings of the reference levels, an optional per-cavity trace and
/// the hopping window.
pub fn glass(config: &RunConfig, out: &mut Collector) -> Result<()> {
    let st = out.stamp();
    let g = &config.glass;
    let spec = &config.model;
    let (eps, uniform) = reference_levels(g.epsilon);
    let mut eps_crossings = BTreeMap::new();
    for &mean in &g.means {
        let at = |q: &str, v: f64| ResultRecord { atoms: mean, ..st.row(q, v) };
        let curve = match relative_std_curve(mean, &config.glass_spreads(mean), g.samples, config.seed, spec) {
            Ok(c) => c,
            Err(e) => {
                out.fail(at("relative_std", 0.0), e)?;
                continue;
            }
        };
        for &(s, r) in &curve {
            out.push(at("relative_std", r).param(s));
        }
        for (q, level) in [("crossing_epsilon", eps), ("crossing_uniform", uniform)] {
            let c = crossing(&curve, level);
            let r = at(q, nan_or(c)).param(level);
            out.push(if c.is_some() { r } else { r.flag("not_found") });
        }
        eps_crossings.insert(mean.to_bits(), crossing(&curve, eps));
    }

    if let Some((mean, spread)) = g.trace {
        let e = sample_atom_numbers(mean, spread, g.samples, config.seed)?;
        let u = per_cavity_u_eff(&e, spec)?;
        for (i, (n, u)) in e.samples.iter().zip(u).enumerate() {
            let at = |q: &str, v: f64| ResultRecord { atoms: mean, ..st.row(q, v) }.param(i as f64).error(spread);
            out.push(at("trace_atoms", *n as f64));
            out.push(at("trace_u_eff", u));
        }
    }

    let mean = g.window_mean;
    let spread = match g.window_spread {
        Some(s) => Some(s),
        None => match eps_crossings.get(&mean.to_bits()) {
            Some(c) => *c,
            None => {
                let curve = relative_std_curve(mean, &config.glass_spreads(mean), g.samples, config.seed, spec)?;
                crossing(&curve, eps)
            }
        },
    };
    let at = |q: &str, v: f64| ResultRecord { atoms: mean, ..st.row(q, v) };
    let Some(spread) = spread else {
        out.push(at("window_t_low", f64::NAN).flag("no_spread_reaches_epsilon"));
        return Ok(());
    };
    let stats = u_eff_statistics(&sample_atom_numbers(mean, spread, g.samples, config.seed)?, spec)?;
    let w = glass_window(&stats, spec, mean, g.window)?;
    let lit = format!("window={}..{}", g.window.0, g.window.1);
    out.push(at("window_spread", spread));
    out.push(at("window_relative_std", stats.relative_std));
    out.push(at("window_u_mean", w.u_mean));
    out.push(at("window_hop_weight", w.hop_weight));
    out.push(at("window_t_low", w.t_low).param(g.window.0).flag(&lit));
    out.push(at("window_t_high", w.t_high).param(g.window.1).flag(&lit));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::u_eff_resonant_closed_form;
    use crate::site::ModelSpec;
    use approx::assert_abs_diff_eq;

    fn small() -> RunConfig {
        let mut c = RunConfig::default();
        c.model = ModelSpec::model_i_resonant(1).with_cutoff(4);
        c
    }

    fn find<'a>(out: &'a Collector, q: &str) -> Vec<&'a ResultRecord> {
        out.records.iter().filter(|r| r.quantity == q).collect()
    }

    #[test]
    fn zero_hopping_lobe_edges_are_closed_form() {
        let mut c = small();
        c.phase.hoppings = vec![0.0];
        c.phase.lengths = vec![3, 4, 5];
        let mut out = Collector::new(&c);
        phase_diagram(&c, &mut out).unwrap();
        let u = u_eff_resonant_closed_form(1);
        for r in find(&out, "gap") {
            assert_abs_diff_eq!(r.value, u, epsilon = 1e-9);
        }
        for r in find(&out, "compressibility") {
            assert_abs_diff_eq!(r.value, 1.0 / (r.length.unwrap() as f64 * u), epsilon = 1e-8);
        }
        let inf = find(&out, "gap_inf");
        assert_eq!(inf.len(), 1);
        assert_abs_diff_eq!(inf[0].value, u, epsilon = 1e-8);
        assert!(out.failures.is_empty());
    }

    #[test]
    fn empty_grids_give_no_rows() {
        let mut c = small();
        c.phase.hoppings.clear();
        let mut out = Collector::new(&c);
        phase_diagram(&c, &mut out).unwrap();
        assert!(out.records.is_empty());
    }

    #[test]
    fn failures_become_rows_unless_strict() {
        let mut c = small();
        c.single.n_pol = Some(1000);
        let mut out = Collector::new(&c);
        single(&c, Backend::Ed, &mut out).unwrap();
        assert_eq!(out.failures.len(), 1);
        assert!(out.records[0].value.is_nan());
        c.strict = true;
        let mut out = Collector::new(&c);
        assert!(single(&c, Backend::Ed, &mut out).is_err());
    }

    #[test]
    fn zero_hopping_visibility_vanishes() {
        let mut c = small();
        c.visibility.hoppings = vec![0.0];
        c.visibility.lengths = vec![4];
        let mut out = Collector::new(&c);
        visibility_sweep(&c, &mut out).unwrap();
        let v = find(&out, "visibility");
        assert_eq!(v.len(), 1);
        assert_abs_diff_eq!(v[0].value, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn zero_spread_curve_is_zero() {
        let mut c = small();
        c.glass.means = vec![10.0];
        c.glass.spread_points = 3;
        c.glass.samples = 500;
        c.glass.trace = None;
        c.glass.window_spread = Some(2.0);
        let mut out = Collector::new(&c);
        glass(&c, &mut out).unwrap();
        let curve = find(&out, "relative_std");
        assert_eq!(curve[0].param, Some(0.0));
        assert_eq!(curve[0].value, 0.0);
        assert_eq!(find(&out, "window_t_low").len(), 1);
    }
}
