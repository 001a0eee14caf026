//! The same short chain solved by exact diagonalization and by DMRG, with
//! the photon correlations of both.
//!
//! ```bash
//! cargo run --release --example ed_vs_dmrg
//! ```

use cavity_array::dmrg::{dmrg_ground_state, DmrgParams};
use cavity_array::lattice::{solve_sector, LatticeSpec};
use cavity_array::observables::{momentum_distribution, visibility};
use cavity_array::site::ModelSpec;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ModelSpec::model_i_resonant(1).with_cutoff(4);
    for t in [0.0, 0.05, 0.1] {
        let chain = LatticeSpec::uniform(spec, 6, t);
        let exact = solve_sector(&chain, 6, 1e-12)?;
        let dmrg = dmrg_ground_state(&chain, 6, &DmrgParams::default())?;
        let report = dmrg.dmrg.as_ref().expect("DMRG report");
        println!(
            "t = {t:.2}: E_ed = {:.12}, E_dmrg = {:.12}, diff {:.1e}, {} sweeps",
            exact.energy,
            dmrg.energy,
            (exact.energy - dmrg.energy).abs() / exact.energy.abs().max(1.0),
            report.sweep_energies.len()
        );
        let v_ed = visibility(&momentum_distribution(&exact.photon_correlations()?)?)?;
        let v_dmrg = visibility(&momentum_distribution(&dmrg.photon_correlations()?)?)?;
        println!("          V_ed = {v_ed:.8}, V_dmrg = {v_dmrg:.8}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
