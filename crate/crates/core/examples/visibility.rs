//! Momentum distribution and visibility in the first lobe of Model I
//! (N = 1) from DMRG, deep in the insulator and near the superfluid edge.
//!
//! ```bash
//! cargo run --release --example visibility
//! ```

use cavity_array::dmrg::{dmrg_ground_state, DmrgParams};
use cavity_array::lattice::LatticeSpec;
use cavity_array::observables::{momentum_distribution, visibility};
use cavity_array::site::ModelSpec;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ModelSpec::model_i_resonant(1).with_cutoff(4);
    let params = DmrgParams::default().with_kept_states(32);
    for t in [0.01, 0.1, 0.2] {
        let chain = LatticeSpec::uniform(spec, 12, t);
        let gs = dmrg_ground_state(&chain, 12, &params)?;
        let s = momentum_distribution(&gs.photon_correlations()?)?;
        let shape: Vec<String> = s.values.iter().map(|v| format!("{v:.3}")).collect();
        println!("t = {t:.2}: V = {:.4}, S(k) = [{}]", visibility(&s)?, shape.join(", "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
