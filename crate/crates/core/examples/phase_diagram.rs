//! First Mott lobe of Model I (N = 1): chemical potentials per length,
//! their 1/L extrapolation and the compressibility. Writes
//! `phase-diagram.{csv,json}` under the system temp directory.
//!
//! ```bash
//! cargo run --release --example phase_diagram
//! ```

use cavity_array::site::ModelSpec;
use cavity_array::sweep::{run_and_write, Dataset, RunConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = RunConfig::default();
    config.model = ModelSpec::model_i_resonant(1).with_cutoff(4);
    config.out = std::env::temp_dir().join("cavity-array-example-phase");
    config.phase.hoppings = vec![0.0, 0.05, 0.1];
    config.phase.lengths = vec![4, 6, 8];
    let (output, written) = run_and_write(Dataset::PhaseDiagram, &config)?;
    for r in output.find("gap_inf") {
        println!(
            "t = {:.2}: extrapolated gap {:.6} +- {:.6} [{}]",
            r.hopping.unwrap_or(0.0),
            r.value,
            r.error.unwrap_or(f64::NAN),
            r.flags
        );
    }
    for r in output.find("compressibility").filter(|r| r.length == Some(8)) {
        println!("t = {:.2}, L = 8: kappa = {:.6}", r.hopping.unwrap_or(0.0), r.value);
    }
    println!("wrote {}", written.csv.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
