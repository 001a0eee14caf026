//! Lobe widths and `t*` against the cavity detuning for Model I, and the
//! detuning beyond which the `rho = N` lobe dominates.
//!
//! ```bash
//! cargo run --release --example detuning
//! ```

use cavity_array::effective::{
    crossover_detuning, default_lobes, detuning_sweep, power_law_exponent, DetuningQuantity, CROSSOVER_FACTOR,
};
use cavity_array::site::ModelSpec;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ModelSpec::model_i_resonant(3);
    let grid = [0.0, 2.0, 5.0, 10.0];
    for p in detuning_sweep(&spec, &grid, DetuningQuantity::LobeWidths, 4)? {
        let widths: Vec<String> = p.values.iter().map(|w| format!("{w:.4}")).collect();
        println!("N = 3, detuning {:>4.1}: lobe widths [{}]", p.detuning, widths.join(", "));
    }
    let ten = ModelSpec::model_i_resonant(10);
    for p in detuning_sweep(&ten, &[-2.0, 0.0, 2.0], DetuningQuantity::TStar, 1)? {
        println!("N = 10, detuning {:>4.1}: t* = {:.5}", p.detuning, p.values[0]);
    }
    let mut points = Vec::new();
    for n in [2u32, 4, 8, 16] {
        let s = ModelSpec::model_i_resonant(n);
        if let Some(d) = crossover_detuning(&s, default_lobes(&s), CROSSOVER_FACTOR, 0.25, 200.0, 1e-6)? {
            println!("N = {n:>2}: crossover detuning {d:.4}");
            points.push((n as f64, d));
        }
    }
    println!("crossover exponent {:.3}", power_law_exponent(&points)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
