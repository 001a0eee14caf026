//! Critical-hopping estimate `0.3 U_eff(1) / w(0)` against the atom number
//! and its power-law exponent for both models.
//!
//! ```bash
//! cargo run --release --example tstar_scaling
//! ```

use cavity_array::effective::{power_law_exponent, t_star_estimate};
use cavity_array::site::ModelSpec;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for (name, template) in [("I", ModelSpec::model_i_resonant(1)), ("II", ModelSpec::model_ii_resonant(1))] {
        let mut points = Vec::new();
        for n in 1..=100u32 {
            points.push((n as f64, t_star_estimate(&template.with_atoms(n))?));
        }
        let tail: Vec<_> = points.iter().copied().filter(|p| p.0 >= 50.0).collect();
        println!(
            "model {name}: t*(1) = {:.5}, t*(100) = {:.5}, exponent over 1..100 = {:.4}, over 50..100 = {:.4}",
            points[0].1,
            points[99].1,
            power_law_exponent(&points)?,
            power_law_exponent(&tail)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
