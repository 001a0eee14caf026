//! Interaction disorder induced by atom-number disorder and the hopping
//! window of the glass phase at <N> = 100.
//!
//! ```bash
//! cargo run --release --example glass
//! ```

use cavity_array::glass::{
    crossing, glass_window, reference_levels, relative_std_curve, sample_atom_numbers, u_eff_statistics,
    LITERATURE_WINDOW, REFERENCE_EPSILON,
};
use cavity_array::site::ModelSpec;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ModelSpec::model_i_resonant(1);
    let (eps, uniform) = reference_levels(REFERENCE_EPSILON);
    let seed = 2024;
    for mean in [1.0, 10.0, 100.0, 1000.0] {
        let spreads: Vec<f64> = (0..=80).map(|i| mean * 2.0 * i as f64 / 80.0).collect();
        let curve = relative_std_curve(mean, &spreads, 10_000, seed, &spec)?;
        println!(
            "<N> = {mean:>6}: dU/U reaches {eps:.3} at dN = {:.2} and {uniform:.3} at dN = {:.2}",
            crossing(&curve, eps).unwrap_or(f64::NAN),
            crossing(&curve, uniform).unwrap_or(f64::NAN)
        );
    }
    for spread in [19.0, 31.5] {
        let stats = u_eff_statistics(&sample_atom_numbers(100.0, spread, 10_000, seed)?, &spec)?;
        let w = glass_window(&stats, &spec, 100.0, LITERATURE_WINDOW)?;
        println!(
            "<N> = 100, dN = {spread}: dU/U = {:.4}, window t in [{:.4e}, {:.4e}]",
            stats.relative_std, w.t_low, w.t_high
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
