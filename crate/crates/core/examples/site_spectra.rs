//! Single-cavity spectra and the effective Bose-Hubbard parameters of
//! both models.
//!
//! ```bash
//! cargo run --release --example site_spectra
//! ```

use cavity_array::effective::{effective_parameters, u_eff_resonant_closed_form};
use cavity_array::site::{site_ground_energy, ModelSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for atoms in [1, 2, 5] {
        let spec = ModelSpec::model_i_resonant(atoms);
        let e1 = site_ground_energy(&spec, 1)?;
        let e2 = site_ground_energy(&spec, 2)?;
        let n = atoms as f64;
        println!(
            "model I, N = {atoms}: E(1) = {e1:.12} (closed form {:.12}), E(2) = {e2:.12} (closed form {:.12})",
            1.0 - n.sqrt(),
            2.0 - (4.0 * n - 2.0).sqrt()
        );
        let p = effective_parameters(&spec, 2)?;
        println!(
            "    U_eff(1) = {:.12} (closed form {:.12}), w(0) = {:.6}, t* = {:.6}",
            p.u_eff[0].1,
            u_eff_resonant_closed_form(atoms),
            p.hop_weight[0].1,
            p.t_star
        );
    }
    for atoms in [1, 2, 5] {
        let p = effective_parameters(&ModelSpec::model_ii_resonant(atoms), 2)?;
        println!(
            "model II, N = {atoms}: U_eff(1) = {:.6}, w(0) = {:.6} (N/(2(N+1)) = {:.6}), t* = {:.6}",
            p.u_eff[0].1,
            p.hop_weight[0].1,
            atoms as f64 / (2.0 * (atoms as f64 + 1.0)),
            p.t_star
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
