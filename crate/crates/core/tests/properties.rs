use std::f64::consts::PI;

use proptest::prelude::*;

use cavity_array::dmrg::{dmrg_ground_state, DmrgParams};
use cavity_array::glass::{relative_std_curve, sample_atom_numbers};
use cavity_array::lattice::{assemble_hamiltonian, enumerate_sector, sector_dimension, solve_sector, LatticeSpec};
use cavity_array::observables::{compressibility, momentum_distribution, EnergyTable};
use cavity_array::site::{
    local_photon_creation, local_photon_operator, sector_block, sector_states, SiteBasis, ModelSpec,
};
use nalgebra::{DMatrix, SymmetricEigen};

fn model() -> impl Strategy<Value = ModelSpec> {
    prop_oneof![
        (1u32..=4, 0.5f64..1.5, 0.5f64..1.5, 0.2f64..2.0, 2u32..=5)
            .prop_map(|(n, e, w, b, c)| ModelSpec::model_i(n, e, w, b, c)),
        (1u32..=3, -1.0f64..1.0, -1.0f64..1.0, 0.2f64..2.0, 0.2f64..2.0, 2u32..=4)
            .prop_map(|(n, d, dd, r, g, c)| ModelSpec::model_ii(n, d, dd, r, g, c)),
    ]
}

fn symmetric(l: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(-1.0f64..1.0, l * l).prop_map(move |v| {
        let mut m = vec![vec![0.0; l]; l];
        for j in 0..l {
            for k in 0..l {
                m[j][k] = v[j * l + k] + v[k * l + j];
            }
        }
        m
    })
}

fn brute_force(corr: &[Vec<f64>]) -> Vec<f64> {
    let l = corr.len();
    (0..l)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, row) in corr.iter().enumerate() {
                for (m, c) in row.iter().enumerate() {
                    let phase = 2.0 * PI * k as f64 * (j as f64 - m as f64) / l as f64;
                    re += phase.cos() * c;
                    im += phase.sin() * c;
                }
            }
            assert!(im.abs() < 1e-9);
            re / l as f64
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn local_blocks_are_hermitian_and_graded(spec in model()) {
        for q in 0..=spec.max_excitation() {
            let states = sector_states(&spec, q);
            prop_assert!(states.iter().all(|s| s.excitation() == q));
            if states.is_empty() {
                continue;
            }
            let h = sector_block(&spec, &states);
            prop_assert!((&h - h.transpose()).amax() <= 1e-12 * h.amax().max(1.0));
        }
        let basis = SiteBasis::build(&spec).unwrap();
        let a = local_photon_operator(&basis).to_dense();
        let ad = local_photon_creation(&basis).to_dense();
        prop_assert!((a.transpose() - ad).amax() < 1e-12);
    }

    #[test]
    fn chain_hamiltonian_is_hermitian(spec in model(), l in 2usize..=4, t in 0.0f64..0.5, fill in 0u32..=6) {
        let lat = LatticeSpec::uniform(spec, l, t);
        let n = fill.min(lat.capacity());
        let sector = enumerate_sector(&lat, n).unwrap();
        prop_assert_eq!(sector.len() as u128, sector_dimension(&lat, n).unwrap());
        let h = assemble_hamiltonian(&lat, &sector, 0.0).unwrap();
        prop_assert!(h.hermiticity_defect() <= 1e-12);
    }

    #[test]
    fn ground_state_stays_in_its_sector_with_psd_correlations(
        spec in model(), l in 2usize..=4, t in 0.0f64..0.3,
    ) {
        let lat = LatticeSpec::uniform(spec.with_cutoff(spec.photon_cutoff.min(3)), l, t);
        let n = l as u32;
        let gs = solve_sector(&lat, n, 1e-10).unwrap();
        let total: f64 = gs.site_excitations().unwrap().iter().sum();
        prop_assert!((total - n as f64).abs() < 1e-9);
        let c = gs.photon_correlations().unwrap();
        let m = DMatrix::from_fn(l, l, |i, j| c[i][j]);
        let eig = SymmetricEigen::new(m);
        prop_assert!(eig.eigenvalues.iter().all(|&v| v > -1e-9), "{:?}", eig.eigenvalues);
    }

    #[test]
    fn momentum_distribution_matches_direct_sum(corr in (1usize..=9).prop_flat_map(symmetric)) {
        let fast = momentum_distribution(&corr).unwrap();
        let slow = brute_force(&corr);
        let l = corr.len();
        for k in 0..l {
            prop_assert!((fast.values[k] - slow[k]).abs() <= 1e-12);
            prop_assert!((fast.values[k] - fast.values[(l - k) % l]).abs() <= 1e-12);
        }
    }

    #[test]
    fn compressibility_is_inverse_gap_per_site(
        l in 2usize..64, e0 in -5.0f64..5.0, lo in 0.01f64..2.0, hi in 0.01f64..2.0,
    ) {
        let n = l as u32;
        let table: EnergyTable = [(n - 1, e0 - lo), (n, e0), (n + 1, e0 + hi)].into_iter().collect();
        let k = compressibility(&table, n, l).unwrap();
        let gap = (table[&(n + 1)] - table[&n]) - (table[&n] - table[&(n - 1)]);
        prop_assert!((k.value - 1.0 / (l as f64 * gap)).abs() <= 1e-12 * k.value);
    }

    #[test]
    fn glass_sampling_is_deterministic(mean in 1.0f64..500.0, spread in 0.0f64..50.0, seed in any::<u64>()) {
        let a = sample_atom_numbers(mean, spread, 5000, seed).unwrap();
        let b = sample_atom_numbers(mean, spread, 5000, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn interaction_spread_grows_with_atom_spread(mean in 50.0f64..500.0, frac in 0.02f64..0.15) {
        let spec = ModelSpec::model_i_resonant(1);
        let s = mean * frac;
        let curve = relative_std_curve(mean, &[0.0, s, 2.0 * s], 4000, 7, &spec).unwrap();
        prop_assert_eq!(curve[0].1, 0.0);
        prop_assert!(curve[1].1 > 0.0 && curve[2].1 > curve[1].1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn dmrg_is_variational_and_improves_with_kept_states(t in 0.02f64..0.3, n in 5u32..=7) {
        let lat = LatticeSpec::uniform(ModelSpec::model_i_resonant(1).with_cutoff(3), 6, t);
        let exact = solve_sector(&lat, n, 1e-12).unwrap().energy;
        let mut previous = f64::INFINITY;
        for m in [8, 16, 64] {
            let e = dmrg_ground_state(&lat, n, &DmrgParams::default().with_kept_states(m)).unwrap().energy;
            prop_assert!(e >= exact - 1e-9 * exact.abs().max(1.0), "m = {m}: {e} below {exact}");
            prop_assert!(e <= previous + 1e-9 * exact.abs().max(1.0), "m = {m}: {e} above {previous}");
            previous = e;
        }
        prop_assert!((previous - exact).abs() <= 1e-6 * exact.abs().max(1.0));
    }

    #[test]
    fn dmrg_is_deterministic(t in 0.0f64..0.3) {
        let lat = LatticeSpec::uniform(ModelSpec::model_i_resonant(1).with_cutoff(3), 8, t);
        let p = DmrgParams::default().with_kept_states(16);
        let a = dmrg_ground_state(&lat, 8, &p).unwrap();
        let b = dmrg_ground_state(&lat, 8, &p).unwrap();
        prop_assert_eq!(a.energy.to_bits(), b.energy.to_bits());
        prop_assert_eq!(a.photon_correlations().unwrap(), b.photon_correlations().unwrap());
    }
}
