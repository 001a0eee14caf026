#[path = "../examples/site_spectra.rs"]
mod site_spectra;

#[test]
fn site_spectra_runs() {
    site_spectra::run_example().expect("site_spectra example should run");
}

#[path = "../examples/ed_vs_dmrg.rs"]
mod ed_vs_dmrg;

#[test]
fn ed_vs_dmrg_runs() {
    ed_vs_dmrg::run_example().expect("ed_vs_dmrg example should run");
}

#[path = "../examples/phase_diagram.rs"]
mod phase_diagram;

#[test]
fn phase_diagram_runs() {
    phase_diagram::run_example().expect("phase_diagram example should run");
}

#[path = "../examples/visibility.rs"]
mod visibility;

#[test]
fn visibility_runs() {
    visibility::run_example().expect("visibility example should run");
}

#[path = "../examples/tstar_scaling.rs"]
mod tstar_scaling;

#[test]
fn tstar_scaling_runs() {
    tstar_scaling::run_example().expect("tstar_scaling example should run");
}

#[path = "../examples/detuning.rs"]
mod detuning;

#[test]
fn detuning_runs() {
    detuning::run_example().expect("detuning example should run");
}

#[path = "../examples/glass.rs"]
mod glass;

#[test]
fn glass_runs() {
    glass::run_example().expect("glass example should run");
}
