use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cavity_array::sweep::CSV_HEADER;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavity-array")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn path(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

/// Drops the config-hash and code-version columns, which change with the
/// schema of the configuration and the crate version.
fn mask(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            let mut cells: Vec<&str> = line.split(',').collect();
            cells[0] = "*";
            let last = cells.len() - 1;
            cells[last] = "*";
            cells.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn site_table_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "timestamp = 0\n[site]\nmax_sector = 3\nlobes = 2\n");
    let out = cli(&["site", "--config", &config, "--out", &path(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("site.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER.join(","));
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/site.csv");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&golden, &csv).unwrap();
    }
    assert_eq!(mask(&csv), mask(&fs::read_to_string(golden).unwrap()));

    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("site.json")).unwrap()).unwrap();
    assert_eq!(meta["schema_version"], 1);
    assert_eq!(meta["dataset"], "site");
    assert_eq!(meta["config"]["dmrg"]["kept_states"], 64);
}

#[test]
fn glass_output_is_byte_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "timestamp = 0\n[glass]\nmeans = [10.0, 100.0]\nspread_points = 21\nsamples = 3000\ntrace = [100.0, 20.0]\n",
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(cli(&["glass", "--config", &config, "--out", &path(&a), "--workers", "1"]).status.success());
    assert!(cli(&["glass", "--config", &config, "--out", &path(&b), "--workers", "4"]).status.success());
    let x = fs::read(a.join("glass.csv")).unwrap();
    let y = fs::read(b.join("glass.csv")).unwrap();
    assert!(x.len() > 1000);
    assert_eq!(x, y);
}

#[test]
fn empty_sweep_writes_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[phase]\nhoppings = []\n");
    let out = cli(&["phase-diagram", "--config", &config, "--out", &path(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("phase-diagram.csv")).unwrap();
    assert_eq!(csv, format!("{}\n", CSV_HEADER.join(",")));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = path(dir.path());
    let config = write_config(dir.path(), "no_such_key = 1\n");
    assert_eq!(cli(&["site", "--config", &config, "--out", &out_dir]).status.code(), Some(2));
    assert_eq!(cli(&["site", "--backend", "quantum", "--out", &out_dir]).status.code(), Some(2));
    assert_eq!(cli(&["site", "--config", "/nonexistent/run.toml"]).status.code(), Some(2));
    assert_eq!(cli(&["dmrg", "--kept-states", "2", "--out", &out_dir]).status.code(), Some(2));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn strict_mode_fails_unconverged_runs_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[model]\natoms = 1\nphoton_cutoff = 3\ncouplings = { model = \"I\", epsilon = 1.0, omega = 1.0, beta = 1.0 }\n\
         [dmrg]\nsweeps = 2\ntruncation_weight_cap = 1e-300\n",
    );
    let base = ["dmrg", "--config", &config, "--length", "10", "--hopping", "0.2", "--kept-states", "8"];
    let relaxed = cli(&[&base[..], &["--out", &path(&dir.path().join("r"))]].concat());
    assert_eq!(relaxed.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("r/dmrg.csv")).unwrap();
    assert!(csv.contains("not_converged"));
    let strict = cli(&[&base[..], &["--strict", "--out", &path(&dir.path().join("s"))]].concat());
    assert_eq!(strict.status.code(), Some(3), "{}", String::from_utf8_lossy(&strict.stderr));
}

#[test]
fn ed_and_dmrg_commands_agree() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = path(dir.path());
    let args = ["--length", "6", "--hopping", "0.1", "--max-photons", "3", "--out", &out_dir];
    assert!(cli(&[&["ed"][..], &args].concat()).status.success());
    assert!(cli(&[&["dmrg"][..], &args].concat()).status.success());
    let energy = |name: &str| -> f64 {
        let mut reader = csv::Reader::from_path(dir.path().join(name)).unwrap();
        let row = reader.records().map(|r| r.unwrap()).find(|r| &r[6] == "energy").unwrap();
        row[8].parse().unwrap()
    };
    let (e, d) = (energy("ed.csv"), energy("dmrg.csv"));
    assert!((e - d).abs() <= 1e-8 * e.abs().max(1.0), "{e} vs {d}");
}
