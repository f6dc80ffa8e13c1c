//! End-to-end tests of the command-line interface: file formats, manifest
//! replay, exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kicked-rotor"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
}

#[test]
fn evolve_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "evolve",
        "--k", "4", "--tau", "2", "--M", "50", "--variant", "mkr_sign_flip",
        "--kicks", "200", "--mmax", "256", "--record-every", "20",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let energy = read(&dir.path().join("energy.csv"));
    let first = energy.lines().next().unwrap();
    assert!(first.starts_with("# k=4 tau=2 M=50 variant=mkr_sign_flip kappa=8"));
    assert!(first.contains("kicks=200"));
    assert_eq!(energy.lines().nth(1).unwrap(), "kick,e_tilde");
    // kick 0 through 200 every 20, inclusive
    assert_eq!(energy.lines().count(), 2 + 11);

    let pm = read(&dir.path().join("pm_final.csv"));
    assert_eq!(pm.lines().nth(1).unwrap(), "m,p");
    assert_eq!(pm.lines().count(), 2 + 512);

    let manifest: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("manifest.json"))).unwrap();
    assert_eq!(manifest["config"]["k"], 4.0);
    assert_eq!(manifest["config"]["mode"], "evolve");
    assert!(manifest["outputs"].as_array().unwrap().len() >= 2);
}

#[test]
fn manifest_replay_reproduces_outputs_bit_exactly() {
    let dir_a = tempfile::tempdir().unwrap();
    let out = run(&[
        "evolve",
        "--k", "3", "--tau", "1", "--kicks", "100", "--mmax", "128",
        "--out", dir_a.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let dir_b = tempfile::tempdir().unwrap();
    let out = run(&[
        "run",
        "--config", dir_a.path().join("manifest.json").to_str().unwrap(),
        "--out", dir_b.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    for name in ["energy.csv", "pm_final.csv"] {
        let a = read(&dir_a.path().join(name));
        let b = read(&dir_b.path().join(name));
        assert_eq!(a, b, "{name} must replay bit-exactly");
    }
}

#[test]
fn fit_reads_back_evolve_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "evolve",
        "--k", "4", "--tau", "2", "--kicks", "3000", "--mmax", "512",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let out = run(&[
        "fit",
        "--input", dir.path().join("pm_final.csv").to_str().unwrap(),
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("l = "), "fit should report a length: {stdout}");

    let fits = read(&dir.path().join("fit.csv"));
    assert!(fits.starts_with("k,tau,M,kicks,l,l_inner,l_outer,residual,is_nonexponential"));
    assert_eq!(fits.lines().count(), 2);
}

#[test]
fn spectrum_emits_entropy_and_bandwidth_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "spectrum",
        "--k", "4", "--tau", "2",
        "--ambient", "128", "--d", "32", "--M-list", "1,2",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let entropy = read(&dir.path().join("entropy.csv"));
    assert_eq!(entropy.lines().nth(1).unwrap(), "m_period,entropy");
    assert_eq!(entropy.lines().count(), 4);
    let band = read(&dir.path().join("bandwidth.csv"));
    assert_eq!(band.lines().nth(1).unwrap(), "m_period,band_width");
}

#[test]
fn classical_section_and_island_actions() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "classical",
        "--kappa", "5", "--M", "2", "--action", "section",
        "--n-traj", "16", "--kicks", "50",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let section = read(&dir.path().join("section.csv"));
    assert!(section.lines().next().unwrap().contains("kappa=5"));
    assert_eq!(section.lines().nth(1).unwrap(), "theta,l");
    assert_eq!(section.lines().count(), 2 + 16 * 50);

    let out = run(&[
        "classical",
        "--kappa", "5", "--M", "2", "--action", "island",
        "--l0", "3.14159", "--theta0", "2.4622", "--n-traj", "8", "--kicks", "400",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let island = read(&dir.path().join("island.csv"));
    assert!(island.lines().count() >= 2 + 8);
    assert!(island.contains("true"), "island probe should find transport:\n{island}");
}

#[test]
fn sweep_runs_cross_product_and_fit_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "mode": "sweep",
        "tau": 2.0,
        "kicks": 500,
        "mmax": 256,
        "sweep": { "k": [3.0, 4.0], "M": [1, 2] },
        "out": dir.path().to_str().unwrap(),
        "variant": "mkr_sign_flip",
    });
    let config_path = dir.path().join("sweep.json");
    std::fs::write(&config_path, serde_json::to_string_pretty(&config).unwrap()).unwrap();

    let out = run(&["sweep", "--config", config_path.to_str().unwrap(), "--workers", "2"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let fits = read(&dir.path().join("fits.csv"));
    assert_eq!(fits.lines().count(), 1 + 4, "one row per combination");
    for tag in ["k3_tau2_M1_", "k3_tau2_M2_", "k4_tau2_M1_", "k4_tau2_M2_"] {
        assert!(dir.path().join(format!("{tag}energy.csv")).exists(), "{tag} missing");
        assert!(dir.path().join(format!("{tag}pm_final.csv")).exists());
    }
}

#[test]
fn config_errors_exit_with_code_1() {
    let dir = tempfile::tempdir().unwrap();
    // invalid tau
    let out = run(&[
        "evolve",
        "--tau", "-1",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tau"));

    // malformed flag usage
    let out = run(&["evolve", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));

    // missing config file
    let out = run(&["run", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn overflow_warning_does_not_abort() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "evolve",
        "--k", "4", "--tau", "2", "--kicks", "100", "--mmax", "16",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "warnings must not abort the run");
    assert!(String::from_utf8_lossy(&out.stderr).contains("edge probability"));
    let manifest = read(&dir.path().join("manifest.json"));
    assert!(manifest.contains("edge probability"));
}

#[test]
fn fig_recipe_rejects_unknown_scale() {
    let out = run(&["fig1", "--scale", "huge"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fig3_recipe_writes_both_sections() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "fig3",
        "--scale", "ci",
        "--gnuplot",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    for name in ["fig3_kr_section.csv", "fig3_mkr_section.csv", "fig3.gp"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    let kr = read(&dir.path().join("fig3_kr_section.csv"));
    assert!(kr.lines().next().unwrap().contains("kappa=5"));
    // Both recipes leave a replayable manifest.
    let manifest = read(&dir.path().join("fig3_mkr_manifest.json"));
    assert!(manifest.contains("\"kappa\": 5.0"));
}
