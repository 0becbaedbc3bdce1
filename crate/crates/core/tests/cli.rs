use std::path::Path;
use std::process::Command;

use zrlab::cli::cli_main;
use zrlab::output::parse_fit_text;
use zrlab::record::Verdict;

fn run_in(dir: &Path, args: &[&str]) -> i32 {
    let out = format!("output.dir={}", dir.display());
    let mut argv = vec!["zrlab"];
    argv.extend_from_slice(args);
    argv.extend(["--set", out.as_str(), "--quiet"]);
    cli_main(argv)
}

#[test]
fn conserve_with_config_file_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ok.cfg");
    std::fs::write(
        &cfg,
        "[grid]\nn = 256\nlength = 64\n\n[stepper]\nt_end = 0.5\n\n[experiment]\nkind = conserve\n",
    )
    .unwrap();
    assert_eq!(run_in(dir.path(), &["conserve", "--config", cfg.to_str().unwrap()]), 0);
    assert!(dir.path().join("conserve.csv").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("conserve.json")).unwrap()).unwrap();
    assert_eq!(manifest["exit_code"], 0);
    assert_eq!(manifest["spec"]["grid"]["n"], 256);
    assert_eq!(manifest["grid_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn manifest_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["simulate", "--set", "stepper.t_end=0.3"]), 0);
    let csv = std::fs::read(dir.path().join("simulate.csv")).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("simulate.json")).unwrap()).unwrap();
    let cfg = dir.path().join("again.cfg");
    std::fs::write(&cfg, manifest["config"].as_str().unwrap()).unwrap();
    let again = dir.path().join("again");
    assert_eq!(run_in(&again, &["simulate", "--config", cfg.to_str().unwrap()]), 0);
    assert_eq!(std::fs::read(again.join("simulate.csv")).unwrap(), csv);
}

#[test]
fn hypothesis_violation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["inflate", "--set", "experiment.l=-1"]), 1);
    assert!(!dir.path().join("inflate.csv").exists());
}

#[test]
fn c2probe_preset_writes_fit_file() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["c2probe"]), 0);
    let text = std::fs::read_to_string(dir.path().join("c2probe_fit_norm.dat")).unwrap();
    assert!(text.starts_with("logN,lognorm,fit\n"));
}

#[test]
fn inflation_fit_file_footer_matches_points() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["inflate", "--set", "experiment.n_list=16,32,64,128"]), 0);
    let text = std::fs::read_to_string(dir.path().join("inflate_fit_solver.dat")).unwrap();
    let (stored, recomputed) = parse_fit_text(&text).unwrap();
    assert_eq!(stored.points.len(), 4);
    assert!((stored.slope - recomputed.slope).abs() < 1e-12);
    assert!((stored.intercept - recomputed.intercept).abs() < 1e-12);
    assert!(text.lines().last().unwrap().starts_with("# slope="));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(cli_main(["zrlab", "bogus"]), 1);
    assert_eq!(cli_main(["zrlab", "conserve", "--nope"]), 1);
    assert_eq!(cli_main(["zrlab"]), 1);
    assert_eq!(cli_main(["zrlab", "conserve", "--set", "grid.colour=red"]), 1);
    assert_eq!(cli_main(["zrlab", "conserve", "--config", "/nonexistent/zr.cfg"]), 1);
}

#[test]
fn verdict_exit_codes() {
    assert_eq!(Verdict::Complete.exit_code(), 0);
    assert_eq!(Verdict::Pass.exit_code(), 0);
    assert_eq!(Verdict::Inconclusive("r^2".into()).exit_code(), 2);
    assert_eq!(Verdict::Fail("x".into()).exit_code(), 1);
}

#[test]
fn binary_reports_usage() {
    let bin = env!("CARGO_BIN_EXE_zrlab");
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert!(help.status.success());
    let text = String::from_utf8_lossy(&help.stdout);
    for sub in ["simulate", "conserve", "inflate", "c2probe", "decohere", "growth"] {
        assert!(text.contains(sub), "{sub} missing from usage");
    }
    assert_eq!(Command::new(bin).arg("frobnicate").status().unwrap().code(), Some(1));
}
