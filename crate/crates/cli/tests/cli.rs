use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_metagrav"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn list_shows_every_scenario() {
    let o = run(&["list"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["analytic", "thresholds", "localization", "decohere", "spread", "ehrenfest", "groundstate-radial"] {
        assert!(text.lines().any(|l| l == name), "{name} missing from\n{text}");
    }
}

#[test]
fn passing_run_writes_outputs_and_exits_zero() {
    let out = tempfile::tempdir().unwrap();
    let cfg = configs().join("analytic.conf");
    let o = run(&["analytic", "--config", cfg.to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = fs::read_to_string(out.path().join("summary.json")).unwrap();
    assert!(summary.contains("\"passed\": true"), "{summary}");
    assert!(out.path().join("scales.csv").exists());
}

#[test]
fn threshold_scan_has_documented_columns() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["thresholds", "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(out.path().join("thresholds.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "mass_mp,lambda_cm,ebind_erg,freq_hz,coh_len_cm,radius_cm,tau_s,a_cm,regime"
    );
    assert_eq!(csv.lines().count(), 242);
}

#[test]
fn failed_checks_exit_two_and_still_write() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["thresholds", "--set", "instantaneous_low_mp=1e20", "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("FAIL instantaneous_threshold_mp"));
    let summary = fs::read_to_string(out.path().join("summary.json")).unwrap();
    assert!(summary.contains("\"passed\": false"));
}

#[test]
fn misspelled_key_names_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "# scales\nmass_mp = 1e12\ndensty_mp_cm3 = 1e24\n").unwrap();
    let o = run(&["analytic", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("line 3") && err.contains("densty_mp_cm3"), "{err}");
    assert!(!dir.path().join("summary.json").exists());
}

#[test]
fn all_config_problems_are_reported_together() {
    let o = run(&["decohere", "--set", "points=300", "--set", "periods=-1", "--print-config"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("`points`") && err.contains("`periods`"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["nope", "--out", "/tmp"]).status.code(), Some(1));
    assert_eq!(run(&["analytic", "--set", "mass_mp=1e12"]).status.code(), Some(1));
    assert_eq!(run(&["analytic", "--set", "mass_mp"]).status.code(), Some(1));
}

#[test]
fn unconverged_ground_state_exits_three() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&[
        "localization",
        "--set",
        "potential=harmonic",
        "--set",
        "radius=10",
        "--set",
        "max_steps=20",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("no convergence"));
}

#[test]
fn printed_config_reads_back_unchanged() {
    let first = run(&["spread", "--set", "radius=2e4", "--print-config"]);
    assert!(first.status.success());
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("echo.conf");
    fs::write(&cfg, &first.stdout).unwrap();
    let second = run(&["spread", "--config", cfg.to_str().unwrap(), "--print-config"]);
    assert!(second.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert!(String::from_utf8_lossy(&first.stdout).contains("radius = 20000"));
}

#[test]
fn command_line_overrides_file_values() {
    let cfg = configs().join("analytic.conf");
    let o = run(&["analytic", "--config", cfg.to_str().unwrap(), "--set", "alpha=2", "--print-config"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).lines().any(|l| l == "alpha = 2"));
}

#[test]
fn reruns_and_thread_counts_give_identical_bytes() {
    let cfg = configs().join("localization-harmonic.conf");
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (d, threads) in dirs.iter().zip(["1", "4", "4"]) {
        let o = bin()
            .args(["localization", "--config", cfg.to_str().unwrap(), "--out", d.path().to_str().unwrap()])
            .env("METAGRAV_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let first = read_dir_sorted(dirs[0].path());
    assert!(!first.is_empty());
    for d in &dirs[1..] {
        assert_eq!(first, read_dir_sorted(d.path()));
    }
}

#[test]
fn every_shipped_config_validates() {
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
        let scenario = stem.trim_end_matches("-harmonic").trim_end_matches("-sphere");
        let o = run(&[scenario, "--config", path.to_str().unwrap(), "--print-config"]);
        assert!(o.status.success(), "{}: {}", path.display(), stderr(&o));
    }
}
