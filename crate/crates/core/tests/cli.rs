use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_place-ifs"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.scenario"))
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin().args(args).arg("--config").arg(config).arg("--out").arg(out).output().unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn converge_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&["converge"], &scenario("canonical"), &a).status.success());
    assert!(run(&["converge", "--threads", "2"], &scenario("canonical"), &b).status.success());
    assert_eq!(std::fs::read(a.join("convergence.csv")).unwrap(), std::fs::read(b.join("convergence.csv")).unwrap());
    let csv = std::fs::read_to_string(a.join("convergence.csv")).unwrap();
    assert!(csv.starts_with("n,fm,w1,replicas,noise_floor\n"));
    assert_eq!(csv.lines().count(), 42);
    assert!(!csv.contains('\r'));
}

#[test]
fn strict_check_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&["check", "--strict"], &scenario("identity"), tmp.path()).status.code(), Some(3));
    assert_eq!(run(&["check"], &scenario("identity"), tmp.path()).status.code(), Some(0));
    assert_eq!(run(&["check", "--strict"], &scenario("canonical"), tmp.path()).status.code(), Some(0));
    let r = run(&["check", "--strict", "--corollary"], &scenario("example-paper-p"), tmp.path());
    assert_eq!(r.status.code(), Some(3));
    let report = std::fs::read_to_string(tmp.path().join("report.txt")).unwrap();
    assert!(report.contains("\ndelta = 0.0000000000000000e0\n"), "{report}");
    assert!(report.contains("pass.b4 = false"));
}

#[test]
fn malformed_scenario_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("canonical")).unwrap().replace("Q = [1.0]", "Q = [1.0, 0.0]");
    let bad = tmp.path().join("bad.scenario");
    std::fs::write(&bad, text).unwrap();
    let r = run(&["simulate"], &bad, &tmp.path().join("out"));
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("system.maps[1].Q"));

    let r = run(&["simulate", "--set", "experiment.beta=1.5"], &scenario("canonical"), &tmp.path().join("out"));
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("experiment.beta"));
}

#[test]
fn other_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(&["perpetuity"], &scenario("canonical"), tmp.path());
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("mixture_affine"));
}

#[test]
fn zero_steps_writes_initial_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(&["simulate", "--steps", "0", "--set", "experiment.paths=7"], &scenario("canonical"), tmp.path());
    assert!(r.status.success());
    let csv = std::fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 7);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(*row, format!("{k},0,-5.0000000000000000e0,"));
    }
}

#[test]
fn overrides_land_in_the_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(
        &["couple", "--seed", "99", "--replicas", "300", "--set", "experiment.horizon=50", "--set", "system.weights.lo=0.1"],
        &scenario("canonical"),
        tmp.path(),
    );
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let m = manifest(tmp.path());
    assert_eq!(m["subcommand"], "couple");
    assert_eq!(m["scenario"]["seed"], 99);
    assert_eq!(m["scenario"]["experiment"]["replicas"], 300);
    assert_eq!(m["scenario"]["experiment"]["horizon"], 50);
    assert_eq!(m["scenario"]["system"]["weights"]["lo"], 0.1);
    assert_eq!(m["artifact_version"], env!("CARGO_PKG_VERSION"));
    let times = std::fs::read_to_string(tmp.path().join("stopping_times.csv")).unwrap();
    assert_eq!(times.lines().count(), 1 + 300 * 4);
}

#[test]
fn manifest_replays_every_file() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let args = ["invariant", "--burn-in", "50", "--set", "experiment.samples=500"];
    assert!(run(&args, &scenario("canonical"), &a).status.success());
    assert!(run(&["invariant"], &a.join("manifest.json"), &b).status.success());
    for f in ["invariant.csv", "report.txt", "manifest.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let weights: f64 = std::fs::read_to_string(a.join("invariant.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((weights - 1.0).abs() < 1e-12);
}

#[test]
fn perpetuity_series() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "seed = 3\ndim = 1\n[system]\nkind = \"mixture_affine\"\ncomponents = [ { atoms = [ { M = [[0.5]], Q = [1.0], w = 1.0 } ] } ]\n[system.weights]\nkind = \"constant\"\nprobs = [1.0]\n[experiment]\nsteps = 60\npaths = 2\nx0 = [0.0]\n";
    let path = tmp.path().join("halving.scenario");
    std::fs::write(&path, text).unwrap();
    assert!(run(&["perpetuity"], &path, &tmp.path().join("o")).status.success());
    let csv = std::fs::read_to_string(tmp.path().join("o/perpetuity.csv")).unwrap();
    let last_phi = csv.lines().find(|l| l.starts_with("0,phi,60,")).unwrap();
    let last_psi = csv.lines().find(|l| l.starts_with("0,psi,60,")).unwrap();
    for line in [last_phi, last_psi] {
        let v: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }
    // place-dependent weights: only the forward series
    assert!(run(&["perpetuity"], &scenario("example"), &tmp.path().join("e")).status.success());
    let csv = std::fs::read_to_string(tmp.path().join("e/perpetuity.csv")).unwrap();
    assert!(csv.contains(",phi,") && !csv.contains(",psi,"));
}
