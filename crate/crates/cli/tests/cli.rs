use std::path::Path;
use std::process::{Command, Output};

fn slowmix(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slowmix")).arg("--out").arg(out).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

#[test]
fn malformed_key_exits_1_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "preset=desk\nno_such_key=3\n").unwrap();
    let o = slowmix(&out, &["--config", cfg.to_str().unwrap(), "gen-vector"]);
    assert_eq!(code(&o), 1);
    assert!(!out.exists());
    std::fs::write(&cfg, "max_level\n").unwrap();
    assert_eq!(code(&slowmix(&out, &["--config", cfg.to_str().unwrap(), "gen-vector"])), 1);
    assert!(!out.exists());
}

#[test]
fn environment_keys_are_checked() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_slowmix"))
        .arg("--out")
        .arg(dir.path())
        .arg("gen-vector")
        .env("SLOWMIX_NOT_A_KEY", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn exponential_growth_first_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = slowmix(dir.path(), &["--set", "growth=exponential", "--set", "first_quotient=3", "--set", "max_level=1", "--set", "n_max=1", "gen-vector"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let conv = std::fs::read_to_string(dir.path().join("convergents.csv")).unwrap();
    assert!(conv.lines().any(|l| l == "y,1,1,8104"), "{conv}");
}

#[test]
fn capacity_exceeded_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = slowmix(dir.path(), &["--set", "growth=exponential", "--set", "first_quotient=5", "--set", "max_level=1", "--set", "n_max=1", "gen-vector"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missing_and_corrupted_artifacts_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&slowmix(dir.path(), &["build-ceiling"])), 1);
    assert_eq!(code(&slowmix(dir.path(), &["verify"])), 1);
    std::fs::write(dir.path().join("vector.txt"), "format=slowmix-vector-1\nbits=256\nalpha=0 2 x\nalpha_prime=0 1\n").unwrap();
    let o = slowmix(dir.path(), &["build-ceiling"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("corrupted"));
}

#[test]
fn single_level_build_and_tampered_table() {
    let dir = tempfile::tempdir().unwrap();
    let small = ["--set", "grid=500", "--set", "random=500", "--set", "n0=1", "--set", "n_max=1"];
    let run = |extra: &[&str]| slowmix(dir.path(), &[&small[..], extra].concat());
    assert_eq!(code(&run(&["gen-vector"])), 0);
    let o = run(&["build-ceiling"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let ceiling = std::fs::read_to_string(dir.path().join("ceiling.txt")).unwrap();
    assert!(ceiling.contains("n0=1\nn_max=1\n"));
    let report = std::fs::read_to_string(dir.path().join("build-ceiling.report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert!(v["reports"].as_array().unwrap().iter().any(|r| r["id"] == "xtilde.mean.n1"));

    // Changing the table invalidates the recorded digest.
    let path = dir.path().join("coefficients.csv");
    let mut table = std::fs::read_to_string(&path).unwrap();
    table.push_str("1,x,0,0,0.0,0.0\n");
    std::fs::write(&path, table).unwrap();
    assert_eq!(code(&run(&["verify"])), 1);
}

#[test]
fn positivity_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&slowmix(dir.path(), &["gen-vector"])), 0);
    let o = slowmix(dir.path(), &["--set", "sx=5", "build-ceiling"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("level"));
}

#[test]
fn zero_observable_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let small = ["--set", "n_max=1", "--set", "grid=500", "--set", "random=500"];
    let run = |extra: &[&str]| slowmix(dir.path(), &[&small[..], extra].concat());
    assert_eq!(code(&run(&["gen-vector"])), 0);
    assert_eq!(code(&run(&["build-ceiling"])), 0);
    let o = run(&["--set", "observable=char:0:0", "spectrum"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("zero norm"));
}

#[test]
fn unit_ceiling_moves_linearly() {
    // A one-level ceiling with zero amplitudes is identically 1: the flow is a linear translation.
    let dir = tempfile::tempdir().unwrap();
    let flat = ["--set", "n_max=1", "--set", "sx=1e-300", "--set", "sy=1e-300", "--set", "times=0.25,3.5", "--set", "points=2"];
    let run = |extra: &[&str]| slowmix(dir.path(), &[&flat[..], extra].concat());
    assert_eq!(code(&run(&["gen-vector"])), 0);
    let o = run(&["build-ceiling"]);
    assert!(matches!(code(&o), 0 | 3), "{}", String::from_utf8_lossy(&o.stderr));
    let pts = dir.path().join("pts.csv");
    std::fs::write(&pts, "x,y,s\n0.1,0.2,0.5\n").unwrap();
    let o = run(&["simulate", "--points", pts.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let vector = std::fs::read_to_string(dir.path().join("vector.txt")).unwrap();
    let quotients = |key: &str| -> Vec<f64> {
        let line = vector.lines().find(|l| l.starts_with(key)).unwrap();
        line[key.len()..].split_whitespace().map(|t| t.parse().unwrap()).collect()
    };
    let value = |a: Vec<f64>| a[1..].iter().rev().fold(0.0, |acc, &q| 1.0 / (q + acc));
    let (alpha, alpha_p) = (value(quotients("alpha=")), value(quotients("alpha_prime=")));
    let traj = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 3);
    for row in traj.lines().skip(1) {
        let f: Vec<f64> = row.split(',').map(|t| t.parse().unwrap()).collect();
        let (t, x, y, s) = (f[1], f[2], f[3], f[4]);
        let jumps = (0.5 + t).floor();
        let wrap = |v: f64| v.rem_euclid(1.0);
        assert!((wrap(0.1 + jumps * alpha) - x).abs() < 1e-12, "{row}");
        assert!((wrap(0.2 + jumps * alpha_p) - y).abs() < 1e-12, "{row}");
        assert!((wrap(0.5 + t) - s).abs() < 1e-12, "{row}");
    }
}
