use std::path::Path;
use std::process::{Command, Output};

fn qbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbound"))
        .args(args)
        .env_remove("QBOUND_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn sweep_writes_reference_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1.csv");
    let o = qbound(&[
        "bounds",
        "sweep",
        "--r-min",
        "0.1",
        "--r-max",
        "0.9",
        "--steps",
        "9",
        "--theta",
        "1.5707963",
        "--phi",
        "2.3561945",
        "--eps",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,B_max,B_SLD,B_RLD,B_Fisher,B_Husimi,v,vg_minus_C"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 9);
    let half = &rows[4];
    assert!((half[0] - 0.5).abs() < 1e-12);
    // angles passed with 8 digits, so compare loosely
    assert!((half[1] - 7.45297871712).abs() < 1e-6);
    assert!((half[2] - 4.0).abs() < 1e-6 && (half[3] - 3.0).abs() < 1e-6);
}

#[test]
fn simulate_twice_is_identical() {
    let a = qbound(&["simulate", "--samples", "100000", "--seed", "42"]);
    let b = qbound(&["simulate", "--samples", "100000", "--seed", "42"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn seed_from_environment() {
    let with_env = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_qbound"))
            .args(["simulate", "--samples", "1000"])
            .env("QBOUND_SEED", seed)
            .output()
            .unwrap()
    };
    let a = with_env("42");
    let flag = qbound(&["simulate", "--samples", "1000", "--seed", "42"]);
    assert_eq!(a.stdout, flag.stdout);
    assert_eq!(code(&with_env("not-a-number")), 1);
}

#[test]
fn domain_error_exits_one() {
    let o = qbound(&["metrics", "--r", "0", "--theta", "1", "--phi", "1"]);
    assert_eq!(code(&o), 1);
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());
}

#[test]
fn io_error_exits_two() {
    let o = qbound(&["metrics", "--out", "/nonexistent/dir/m.csv"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "r = 0.3\ntheta=1\nformat=json\n").unwrap();
    let o = qbound(&["metrics", "--config", cfg.to_str().unwrap(), "--phi", "0.2"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(
        (v["r"].as_f64(), v["theta"].as_f64(), v["phi"].as_f64()),
        (Some(0.3), Some(1.0), Some(0.2))
    );

    std::fs::write(&cfg, "radius = 0.3\n").unwrap();
    assert_eq!(code(&qbound(&["metrics", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn selftest_passes() {
    let o = qbound(&["selftest"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains(", 0 failed"));
}

#[test]
fn svg_chart() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("fig1.svg");
    let o = qbound(&["bounds", "sweep", "--svg", svg.to_str().unwrap(), "--out", "/dev/null"]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(Path::new(&svg)).unwrap();
    assert_eq!(text.matches("<polyline").count(), 5);
}
