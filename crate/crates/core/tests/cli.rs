use std::process::{Command, Output};

fn coopmac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coopmac")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn reproduce_fig7_writes_one_row_per_density() {
    let o = coopmac(&["reproduce", "fig7", "--trials", "500"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "lambda,upper,proposed,conventional,lower,proposed_stderr,conventional_stderr,trials,seed,config_hash"
    );
    assert_eq!(lines.count(), 10);
}

#[test]
fn simulate_is_reproducible() {
    let args = ["simulate", "--class", "D1", "--lambda", "0.002", "--trials", "3000", "--seed", "17", "--mode", "sampled"];
    let a = coopmac(&args);
    let b = coopmac(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = coopmac(&["simulate", "--class", "D1", "--lambda", "0.002", "--trials", "3000", "--seed", "18"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "class = C\nlambda = 0.003\n").unwrap();
    let out = dir.path().join("b.csv");
    let o = coopmac(&["bounds", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(&out).unwrap();
    assert!(written.lines().nth(1).unwrap().starts_with("C,0.003,ppp,"));

    std::fs::write(&cfg, "alpha = 9\n").unwrap();
    let o = coopmac(&["bounds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(coopmac(&["frobnicate"]).status.code(), Some(1));
    let o = coopmac(&["reproduce", "fig8"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("fig10"));
}

#[test]
fn selftest_passes() {
    let o = coopmac(&["selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn json_output_parses() {
    let o = coopmac(&["contour", "--class", "D2", "--resolution", "4", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert!(!rows.is_empty());
    for row in rows {
        let tier = row["tier"].as_i64().unwrap();
        assert!((2..=5).contains(&tier));
        assert!(row["throughput"].as_f64().unwrap() > 0.0);
        assert!(row["config_hash"].is_string());
    }
}
