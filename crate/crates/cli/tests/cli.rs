use std::fs;
use std::process::{Command, Output};

fn rfe_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rfe-lab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn campaign_writes_outputs_and_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let o = rfe_lab(&["fig2", "--out", out.to_str().unwrap(), "--seed", "9", "--threads", threads]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["signal.csv", "spectrum.csv", "empirical_spectrum.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert!(a.join("manifest.json").exists());
}

#[test]
fn validate_with_trial_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"schema":"rfe-lab/1","campaign":{"kind":"validate-bound","epsilons":[0.2],"lambdas":[0.01]},"algorithm":{"delta":0.1}}"#,
    )
    .unwrap();
    let out = dir.path().join("v");
    let o = rfe_lab(&["validate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--trials", "50"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("validation.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[6], "50");
    assert!(stdout(&o).contains("\"all_pass\": true"));
}

#[test]
fn mismatched_config_kind_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"schema":"rfe-lab/1","campaign":{"kind":"fig4"}}"#).unwrap();
    let o = rfe_lab(&["fig2", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("fig4"));
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"schema":"rfe-lab/1","algorithm":{"delta":1.5}}"#).unwrap();
    let o = rfe_lab(&["fig4", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("algorithm.delta"));
}

#[test]
fn ft_compare_prints_table() {
    let o = rfe_lab(&["ft-compare", "--d-min", "16", "--d-max", "18"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "algorithm,d,physical_qubits,cu_calls,qec_cycles,feasible");
    assert_eq!(lines.len(), 7);
    assert!(lines.contains(&"QPE,16,59904,1.0050000000000000e5,1.6080000000000000e9,false"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("QPE minimal distance: 17"));
}

#[test]
fn sweep_and_bound_agree() {
    let o = rfe_lab(&["sweep", "--lambda-list", "0.01", "--epsilon-decades", "-2,-1", "--points-per-decade", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);

    let b = rfe_lab(&["bound", "--epsilon", "0.01", "--delta", "0.1", "--lambda", "0.01"]);
    assert!(b.status.success());
    let v: serde_json::Value = serde_json::from_slice(&b.stdout).unwrap();
    let m = v["bound"]["M"].as_f64().unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let row: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap_or(f64::NAN)).collect::<Vec<f64>>())
        .find(|r| r[col("epsilon")] == 0.01)
        .unwrap();
    let swept = row[col("M")];
    assert_eq!(swept, m);
}

#[test]
fn trial_reports_success_and_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.csv");
    let o = rfe_lab(&[
        "trial", "--theta", "1.0", "--epsilon", "0.1", "--M", "20000", "--seed", "4", "--spectrum-out",
        spec.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["success"], true);
    assert_eq!(v["config"]["J"], 63);
    assert_eq!(fs::read_to_string(spec).unwrap().lines().count(), 64);
}

#[test]
fn trial_rejects_depth_beyond_grid() {
    let o = rfe_lab(&["trial", "--theta", "1.0", "--epsilon", "0.1", "--M", "10", "--J", "63", "--K", "64"]);
    assert!(!o.status.success());
}
