use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_offload-sim"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_accepts_shipped_scenarios() {
    for name in ["android-mec.toml", "cloudlet.toml", "femtocloud.toml", "mec-balanced.toml", "cloudlet-server.toml"] {
        let out = bin().arg("validate").arg(scenario(name)).output().unwrap();
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout(&out).contains("ok:"));
    }
}

#[test]
fn validate_rejects_and_lists_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        r#"
        strategy = "lf:hybrid"
        lambda = -1.0
        deadline = 9.0
        [[hosts]]
        name = "gen"
        role = "generator"
        exec_time_s = 1.0
        p_compute_w = 5.0
        p_idle_w = 1.0
        p_upload_w = 2.0
        p_download_w = 2.0
        uplink_mbps = 100.0
        downlink_mbps = 100.0
        [[hosts]]
        name = "w"
        profile = "pixel4"
        role = "worker"
        "#,
    )
    .unwrap();
    let out = bin().arg("validate").arg(&path).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("lambda"), "{err}");
    assert!(err.contains("femtocloud"), "{err}");
}

#[test]
fn validate_reports_missing_file() {
    let out = bin().args(["validate", "/nonexistent/scenario.toml"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn run_writes_csvs_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("run")
        .arg(scenario("android-mec.toml"))
        .args(["--seed", "3", "--trace", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let runs = std::fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    let mut lines = runs.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("scenario,strategy,lambda,deadline,seed,energy_mwh_per_job,mean_time_s,qos,offload_ratio,est_error"));
    assert_eq!(lines.count(), 6);
    for f in ["flows.csv", "shares.csv", "trace-0.ndjson", "trace-5.ndjson"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let trace = std::fs::read_to_string(dir.path().join("trace-0.ndjson")).unwrap();
    let first: serde_json::Value = serde_json::from_str(trace.lines().next().unwrap()).unwrap();
    assert_eq!(first["kind"], "dissemination_tick");
    assert!(trace.lines().any(|l| l.contains("\"exec_end\"")));
}

#[test]
fn sweep_covers_the_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("sweep")
        .arg(scenario("cloudlet.toml"))
        .args(["--lambda", "3,6", "--deadline", "3,6", "--strategy", "tmin,hybrid", "--reps", "2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let runs = std::fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    // (3,3), (6,3), (6,6) x 2 strategies x 2 reps.
    assert_eq!(runs.lines().count(), 1 + 12);
    assert!(!runs.contains(":l3:d6"));
}

#[test]
fn sweep_rejects_unknown_strategy() {
    let out = bin()
        .arg("sweep")
        .arg(scenario("android-mec.toml"))
        .args(["--lambda", "6", "--deadline", "6", "--strategy", "fastest"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn profiles_lists_builtins() {
    let out = bin().arg("profiles").output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    for name in ["pixel4", "mi9t", "tab_s5e", "s7e", "nexus9", "cloudlet"] {
        assert!(text.contains(name), "{name}");
    }
}
