use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(format!("{name}.json"))
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_benney")).args(args).arg("--out").arg(out).arg("--quiet").output().unwrap()
}

/// A preset with `edit` applied to its JSON.
fn edited(dir: &Path, name: &str, edit: impl FnOnce(&mut serde_json::Value)) -> PathBuf {
    let mut v: serde_json::Value = serde_json::from_slice(&std::fs::read(preset(name)).unwrap()).unwrap();
    edit(&mut v);
    let path = dir.join(format!("{name}_edited.json"));
    std::fs::write(&path, serde_json::to_vec(&v).unwrap()).unwrap();
    path
}

#[test]
fn generate_writes_fields_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["generate", "--config", preset("const_theta").to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("fields.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,x,y,v,u,h,mask"));
    assert_eq!(csv.lines().count(), 1 + 33 * 33 * 17);
    let meta: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["family"], "const_theta");
}

#[test]
fn verify_report_has_required_keys() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "--config", preset("const_theta").to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    for key in ["residuals", "orders", "signs", "masked_fraction"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert_eq!(report["passed"], true);
}

#[test]
fn wrong_signs_fail_verification() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = edited(dir.path(), "rational", |v| {
        v["sign_mode"] = serde_json::json!({"forced": {"s_h": -1, "s_phi": -1}});
    });
    let out = run(&["verify", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("failed"));
}

#[test]
fn perturbed_velocity_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = edited(dir.path(), "const_theta", |v| v["perturb_v"] = "0.001*sin(x)".into());
    let out = run(&["verify", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn invalid_config_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = edited(dir.path(), "rational", |v| v["family"]["g_lo"] = 2.0.into());
    let out = run(&["verify", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("g_lo"));

    let cfg = edited(dir.path(), "freestream", |v| v["transport"]["dts"] = serde_json::json!([0.01]));
    let out = run(&["transport", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["verify", "--config", "/nonexistent/config.json"], dir.path());
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn transport_reports_conservation() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["transport", "--config", preset("forced_stream").to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("transport.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["conservation"]["linf"].as_f64().unwrap() < 1e-9);
}
