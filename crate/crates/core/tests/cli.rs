use std::fs;
use std::path::Path;
use std::process::Command;

fn zrp(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_zrp")).args(args).output().unwrap()
}

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn exact_writes_curve_and_sidecar() {
    let dir = scratch("exact");
    let cfg = write_config(&dir, r#"{"rate": {"preset": "rate-one"}, "n": [3], "m": 3, "horizon": 4.0, "steps": 8}"#);
    let out = dir.join("out");
    let o = zrp(&["exact", "--config", &cfg, "--seed", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("exact_tv_n3.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,tv"));
    assert_eq!(lines.count(), 9);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("exact_tv_n3.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["experiment"], "exact");
    assert_eq!(meta["seed"], 1);
}

#[test]
fn predict_reports_prediction() {
    let dir = scratch("predict");
    let cfg = write_config(&dir, r#"{"rate": {"preset": "rate-one"}, "rho": 1.0, "profile": [1.0], "seed": 3}"#);
    let out = dir.join("out");
    let o = zrp(&["predict", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("predict.json")).unwrap()).unwrap();
    assert!(v["result"]["prediction"].as_f64().unwrap() > 0.0);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = scratch("rerun");
    let cfg = write_config(
        &dir,
        r#"{"rate": {"head": [0.5]}, "n": [10, 20], "rho": 1.5, "replicas": 4, "pi_samples": 100}"#,
    );
    let (a, b) = (dir.join("a"), dir.join("b"));
    for d in [&a, &b] {
        let o = zrp(&["equilibrium", "--config", &cfg, "--seed", "42", "--out", d.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(!names.is_empty());
    for name in names {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn missing_seed_fails() {
    let dir = scratch("noseed");
    let cfg = write_config(&dir, r#"{"rate": {"preset": "rate-one"}, "n": [3], "m": 3}"#);
    let o = zrp(&["exact", "--config", &cfg, "--out", dir.join("out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn unreadable_config_exits_two() {
    let dir = scratch("bad");
    let cfg = write_config(&dir, r#"{"rate": {"preset": "rate-one"}, "bogus": 1}"#);
    assert_eq!(zrp(&["exact", "--config", &cfg]).status.code(), Some(2));
}
