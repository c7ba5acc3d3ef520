use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn qdp(args: &[&str], cfg: &Path, out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_qdp"))
        .args(args)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap();
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn inline(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("inline.json");
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn logistic_analysis_reports_the_transcritical_dd_scale() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = qdp(&["analyze"], &config("logistic_analyze.json"), dir.path());
    assert_eq!(code, 0);
    let v = json(&dir.path().join("analysis.json"));
    assert_eq!(v["bifurcation"]["kind"], "TRANSCRITICAL");
    assert_eq!(v["dd_curve"]["upright"], true);
    assert_eq!(v["classification"]["range"], "DD_SCALE");
    assert_eq!(v["classification"]["G_limit"], "2x");
    assert_eq!(v["strong_stochasticity"]["verdict"], "HOLDS");
    assert!(v["version"].is_string());
    assert!(v["config"]["input"]["F"].is_array());
}

#[test]
fn folded_curve_reports_its_fold_interval() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = qdp(&["analyze"], &config("folded_k3.json"), dir.path());
    assert_eq!(code, 0);
    let v = json(&dir.path().join("analysis.json"));
    assert_eq!(v["dd_curve"]["upright"], false);
    let folds = v["dd_curve"]["fold_intervals"].as_array().unwrap();
    assert_eq!(folds.len(), 1);
    assert_eq!(folds[0]["lam_lo"], "ε^2");
    assert_eq!(folds[0]["lam_hi"], "ε^3/2");
}

#[test]
fn failing_stochasticity_exits_with_analysis_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = qdp(&["analyze"], &config("not_stochastic.json"), dir.path());
    assert_eq!(code, 2);
    assert!(err.contains("not_strongly_stochastic"));
    let v = json(&dir.path().join("analysis.json"));
    assert_eq!(v["errors"][0]["kind"], "not_strongly_stochastic");
}

#[test]
fn malformed_configs_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"input": {"model": {"jumps": []}}}"#,
        r#"{"input": {"F": [{"power": [1, 0], "coeff": 1}]}}"#,
        r#"{"input": {"F": [{"power": [1, 0], "coeff": 1}], "G": [{"power": [1, 0], "coeff": 1}]}, "epsilon": [1.5]}"#,
        r#"{"input": {"model": {"jumps": [{"delta": 1, "rate": [{"power": [1, 0], "coeff": 1}]}]}},
            "simulation": {"x0": 0.1, "t_end": 1.0, "replicas": 0, "seed": 1}}"#,
        r#"{"input": {}, "unknown": 3}"#,
        "not json",
    ];
    for body in cases {
        let (code, _) = qdp(&["analyze"], &inline(dir.path(), body), dir.path());
        assert_eq!(code, 1, "{body}");
    }
    let (code, _) = qdp(&["analyze"], &dir.path().join("missing.json"), dir.path());
    assert_eq!(code, 1);
}

#[test]
fn diagram_without_epsilon_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = qdp(&["diagram"], &config("logistic_analyze.json"), dir.path());
    assert_eq!(code, 1);
}

#[test]
fn diagram_writes_csvs_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = qdp(&["diagram", "--svg"], &config("pitchfork_diagram.json"), dir.path());
    assert_eq!(code, 0);
    let dd = std::fs::read_to_string(dir.path().join("dd_curve.csv")).unwrap();
    assert!(dd.starts_with("lambda,x,piece_index\n"));
    let diag = std::fs::read_to_string(dir.path().join("diagram.csv")).unwrap();
    assert!(diag.starts_with("lambda,phi,b,phi_star_lo,phi_star_hi,b_star,regime\n"));
    assert!(diag.lines().count() > 100);
    assert!(std::fs::read_to_string(dir.path().join("diagram.svg")).unwrap().starts_with("<svg"));
    let prof = json(&dir.path().join("profile.json"));
    assert_eq!(prof["bifurcation"]["kind"], "PITCHFORK");
}

#[test]
fn simulate_needs_a_model() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"input": {"F": [{"power": [2, 0], "coeff": -1}], "G": [{"power": [1, 0], "coeff": 1}]},
        "epsilon": [0.1], "simulation": {"x0": 0.1, "t_end": 1.0, "replicas": 2, "seed": 1}}"#;
    let (code, _) = qdp(&["simulate"], &inline(dir.path(), body), dir.path());
    assert_eq!(code, 1);
}

#[test]
fn reruns_are_byte_identical() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&d1, &d2] {
        assert_eq!(qdp(&["simulate"], &config("logistic_simulate.json"), d.path()).0, 0);
    }
    for f in ["paths_eps0.1.jsonl", "simulate.json"] {
        let (a, b) = (std::fs::read(d1.path().join(f)).unwrap(), std::fs::read(d2.path().join(f)).unwrap());
        assert!(!a.is_empty());
        assert_eq!(a, b, "{f}");
    }
    let first: Value = serde_json::from_str(
        std::fs::read_to_string(d1.path().join("paths_eps0.1.jsonl")).unwrap().lines().next().unwrap(),
    )
    .unwrap();
    assert_eq!(first["seed"], 7);
    assert_eq!(first["replica"], 0);
}

#[test]
fn csv_paths_are_written_one_file_per_replica() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = json(&config("logistic_simulate.json"));
    cfg["simulation"]["format"] = "csv".into();
    let (code, _) = qdp(&["simulate"], &inline(dir.path(), &cfg.to_string()), dir.path());
    assert_eq!(code, 0);
    let files = std::fs::read_dir(dir.path().join("paths_eps0.1")).unwrap().count();
    assert_eq!(files, 4);
}

#[test]
fn failed_validation_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = json(&config("dd_scale_validate.json"));
    cfg["epsilon"] = serde_json::json!([0.1]);
    cfg["validation"]["replicas"] = 200.into();
    cfg["validation"]["check"]["em_replicas"] = 200.into();
    cfg["validation"]["check"]["dt"] = 0.01.into();
    // Centering away from the branch yields a limit the chain does not follow.
    cfg["validation"]["y0"] = 1.0.into();
    cfg["validation"]["center"] = serde_json::json!({"coeff": 3, "exp": "0"});
    let (code, _) = qdp(&["validate"], &inline(dir.path(), &cfg.to_string()), dir.path());
    assert_eq!(code, 3);
    let v = json(&dir.path().join("validation.json"));
    assert_eq!(v["pass"], false);
}

#[test]
fn dd_scale_trend_passes_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = qdp(&["validate"], &config("dd_scale_validate.json"), dir.path());
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(dir.path().join("trend.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let v = json(&dir.path().join("validation.json"));
    assert_eq!(v["non_increasing"], true);
    assert!(v["rng"].as_str().unwrap().starts_with("ChaCha8"));
}
