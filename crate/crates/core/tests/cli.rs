use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spapt"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn spapt")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spapt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn prepare(name: &str, args: &[&str]) -> PathBuf {
    let path = tmp(name);
    let mut full = vec!["prepare"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let out = run(&full);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

#[test]
fn prepare_bell_writes_state_file() {
    let out = run(&["prepare", "bell", "phi+"]);
    let v = json(&out);
    assert_eq!(v["dim"], 4);
    assert_eq!(v["re"][0][3], 0.5);
    assert_eq!(v["metadata"]["family"], "bell");
}

#[test]
fn prepare_rho_family_second_sweep_state() {
    let v = json(&run(&["prepare", "rho_family", "p=0.12", "alpha=0.71"]));
    assert_eq!(v["metadata"]["p"], "0.12");
    let trace: f64 = (0..4).map(|i| v["re"][i][i].as_f64().unwrap()).sum();
    assert!((trace - 1.0).abs() < 1e-11);
}

#[test]
fn out_of_range_parameter_is_usage_error() {
    let out = run(&["prepare", "werner", "p=1.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside"));
}

#[test]
fn unknown_family_and_flags_are_usage_errors() {
    assert_eq!(run(&["prepare", "ghz"]).status.code(), Some(1));
    assert_eq!(run(&["table1", "--format", "xml"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["table1", "--shots", "0"]).status.code(), Some(1));
}

#[test]
fn invalid_state_file_is_validation_error() {
    let path = tmp("bad.json");
    std::fs::write(
        &path,
        r#"{"dim":2,"re":[[0.7,0],[0,0.7]],"im":[[0,0],[0,0]],"metadata":{}}"#,
    )
    .unwrap();
    let out = run(&["detect", path.to_str().unwrap(), "ppt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trace"));

    let missing = tmp("missing.json");
    assert_eq!(
        run(&["detect", missing.to_str().unwrap(), "ppt"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn apply_reports_spectrum_and_writes_state() {
    let state = prepare("phi.json", &["bell", "phi+"]);
    let out_state = tmp("phi_out.json");
    let v = json(&run(&[
        "apply",
        state.to_str().unwrap(),
        "spa_pt",
        "--state-out",
        out_state.to_str().unwrap(),
    ]));
    let min = v["rows"][0]["min_eigenvalue"].as_f64().unwrap();
    assert!((min - 1.0 / 6.0).abs() < 1e-10);
    let written: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_state).unwrap()).unwrap();
    assert_eq!(written["metadata"]["channel"], "spa_pt");
    assert!((written["re"][0][0].as_f64().unwrap() - 2.0 / 9.0 - 1.0 / 18.0).abs() < 1e-11);
}

#[test]
fn apply_trajectory_reports_fidelity() {
    let state = prepare("psi.json", &["bell", "psi+"]);
    let v = json(&run(&[
        "apply",
        state.to_str().unwrap(),
        "spa_pt",
        "--mode",
        "trajectory",
        "--shots",
        "200000",
    ]));
    assert!(v["rows"][0]["fidelity_to_exact"].as_f64().unwrap() > 0.999);
    assert_eq!(v["config"]["shots_per_setting"], 200000);
}

#[test]
fn apply_rejects_unknown_channel() {
    let state = prepare("phi2.json", &["bell", "phi+"]);
    assert_eq!(
        run(&["apply", state.to_str().unwrap(), "teleport"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn detect_methods_agree_on_werner() {
    let state = prepare("werner.json", &["werner", "p=0.5"]);
    for method in ["ppt", "spa_spectrum", "f_hat_ideal", "f_hat_sampled"] {
        let v = json(&run(&["detect", state.to_str().unwrap(), method]));
        assert_eq!(v["rows"][0]["verdict"], "entangled", "{method}");
        assert_eq!(v["rows"][0]["seed"], 42);
    }
    let product = prepare("zero.json", &["rho_family", "p=0", "alpha=1"]);
    let v = json(&run(&["detect", product.to_str().unwrap(), "ppt"]));
    assert_eq!(v["rows"][0]["lambda_min"], 0.0);
    assert_eq!(v["rows"][0]["verdict"], "undetected");
}

#[test]
fn csv_output_is_lf_terminated_with_header() {
    let out = run(&["table1", "--format", "csv", "--shots", "20000"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "state,lambda_th,lambda_exp,lambda_d,threshold,seed,shots_per_setting,version"
    );
    assert_eq!(lines.count(), 4);
}

#[test]
fn json_and_csv_runs_have_same_numbers() {
    let j = json(&run(&["table1", "--shots", "20000", "--seed", "7"]));
    let c = run(&[
        "table1", "--format", "csv", "--shots", "20000", "--seed", "7",
    ]);
    let mut rd = csv::Reader::from_reader(&c.stdout[..]);
    for (k, rec) in rd.records().enumerate() {
        let rec = rec.unwrap();
        for (col, name) in [(1, "lambda_th"), (2, "lambda_exp"), (3, "lambda_d")] {
            let from_csv: f64 = rec[col].parse().unwrap();
            assert_eq!(j["rows"][k][name].as_f64().unwrap(), from_csv);
        }
    }
}

#[test]
fn runs_are_reproducible_and_written_to_out() {
    let a = tmp("fig3_a.csv");
    let b = tmp("fig3_b.csv");
    for p in [&a, &b] {
        let out = run(&[
            "fig3",
            "--format",
            "csv",
            "--shots",
            "5000",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    assert_eq!(String::from_utf8(ta).unwrap().lines().count(), 52);
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("PASS decomposition_identity"));
    assert!(!stderr.contains("FAIL"));
}
