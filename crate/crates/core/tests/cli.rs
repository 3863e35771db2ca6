use std::path::Path;
use std::process::{Command, Output};

use almc::harness::{read_records_csv, FitReport, RECORDS_HEADER};
use almc::metrics::{knn_kl, mog_action_bound_scaled, SampleSet};
use almc::rng::RngStream;

fn almc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_almc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

const RUN: &str = r#"{
    "target": {"ring": {"num_modes": 6, "r": 2.0, "precision": 10.0}},
    "schedule": {"eta": "const1", "lambda": {"family": "power", "lambda0": 5.0, "gamma": 10}},
    "grid": {"kind": "quadratic", "steps": 60, "s_min": 0.01, "s_max": 0.05}
}"#;

#[test]
fn sample_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, RUN).unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        ok(&almc(&[
            "sample", "--config", path_str(&cfg), "--chains", "50", "--seed", "3", "--out", path_str(out),
        ]));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("chain,dim0,dim1\n"));
    assert_eq!(text.lines().count(), 51);
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let set = SampleSet::read_csv(&a).unwrap();
    assert_eq!((set.len(), set.dim()), (50, 2));
}

#[test]
fn kl_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = RngStream::new(1, 0);
    let draw = |shift: f64, rng: &mut RngStream| {
        let pts: Vec<Vec<f64>> = (0..300)
            .map(|_| vec![rng.standard_normal() + shift, rng.standard_normal()])
            .collect();
        SampleSet::new(&pts, "g").unwrap()
    };
    let p = draw(0.0, &mut rng);
    let q = draw(1.0, &mut rng);
    let (pp, qp) = (dir.path().join("p.csv"), dir.path().join("q.csv"));
    p.write_csv(&pp).unwrap();
    q.write_csv(&qp).unwrap();
    let out = ok(&almc(&["kl", "--p", path_str(&pp), "--q", path_str(&qp), "--k", "3"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let expected = knn_kl(&p, &q, 3).unwrap().value;
    assert_eq!(v["value"].as_f64().unwrap(), expected);
}

#[test]
fn action_bound_matches_library() {
    let out = ok(&almc(&[
        "action", "--kind", "mog-bound", "--beta", "10", "--r", "5", "--d", "2", "--lambda0", "5", "--gamma", "10",
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let expected = mog_action_bound_scaled(10.0, 5.0, 2, 5.0, 10.0).unwrap().value;
    assert_eq!(v["value"].as_f64().unwrap(), expected);
    assert_eq!(v["method"], "closed-form");
}

#[test]
fn heat_action_reports_error_bar() {
    let out = ok(&almc(&[
        "action", "--kind", "heat", "--beta", "10", "--r", "2", "--S", "0.5", "--mc-samples", "2000",
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["value"].as_f64().unwrap() > 0.0);
    assert!(v["error_estimate"].as_f64().unwrap() > 0.0);
    assert_eq!(v["method"], "monte-carlo");
    let bad = almc(&["action", "--kind", "heat", "--beta", "10", "--r", "2", "--d", "3"]);
    assert!(!bad.status.success());
}

#[test]
fn experiment_outputs_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    std::fs::write(
        &cfg,
        r#"{
            "r_values": [2.0, 5.0], "beta": 10.0, "num_modes": 6, "thresholds": [0.2, 0.1],
            "m_grids": [[10, 40], [20, 80]], "s_min": 0.01, "s_max": 0.05,
            "n_chains": 64, "seeds": [0, 1], "k_nn": 3,
            "schedule": {"eta": "const1", "lambda": {"family": "power", "lambda0": 5.0, "gamma": 10}}
        }"#,
    )
    .unwrap();
    let mut texts = Vec::new();
    for tag in ["a", "b"] {
        let out = dir.path().join(format!("{tag}.csv"));
        let fit = dir.path().join(format!("{tag}.json"));
        ok(&almc(&[
            "experiment", "--config", path_str(&cfg), "--out", path_str(&out), "--fit", path_str(&fit),
            "--seed", "11", "--no-timing",
        ]));
        texts.push((std::fs::read(&out).unwrap(), std::fs::read(&fit).unwrap()));
    }
    assert_eq!(texts[0], texts[1]);
    let csv = String::from_utf8(texts[0].0.clone()).unwrap();
    assert_eq!(csv.lines().next().unwrap(), RECORDS_HEADER.join(","));
    let records = read_records_csv(texts[0].0.as_slice()).unwrap();
    assert_eq!(records.len(), 8);
    assert!(records.iter().all(|r| r.wall_ms == 0 && r.kl_clamped == r.kl_raw.max(0.0)));
    let report: FitReport = serde_json::from_slice(&texts[0].1).unwrap();
    assert_eq!(report.fits.len(), 2);
    assert_eq!(report.master_seed, 11);
}

#[test]
fn errors_exit_nonzero_with_message() {
    let out = almc(&["sample", "--config", "/nonexistent/run.json", "--out", "/tmp/x.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, RUN.replace("\"const1\"", "{\"family\": \"const\", \"value\": 1.5}")).unwrap();
    let out = almc(&["sample", "--config", path_str(&cfg), "--out", path_str(&dir.path().join("o.csv"))]);
    assert!(!out.status.success());

    let exp = dir.path().join("exp.json");
    std::fs::write(&exp, "{\"r_values\": []}").unwrap();
    let out = almc(&[
        "experiment", "--config", path_str(&exp), "--out", "/tmp/r.csv", "--fit", "/tmp/f.json",
    ]);
    assert!(!out.status.success());
}
