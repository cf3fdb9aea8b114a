//! End-to-end checks of the `opsum` binary: file formats, exit codes, and
//! report determinism.

use opsum::algebra::AlgElement;
use opsum::opsys::SumElement;
use opsum::wire;
use opsum::FdAlgebra;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_opsum"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("opsum-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_sum_element(x: &SumElement, name: &str) -> PathBuf {
    let path = tmp(name);
    std::fs::write(
        &path,
        serde_json::to_string_pretty(&wire::sum_element_to_dto(x)).unwrap(),
    )
    .unwrap();
    path
}

#[test]
fn check_pos_exit_codes() {
    let m2 = FdAlgebra::full(2);
    let pos = SumElement::new(AlgElement::unit(&m2, 1), AlgElement::zero(&m2, 1)).unwrap();
    let path = write_sum_element(&pos, "pos.json");
    let out = bin()
        .args(["check-pos", "--in", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let payload: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(payload["min_positive"], serde_json::json!(true));
    assert_eq!(payload["coproduct_positive"], serde_json::json!(true));

    let neg = SumElement::new(
        AlgElement::unit(&m2, 1).neg(),
        AlgElement::zero(&m2, 1),
    )
    .unwrap();
    let path = write_sum_element(&neg, "neg.json");
    let out = bin()
        .args(["check-pos", "--in", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let payload: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(payload["witness_pair"].is_object(), "negative answers carry a witness");
}

#[test]
fn norm_outputs_both_values() {
    let m2 = FdAlgebra::full(2);
    let x = SumElement::new(AlgElement::unit(&m2, 1), AlgElement::zero(&m2, 1)).unwrap();
    let path = write_sum_element(&x, "norm.json");
    let out = bin()
        .args(["norm", "--in", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let payload: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let nm = payload["norm_min"].as_f64().unwrap();
    let nc = payload["norm_coproduct"].as_f64().unwrap();
    assert!((nm - 1.0).abs() < 1e-9);
    assert!((nc - 1.0).abs() < 1e-6);
}

#[test]
fn marginal_answers_and_exit_codes() {
    // incompatible pair: exit code 1 with certificate
    let m2 = FdAlgebra::full(2);
    let alpha = opsum::states::bell_level2_state(&m2, 0).unwrap();
    let beta = opsum::states::bell_level2_state(&m2, 0).unwrap();
    let pa = tmp("alpha.json");
    let pb = tmp("beta.json");
    std::fs::write(&pa, serde_json::to_string(&wire::state_to_dto(&alpha)).unwrap()).unwrap();
    std::fs::write(&pb, serde_json::to_string(&wire::state_to_dto(&beta)).unwrap()).unwrap();
    let out = bin()
        .args([
            "marginal",
            "--alpha",
            pa.to_str().unwrap(),
            "--beta",
            pb.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let payload: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(payload["compatible"], serde_json::json!(false));
    assert_eq!(payload["certificate_ok"], serde_json::json!(true));
}

#[test]
fn witness_pipeline_writes_payload() {
    let out_path = tmp("witness.json");
    let out = bin()
        .args([
            "witness",
            "--algebra-a",
            "2",
            "--algebra-b",
            "2",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let dto: wire::MonogamyWitnessDto = serde_json::from_str(&text).unwrap();
    let w = wire::witness_from_dto(&dto, &wire::AlgebraRegistry::new()).unwrap();
    assert!(w.value < -1e-3);

    // commutative input is a hard error
    let out = bin()
        .args(["witness", "--algebra-a", "1,1", "--algebra-b", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn experiment_report_is_deterministic_and_exits_zero() {
    let cfg = tmp("e1.json");
    std::fs::write(
        &cfg,
        serde_json::json!({
            "experiment": "E1",
            "algebras": [[2]],
            "samples": 20,
            "seed": 9,
            "tol": 1e-8,
        })
        .to_string(),
    )
    .unwrap();
    let report_path = tmp("e1_report.json");
    let run = |path: &PathBuf| {
        let out = bin()
            .args([
                "experiment",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                path.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        v
    };
    let r1 = run(&report_path);
    let report_path2 = tmp("e1_report2.json");
    let r2 = run(&report_path2);
    assert_eq!(r1["records"], r2["records"], "seeded records must be identical");
    assert_eq!(r1["aggregate"], r2["aggregate"]);
    // CSV summary written alongside
    assert!(report_path.with_extension("csv").exists());
}
