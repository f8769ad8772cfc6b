//! End-to-end checks of the command-line surface: report schema, exit
//! codes, determinism, and the custom-Hamiltonian file format.

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_encuniv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn parse(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).expect("stdout is one JSON report")
}

fn assert_schema(report: &Value) {
    for key in ["schema_version", "command", "seed", "results", "residuals", "timing_ms"] {
        assert!(report.get(key).is_some(), "missing top-level key `{key}`");
    }
    assert_eq!(report["schema_version"], 1);
}

#[test]
fn closure_reports_the_known_dimension() {
    let out = run(&["closure", "--family", "oprime", "--n", "4"]);
    assert!(out.status.success());
    let report = parse(&out);
    assert_schema(&report);
    assert_eq!(report["results"]["dimension"], 28);
    assert_eq!(report["results"]["closed"], true);
}

#[test]
fn closure_of_exchange_and_xy_triples() {
    let out = run(&["closure", "--family", "heisenberg:all", "--n", "3"]);
    assert_eq!(parse(&out)["results"]["dimension"], 4);
    let out = run(&["closure", "--family", "xy:all", "--n", "3"]);
    assert_eq!(parse(&out)["results"]["dimension"], 8);
}

#[test]
fn topology_flag_composes_with_a_bare_family_name() {
    let out = run(&["closure", "--family", "heisenberg", "--topology", "chain", "--n", "4"]);
    assert!(out.status.success());
    let report = parse(&out);
    assert_eq!(report["results"]["family"], "heisenberg:chain");
    assert_eq!(report["results"]["num_generators"], 3);
}

#[test]
fn unknown_family_fails_with_an_error_entry() {
    let out = run(&["closure", "--family", "bogus", "--n", "3"]);
    assert!(!out.status.success());
    let report = parse(&out);
    assert!(report["results"]["error"].as_str().unwrap().contains("bogus"));
}

#[test]
fn decompose_emits_the_sector_table() {
    let out = run(&["decompose", "--family", "heisenberg:all", "--n", "3"]);
    assert!(out.status.success());
    let report = parse(&out);
    let sectors = report["results"]["sectors"].as_array().unwrap();
    let table: Vec<(u64, u64)> = sectors
        .iter()
        .map(|s| (s["n_j"].as_u64().unwrap(), s["d_j"].as_u64().unwrap()))
        .collect();
    assert_eq!(table, vec![(2, 2), (1, 4)]);
    // trivial multiplicities render as n/a
    let out = run(&["decompose", "--family", "xy:all", "--n", "3"]);
    let report = parse(&out);
    let sectors = report["results"]["sectors"].as_array().unwrap();
    assert_eq!(sectors[0]["su_verdict"], "n/a");
    assert_eq!(sectors[1]["su_verdict"], true);
}

#[test]
fn verdict_classifies_polynomial_growth() {
    let out = run(&["verdict", "--family", "oprime", "--n-min", "2", "--n-max", "6"]);
    assert!(out.status.success());
    let report = parse(&out);
    assert_eq!(report["results"]["verdict"], "non-universal");
    assert_eq!(report["results"]["polynomial_degree"], 2);
    assert!(report["results"]["note"].as_str().unwrap().contains("heuristic"));
}

#[test]
fn verdict_needs_at_least_four_samples() {
    let out = run(&["verdict", "--family", "oprime", "--n-min", "2", "--n-max", "4"]);
    assert!(!out.status.success());
    let report = parse(&out);
    assert!(report["results"]["error"].as_str().unwrap().contains("too few samples"));
}

#[test]
fn encode_extracts_a_two_dimensional_sector_code() {
    let out = run(&[
        "encode", "--family", "heisenberg:all", "--n", "3", "--sector", "0", "--degeneracy", "0",
    ]);
    assert!(out.status.success());
    let report = parse(&out);
    assert_eq!(report["results"]["dim_l"], 2);
}

#[test]
fn reports_are_deterministic_for_a_fixed_seed() {
    let mut bodies = Vec::new();
    for _ in 0..2 {
        let out = run(&["decompose", "--family", "xy:all", "--n", "4", "--seed", "3"]);
        assert!(out.status.success());
        let mut report = parse(&out);
        report.as_object_mut().unwrap().remove("timing_ms");
        bodies.push(serde_json::to_string(&report).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn custom_hamiltonian_file_round_trips() {
    let dir = std::env::temp_dir().join(format!("encuniv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ops.json");
    std::fs::write(
        &path,
        r#"{
            "n": 2,
            "terms": [
                {"coeff": 1.0, "paulis": [{"site": 1, "op": "Z"}]},
                {"coeff": 1.0, "paulis": [{"site": 2, "op": "Z"}]},
                {"coeff": 1.0, "paulis": [{"site": 1, "op": "X"}, {"site": 2, "op": "X"}]}
            ]
        }"#,
    )
    .unwrap();
    let out = run(&["closure", "--file", path.to_str().unwrap()]);
    assert!(out.status.success());
    let report = parse(&out);
    assert_eq!(report["results"]["dimension"], 6);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn json_flag_writes_the_same_report_to_a_file() {
    let dir = std::env::temp_dir().join(format!("encuniv-json-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = run(&["sil", "--json", path.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout_report = parse(&out);
    let file_report: Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(stdout_report, file_report);
    assert_schema(&file_report);
    assert_eq!(file_report["results"]["passes"], true);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sil_perturbation_is_measured_by_the_verifier() {
    let out = run(&["sil", "--perturb", "1e-3"]);
    assert!(out.status.success());
    let report = parse(&out);
    assert_eq!(report["results"]["passes"], false);
    let worst = report["residuals"]["cases"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .fold(0.0, f64::max);
    assert!(worst > 1e-5 && worst < 1e-1, "injected error must surface at its size, got {worst}");
}

#[test]
fn synthesize_finds_the_encoded_rotation() {
    let out = run(&[
        "synthesize",
        "--code",
        "code:trio",
        "--target",
        "rz:pi/2",
        "--max-pulses",
        "4",
    ]);
    assert!(out.status.success());
    let report = parse(&out);
    assert_eq!(report["results"]["success"], true);
    assert!(report["residuals"]["distance"].as_f64().unwrap() < 1e-4);
    assert!(report["results"]["pulses"].as_array().unwrap().len() <= 4);
}

#[test]
fn synthesize_identity_needs_no_pulses() {
    let out = run(&["synthesize", "--code", "code:trio", "--target", "identity"]);
    assert!(out.status.success());
    let report = parse(&out);
    assert_eq!(report["results"]["pulses"].as_array().unwrap().len(), 0);
}

#[test]
fn conjoin_reports_embedding_and_witness() {
    let out = run(&[
        "conjoin",
        "--left",
        "code:xy-qutrit",
        "--right",
        "code:xy-qutrit",
        "--witness",
    ]);
    assert!(out.status.success());
    let report = parse(&out);
    assert_eq!(report["results"]["product_dimension"], 9);
    assert_eq!(report["results"]["ambient"]["dimension"], 15);
    assert!(report["results"]["witness"].as_str().unwrap().contains("A_16"));
}

#[test]
fn encode_lists_the_trio_codewords() {
    let out = run(&["encode", "--code", "code:trio"]);
    assert!(out.status.success());
    let report = parse(&out);
    assert_eq!(report["results"]["dim_l"], 2);
    let words = report["results"]["codewords"].as_array().unwrap();
    assert_eq!(words[0].as_array().unwrap().len(), 2);
    assert_eq!(words[1].as_array().unwrap().len(), 3);
}

#[test]
fn trotter_error_decreases_with_steps() {
    let out = run(&["trotter", "--mode", "sum", "--p", "8,16,32"]);
    assert!(out.status.success());
    let report = parse(&out);
    let errors: Vec<f64> = report["results"]["errors"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["distance"].as_f64().unwrap())
        .collect();
    assert!(errors[1] < errors[0] && errors[2] < errors[1]);
}
