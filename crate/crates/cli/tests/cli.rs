use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn map_path(name: &str) -> String {
    repo_root().join("maps").join(name).display().to_string()
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).expect("stdout is JSON")
    }
}

fn orbitlab(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_orbitlab"))
        .args(args)
        .env_remove("ORBITLAB_LOG_DIR")
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn assert_valid(schema: &str, doc: &Value) {
    let path = repo_root()
        .join("schemas/v1")
        .join(format!("{schema}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

#[test]
fn census_squaring_map() {
    let z2 = map_path("z2.json");
    let r = orbitlab(&["census", "--map", &z2, "--n-max", "8"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = r.json();
    assert_valid("census", &doc);
    let p: Vec<u64> = doc["table"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| row["p"].as_u64().unwrap())
        .collect();
    assert_eq!(p, (1..=8).map(|n| 1u64 << n).collect::<Vec<_>>());
}

#[test]
fn census_contraction_is_all_ones() {
    let r = orbitlab(&[
        "census",
        "--map",
        &map_path("contraction.json"),
        "--n-max",
        "6",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = r.json();
    for row in doc["table"]["rows"].as_array().unwrap() {
        assert_eq!(row["p"], 1);
    }
    assert_eq!(doc["zeta"]["radius_estimate"], 1.0);
}

#[test]
fn census_strict_rejects_parabolic_point() {
    let r = orbitlab(&[
        "census",
        "--map",
        &map_path("parabolic.json"),
        "--n-max",
        "2",
        "--strict",
    ]);
    assert_eq!(r.code, 3);
    assert!(
        r.stderr.contains("nonisolated") || r.stderr.contains("Nonisolated"),
        "{}",
        r.stderr
    );
    // without --strict the table is still produced, and zeta refuses the flagged rows
    let r = orbitlab(&[
        "census",
        "--map",
        &map_path("parabolic.json"),
        "--n-max",
        "2",
    ]);
    assert_eq!(r.code, 0);
    let doc = r.json();
    assert!(doc["zeta"].is_null());
    assert!(doc["zeta_error"].as_str().unwrap().contains("row 1"));
}

#[test]
fn census_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("z2.csv");
    let r = orbitlab(&[
        "census",
        "--map",
        &map_path("z2.json"),
        "--n-max",
        "3",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0);
    let text = std::fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,P_n,Q_n,log_P_n_over_n");
    assert!(lines[2].starts_with("2,4,2,"));
}

#[test]
fn sample_usage_and_hits() {
    assert_eq!(orbitlab(&["sample", "--trials", "0"]).code, 2);
    let r = orbitlab(&[
        "sample", "--n", "1", "--degree", "2", "--k-max", "4", "--trials", "1000", "--seed", "7",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = r.json();
    assert_valid("sample", &doc);
    for h in doc["report"]["lambda0_hits"].as_array().unwrap() {
        assert_eq!(h["hits"], 0);
    }
    assert_eq!(doc["report"]["controls"][0]["detected"], true);
}

#[test]
fn sample_rejects_bad_ladder_and_lambda0() {
    assert_eq!(
        orbitlab(&["sample", "--trials", "3", "--eps", "0.001,0.01"]).code,
        2
    );
    assert_eq!(
        orbitlab(&["sample", "--trials", "3", "--lambda0", "2"]).code,
        2
    );
    let r = orbitlab(&["sample", "--trials", "3", "--lambda0", "1;-1;i;3/5,4/5"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(
        r.json()["report"]["lambda0_hits"].as_array().unwrap().len(),
        4
    );
}

#[test]
fn lemma2_model_map() {
    let r = orbitlab(&["lemma2", "--n", "1", "--degree", "2", "--period", "2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = r.json();
    assert_valid("lemma2", &doc);
    assert_eq!(doc["found"], "4");
    assert_eq!(doc["all_hyperbolic"], true);
}

#[test]
fn split_and_schedule() {
    let r = orbitlab(&["split", "--order", "1", "--count", "12"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = r.json();
    assert_valid("split", &doc);
    assert_eq!(doc["plan"]["fixed_points"].as_array().unwrap().len(), 12);
    assert_eq!(doc["persistence"]["preserved"], true);

    let r = orbitlab(&["schedule", "--sequence", "linear", "--n1", "4"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = r.json();
    assert_valid("schedule", &doc);
    assert!(doc["outcome"]["p_n1"].as_u64().unwrap() >= 16);

    let r = orbitlab(&["schedule", "--sequence", "self-power", "--n1", "4"]);
    assert_eq!(r.code, 4);
    assert!(r.stderr.contains("largest feasible n1 = 2"), "{}", r.stderr);
    assert_eq!(
        orbitlab(&["split", "--order", "1", "--count", "65"]).code,
        4
    );
}

#[test]
fn eliminate_prints_slice() {
    let r = orbitlab(&[
        "eliminate",
        "--degree",
        "2",
        "--period",
        "1",
        "--lambda0",
        "1,0",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = r.json();
    assert_valid("eliminate", &doc);
    assert_eq!(
        doc["slice_text"]["re"],
        "4*a_0*a_2^2 - a_1^2*a_2 + 2*a_1*a_2 - a_2"
    );
    assert_eq!(
        orbitlab(&["eliminate", "--degree", "3", "--period", "1"]).code,
        4
    );
    assert_eq!(
        orbitlab(&[
            "eliminate",
            "--degree",
            "2",
            "--period",
            "1",
            "--lambda0",
            "1/2,0"
        ])
        .code,
        2
    );
}

#[test]
fn run_log_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let log_dir = dir.path().to_str().unwrap();
    let z2 = map_path("z2.json");
    for args in [
        vec!["--log-dir", log_dir, "census", "--map", &z2, "--n-max", "4"],
        vec![
            "--log-dir",
            log_dir,
            "sample",
            "--trials",
            "20",
            "--seed",
            "5",
        ],
    ] {
        assert_eq!(orbitlab(&args).code, 0);
    }
    let log = dir.path().join("runs.jsonl");
    let text = std::fs::read_to_string(&log).unwrap();
    assert_eq!(text.lines().count(), 2);
    for line in text.lines() {
        assert_valid("run_record", &serde_json::from_str(line).unwrap());
    }
    for index in ["0", "1"] {
        let r = orbitlab(&[
            "replay",
            "--record",
            log.to_str().unwrap(),
            "--index",
            index,
        ]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let doc = r.json();
        assert_valid("replay", &doc);
        assert_eq!(doc["matches"], true);
    }
    // a tampered hash is an assertion failure
    let tampered = text.replacen("\"output_sha256\":\"", "\"output_sha256\":\"0", 1);
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, tampered).unwrap();
    let r = orbitlab(&["replay", "--record", bad.to_str().unwrap(), "--index", "0"]);
    assert_eq!(r.code, 3);
}

#[test]
fn log_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_orbitlab"))
        .args(["eliminate", "--degree", "1", "--period", "1"])
        .env("ORBITLAB_LOG_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("runs.jsonl").exists());
}

#[test]
fn shipped_maps_validate() {
    for name in [
        "z2",
        "contraction",
        "parabolic",
        "chebyshev",
        "product_squares",
    ] {
        let doc: Value = serde_json::from_str(
            &std::fs::read_to_string(map_path(&format!("{name}.json"))).unwrap(),
        )
        .unwrap();
        assert_valid("map", &doc);
    }
}
