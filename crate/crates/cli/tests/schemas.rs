mod common;

use std::path::Path;

use common::*;
use jsonschema::{Resource, Validator};

fn validator(name: &str) -> Validator {
    let load = |n: &str| read_json(&schema_dir().join(format!("{n}.schema.json")));
    let shared = load("search-config");
    jsonschema::options()
        .with_resource(
            "urn:qsynth:schema:search-config",
            Resource::from_contents(shared).unwrap(),
        )
        .build(&load(name))
        .unwrap()
}

#[track_caller]
fn assert_valid(schema: &str, doc: &serde_json::Value) {
    let v = validator(schema);
    let errors: Vec<String> = v
        .iter_errors(doc)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect();
    assert!(errors.is_empty(), "{schema}: {errors:#?}\n{doc:#}");
}

fn valid_file(schema: &str, path: &Path) {
    assert_valid(schema, &read_json(path));
}

#[test]
fn schemas_are_well_formed() {
    for entry in std::fs::read_dir(schema_dir()).unwrap() {
        let path = entry.unwrap().path();
        let schema = read_json(&path);
        assert!(jsonschema::meta::is_valid(&schema), "{}", path.display());
    }
}

#[test]
fn schemas_reject_wrong_documents() {
    let v = validator("clifford-report");
    assert!(!v.is_valid(&serde_json::json!({"d": 3, "s_convention": "level-parity"})));
    assert!(!v.is_valid(&serde_json::json!({"d": 3, "s_convention": "other", "relations": []})));
}

#[test]
fn model_info_and_clifford_reports_validate() {
    let o = run(&["model", "info"]);
    ok(&o);
    assert_valid("model-info", &serde_json::from_str(&stdout(&o)).unwrap());
    let o = run(&["verify-clifford", "--d", "5"]);
    ok(&o);
    assert_valid("clifford-report", &serde_json::from_str(&stdout(&o)).unwrap());
}

#[test]
fn optimize_report_and_manifest_validate() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    ok(&run(&[
        "optimize-state",
        "--initial",
        "haar:1",
        "--target",
        "haar:2",
        "--max-iterations",
        "20",
        "--out-dir",
        p(dir.path()),
        "--manifest",
        p(&m),
    ]));
    valid_file("optimize-report", &dir.path().join("report.json"));
    valid_file("manifest", &m);
}

#[test]
fn synthesis_reports_validate() {
    let dir = tempfile::tempdir().unwrap();
    ok(&run(&[
        "build-unitary",
        "--gate",
        "S",
        "--d",
        "7",
        "--exact-mappers",
        "--out-dir",
        p(dir.path()),
    ]));
    valid_file("synthesis-report", &dir.path().join("report.json"));

    let searched = dir.path().join("searched");
    ok(&run(&[
        "build-unitary",
        "--gate",
        "H",
        "--max-iterations",
        "5",
        "--out-dir",
        p(&searched),
    ]));
    valid_file("synthesis-report", &searched.join("report.json"));

    let spec = dir.path().join("spec.json");
    let mut a = vec![[0.0, 0.0]; 8];
    let mut b = vec![[0.0, 0.0]; 8];
    a[0] = [1.0, 0.0];
    b[5] = [0.0, 1.0];
    let file = serde_json::json!({
        "source": [{"name": "a", "amplitudes": a}],
        "target": [{"name": "b", "amplitudes": b}],
    });
    std::fs::write(&spec, file.to_string()).unwrap();
    let sub = dir.path().join("sub");
    ok(&run(&[
        "build-subspace-map",
        "--spec",
        p(&spec),
        "--exact",
        "--out-dir",
        p(&sub),
    ]));
    valid_file("synthesis-report", &sub.join("report.json"));
}

#[test]
fn ec_metadata_validates() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    ok(&run(&[
        "ec-sweep",
        "--samples",
        "10",
        "--out-dir",
        p(dir.path()),
        "--manifest",
        p(&m),
    ]));
    valid_file("ec-sweep-metadata", &dir.path().join("ec_sweep.json"));
    valid_file("manifest", &m);
}
