use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_choquet"))
}

fn cube_scenario() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/cube.json")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const CUBE_SPACE: &str = r#"{"dim":3,"ball":{"type":"polytope","vertices":[[1,0,0],[-1,0,0],[0,1,0],[0,-1,0],[0,0,1],[0,0,-1]]}}"#;

fn scenario(space: &str, commands: &str) -> String {
    format!(r#"{{"schema":1,"space":{space},"commands":{commands}}}"#)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn malformed_json_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "bad.json", "{\"schema\": 1, \"space\": ");
    let o = run(&["run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn wrong_schema_and_unknown_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        &dir,
        "v2.json",
        &scenario(CUBE_SPACE, "[]").replace("\"schema\":1", "\"schema\":2"),
    );
    assert_eq!(run(&["run", p.to_str().unwrap()]).status.code(), Some(2));
    let p = write(
        &dir,
        "op.json",
        &scenario(
            CUBE_SPACE,
            r#"[{"op":"dual_norm","xstar":[1,0,0],"extra":1}]"#,
        ),
    );
    assert_eq!(run(&["run", p.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn unknown_suite_is_an_input_error() {
    assert_eq!(run(&["verify", "no_such_suite"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        &dir,
        "s.json",
        &scenario(CUBE_SPACE, r#"[{"op":"verify","suite":"no_such_suite"}]"#),
    );
    assert_eq!(run(&["run", p.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn unresolved_reference_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        &dir,
        "s.json",
        &scenario(CUBE_SPACE, r#"[{"op":"transfer","measure":"missing"}]"#),
    );
    let o = run(&["run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("commands[0].measure"));
}

#[test]
fn dimension_mismatch_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        &dir,
        "s.json",
        &scenario(CUBE_SPACE, r#"[{"op":"dual_norm","xstar":[1,0]}]"#),
    );
    assert_eq!(run(&["run", p.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn simplexoid_on_the_cube_reports_non_uniqueness() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        &dir,
        "s.json",
        &scenario(CUBE_SPACE, r#"[{"op":"verify","suite":"simplexoid"}]"#),
    );
    let out = dir.path().join("r.json");
    let o = run(&["run", p.to_str().unwrap(), "--json", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(!text.contains("FAIL"), "{text}");
    for needle in ["not simplexoid", "non-unique", "witness pair emitted"] {
        assert!(text.contains(needle), "missing `{needle}` in {text}");
    }
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let entry = &report["entries"][0];
    assert_eq!(entry["status"], "pass");
    let pair = entry["result"]["witness_pair"].as_array().unwrap();
    assert_eq!(pair.len(), 2);
    assert_ne!(pair[0], pair[1]);
    assert!(!entry["anchor"].as_str().unwrap().is_empty());
}

#[test]
fn strict_convexity_on_a_polytope_is_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let space = write(&dir, "space.json", CUBE_SPACE);
    let o = run(&[
        "verify",
        "strict_convexity",
        "--space",
        space.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("SKIPPED"));
    let p = write(
        &dir,
        "s.json",
        &scenario(
            CUBE_SPACE,
            r#"[{"op":"verify","suite":"strict_convexity"}]"#,
        ),
    );
    let o = run(&["run", p.to_str().unwrap()]);
    assert!(stdout(&o).contains("hypothesis not met"));
}

#[test]
fn same_seed_gives_identical_json() {
    let dir = tempfile::tempdir().unwrap();
    let reports: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let out = dir.path().join(format!("r{i}.json"));
            let o = run(&[
                "run",
                cube_scenario().to_str().unwrap(),
                "--seed",
                "11",
                "--trials",
                "5",
                "--json",
                out.to_str().unwrap(),
            ]);
            assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
            std::fs::read(out).unwrap()
        })
        .collect();
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn every_entry_carries_an_anchor() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    run(&[
        "run",
        cube_scenario().to_str().unwrap(),
        "--json",
        out.to_str().unwrap(),
    ]);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let entries = report["entries"].as_array().unwrap();
    assert!(entries.len() > 20);
    for e in entries {
        assert!(!e["anchor"].as_str().unwrap().is_empty(), "{e}");
        assert_ne!(e["status"], "fail", "{e}");
    }
}

#[test]
fn transfer_reports_atoms_and_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        r#"{{"schema":1,"space":{CUBE_SPACE},"vector_measures":{{"mu1":{{"entries":{{"t1":[3,0,0],"t2":[0,-1,0.5]}}}}}},"commands":[{{"op":"transfer","measure":"mu1"}}]}}"#
    );
    let p = write(&dir, "s.json", &body);
    let out = dir.path().join("r.json");
    let o = run(&["run", p.to_str().unwrap(), "--json", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let r = &report["entries"][0]["result"];
    let atoms = r["k_mu"]["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 2);
    assert_eq!(atoms[0]["t"], "t1");
    assert_eq!(atoms[0]["w"], 3.0);
    assert_eq!(atoms[0]["xstar"], serde_json::json!([1.0, 0.0, 0.0]));
    assert_eq!(r["roundtrip_residual"], 0.0);
    assert_eq!(report["entries"][0]["status"], "pass");
}

#[test]
fn core_rejection_exits_with_input_error() {
    // A measure outside N(mu) cannot be compared by <_D.
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        r#"{{"schema":1,"space":{CUBE_SPACE},"atomic_measures":{{
            "a":{{"atoms":[{{"t":"t","xstar":[0.5,0,0],"w":2}}]}},
            "b":{{"atoms":[{{"t":"t","xstar":[1,0,0],"w":1}}]}}}},
            "commands":[{{"op":"precd","nu1":"a","nu2":"b"}},{{"op":"mass","measure":"b"}}]}}"#
    );
    let p = write(&dir, "s.json", &body);
    let o = run(&["run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    assert!(text.contains("ERROR"), "{text}");
    assert!(
        text.contains("[1] mass ok"),
        "later commands still run: {text}"
    );
}

#[test]
fn verify_reports_counts_and_tolerance() {
    let o = run(&["verify", "disintegration", "--trials", "10", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("10/10 trials passed"), "{text}");
    assert!(text.contains("tolerance 1e-12"), "{text}");
}
