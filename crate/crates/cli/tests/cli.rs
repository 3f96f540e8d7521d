use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_weyl-forge"));
    c.env_remove("WEYL_FORGE_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn list_identities_marks_jets_and_global_entries() {
    let o = run(&["list", "identities"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.lines().any(|l| l.starts_with("bochner2.teo-sbf  [Einstein,4D]  jets:5")));
    assert!(s.lines().any(|l| l.starts_with("global.prop1  ") && l.contains("out-of-scope(global)")));
    assert!(s.lines().all(|l| l == l.trim_end()));
}

#[test]
fn list_manifolds_shows_summaries() {
    let o = run(&["list", "manifolds"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 11);
    assert!(s.contains("schwarzschild-de-sitter  Einstein(λ=Λ) ∇W≠0"));
}

#[test]
fn unknown_manifold_is_a_config_error() {
    let o = run(&["verify", "--manifolds", "s5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("s5"));
}

#[test]
fn unknown_identity_lists_valid_ids() {
    let o = run(&["verify", "--manifolds", "flat", "--identities", "no.such-thing"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("no.such-thing"));
    assert!(e.contains("bochner2.teo-sbf"));
}

#[test]
fn bad_flags_are_config_errors() {
    for args in [
        &["verify", "--jet-order", "1"][..],
        &["verify", "--jet-order", "nine"],
        &["verify", "--tol", "weyl.trace-free"],
        &["verify", "--tol", "nonexistent=1e-3"],
        &["verify", "--points", "0"],
        &["verify", "--format", "xml"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn negative_control_run_exits_zero_with_expected_failures() {
    let o = run(&[
        "verify",
        "--manifolds",
        "perturbed-schwarzschild",
        "--identities",
        "bochner2.teo-sbf",
        "--points",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 5);
    assert!(results.iter().all(|r| r["status"] == "expected_fail"));
    assert_eq!(v["summary"]["exit_code"], 0);
}

#[test]
fn tightened_tolerance_fails_with_exit_one() {
    let o = run(&[
        "verify",
        "--manifolds",
        "schwarzschild",
        "--identities",
        "cotton.divergence-free",
        "--points",
        "3",
        "--tol",
        "cotton.divergence-free=1e-30",
        "--format",
        "text",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn deterministic_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("r{i}.json"))).collect();
    for p in &paths {
        let o = run(&[
            "verify",
            "--manifolds",
            "cp2,schwarzschild",
            "--identities",
            "algebra,cotton",
            "--points",
            "3",
            "--deterministic",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert!(v["environment"].get("timestamp").is_none());
}

#[test]
fn csv_has_fixed_header() {
    let o = run(&["verify", "--manifolds", "s4", "--identities", "weyl.trace-free", "--points", "2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(
        lines.next().unwrap(),
        "identity_id,manifold,x1,x2,x3,x4,residual_abs,scale,residual_rel,status,jet_order"
    );
    assert_eq!(lines.count(), 2);
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["verify", "--manifolds", "schwarzschild", "--identities", "key2", "--points", "4", "--deterministic"];
    let serial = bin().args(args).env("WEYL_FORGE_THREADS", "1").output().unwrap();
    let parallel = bin().args(args).env("WEYL_FORGE_THREADS", "3").output().unwrap();
    assert_eq!(serial.status.code(), Some(0));
    assert_eq!(serial.stdout, parallel.stdout);
    let bad = bin().args(args).env("WEYL_FORGE_THREADS", "many").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
