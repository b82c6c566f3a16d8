use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn somm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_somm"))
}

fn litmus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../litmus")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    somm().args(args).output().expect("somm runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_exit_codes_follow_the_verdict() {
    let lb = litmus("LB+ctrl.lisa");
    let o = run(&["check", path(&lb), "-m", "sc"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("LB+ctrl under sc: Forbidden"));

    let fd = litmus("LB+false-dep.lisa");
    assert_eq!(code(&run(&["check", path(&fd), "-m", "jr"])), 0);
    assert_eq!(code(&run(&["check", "no/such/file.lisa", "-m", "sc"])), 2);
    assert_eq!(code(&run(&["check", path(&lb), "-m", "tso"])), 2);
}

#[test]
fn machine_record_is_stable() {
    let lb = litmus("LB+ctrl.lisa");
    let o = run(&["check", path(&lb), "-m", "sc", "--machine"]);
    let mut v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    v["input"] = Value::Null;
    v["millis"] = Value::Null;
    let golden: Value = serde_json::from_str(include_str!("golden/lb_ctrl_sc.json")).unwrap();
    assert_eq!(v, golden);
}

#[test]
fn errors_are_classified() {
    let lb = litmus("LB+ctrl.lisa");
    let cases: [(&[&str], &str); 3] = [
        (&["--event-cap", "3"], "event_cap"),
        (&["--backend", "emit-qcir"], "usage"),
        (
            &["--backend", "oracle", "--oracle-budget", "10"],
            "oracle_budget",
        ),
    ];
    for (extra, kind) in cases {
        let mut args = vec!["check", path(&lb), "-m", "sc", "--machine"];
        args.extend_from_slice(extra);
        let o = run(&args);
        assert_eq!(code(&o), 2, "{extra:?}");
        let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
        assert_eq!(v["status"], "error");
        assert_eq!(v["error"]["kind"], kind, "{extra:?}");
    }
    let o = run(&["check", "missing.lisa", "-m", "sc", "--machine"]);
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["error"]["kind"], "io");
}

#[test]
fn emit_writes_instance_and_sidecar_then_solve_reads_it() {
    let dir = tempfile::tempdir().unwrap();
    let sb = litmus("SB.lisa");
    for (backend, ext, model, expect) in [
        ("emit-qcir", "qcir", "ra", 10),
        ("emit-qdimacs", "qdimacs", "sc", 20),
    ] {
        let out = dir.path().join(format!("sb.{ext}"));
        let o = run(&[
            "emit",
            path(&sb),
            "-m",
            model,
            "--backend",
            backend,
            "-o",
            path(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let meta: Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join(format!("sb.{ext}.json"))).unwrap(),
        )
        .unwrap();
        assert_eq!(meta["format"], ext);
        assert_eq!(meta["model"], model);
        assert_eq!(meta["quantifiers"], serde_json::json!(["exists"]));
        assert_eq!(code(&run(&["solve", path(&out)])), expect);
    }
}

#[test]
fn bench_prints_one_row_per_size() {
    let o = run(&[
        "bench",
        "-m",
        "sc",
        "--from",
        "2",
        "--to",
        "4",
        "--workers",
        "2",
    ]);
    assert_eq!(code(&o), 0);
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(
        rdr.headers().unwrap(),
        vec!["n", "events", "variables", "verdict", "millis"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    for (row, n) in rows.iter().zip(2..) {
        assert_eq!(&row[0], n.to_string());
        assert_eq!(&row[1], (4 * n).to_string());
        assert_eq!(&row[3], "Forbidden");
    }
}

#[test]
fn validate_accepts_built_structures_and_flags_broken_dumps() {
    let mp = litmus("MP.lisa");
    let o = run(&["validate", path(&mp)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("OK"));

    let dump = run(&["dump", path(&mp), "--as", "json"]);
    let mut es: Value = serde_json::from_slice(&dump.stdout).unwrap();
    // A self-conflict breaks irreflexivity.
    es["conflict"]
        .as_array_mut()
        .unwrap()
        .push(serde_json::json!([1, 1]));
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("broken.json");
    std::fs::write(&file, es.to_string()).unwrap();
    let o = run(&["validate", path(&file), "--es", "--machine"]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["ok"], false);
    let axioms: Vec<&str> = v["violations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["axiom"].as_str().unwrap())
        .collect();
    assert!(
        axioms.iter().any(|a| a.starts_with("axiom 4 ")),
        "{axioms:?}"
    );
}

#[test]
fn dump_renders_dot_and_sentences() {
    let lb = litmus("LB+ctrl.lisa");
    let o = run(&["dump", path(&lb), "--as", "dot"]);
    assert!(stdout(&o).starts_with("digraph"));
    let o = run(&["dump", path(&lb), "--as", "sentence", "-m", "ra"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("exists-so"));
    assert_eq!(code(&run(&["dump", path(&lb), "--as", "sentence"])), 2);
}

#[cfg(unix)]
#[test]
fn external_backend_runs_the_configured_solver() {
    use std::os::unix::fs::PermissionsExt;

    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("solver.sh");
    std::fs::write(
        &script,
        format!(
            "#!/bin/sh\nexec '{}' solve \"$1\"\n",
            env!("CARGO_BIN_EXE_somm")
        ),
    )
    .unwrap();
    std::fs::set_permissions(&script, std::fs::Permissions::from_mode(0o755)).unwrap();
    let sb = litmus("SB.lisa");
    for (model, expect) in [("sc", 1), ("ra", 0)] {
        let o = somm()
            .args(["check", path(&sb), "-m", model, "--backend", "external"])
            .env("SOMM_QBF_SOLVER", &script)
            .output()
            .unwrap();
        assert_eq!(
            code(&o),
            expect,
            "{model}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let o = somm()
        .args([
            "check",
            path(&sb),
            "-m",
            "sc",
            "--backend",
            "external",
            "--machine",
        ])
        .env_remove("SOMM_QBF_SOLVER")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["error"]["kind"], "solver_unavailable");
}
