use std::process::Command;

use globop::cli::run;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["globop", "--no-cache"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn temp_dir(tag: &str) -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("globop-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn star_of_two_edges() {
    let (code, out, _) = call(&[
        "tree", "star", "--left", "1(1)", "--right", "1(1)", "--level", "0",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "tree{1; top=[1,1]; bot=[0]}");
}

#[test]
fn tree_json_round_trip() {
    let (code, out, _) = call(&["tree", "parse", "--format", "json", "1(2) *[2,1] 1(2)"]);
    assert_eq!(code, 0);
    let (code2, text, _) = call(&["tree", "parse", out.trim()]);
    assert_eq!(code2, 0);
    assert_eq!(text.trim(), "tree{2; top=[2,2]; bot=[1]}");
}

#[test]
fn complex_emit_counts() {
    let (code, out, _) = call(&["complex", "emit", "--n", "2", "--max-dim", "1"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let cells = v["cells"].as_array().unwrap();
    let dim1 = cells
        .iter()
        .filter(|c| c["arity"]["tree"]["dim"] == 1)
        .count();
    assert_eq!(dim1, 7);
}

#[test]
fn exit_codes() {
    assert_eq!(call(&["tree", "parse", "1("]).0, 2);
    assert_eq!(call(&["no-such-command"]).0, 2);
    assert_eq!(call(&["--help"]).0, 0);
    assert_eq!(
        call(&[
            "operad",
            "equal",
            "--complex",
            "0",
            "--property",
            "id",
            "mu(1,0)",
            "mu(1,0)"
        ])
        .0,
        0
    );
    assert_eq!(
        call(&[
            "operad",
            "equal",
            "--complex",
            "0",
            "--property",
            "id",
            "mu(1,0)",
            "u1"
        ])
        .0,
        1
    );
    assert_eq!(call(&["pushout", "--n", "1", "--p", "1"]).0, 2);
    assert_eq!(call(&["verify-example", "nope"]).0, 2);
}

#[test]
fn contraction_lookup_depends_on_property() {
    let x = "gamma(mu(1,0); u1 *[1,0] mu(1,0))";
    let y = "gamma(mu(1,0); mu(1,0) *[1,0] u1)";
    let base = ["--complex", "0", "--max-width", "3"];
    let mut args = vec!["contract", "find"];
    args.extend_from_slice(&base);
    args.extend_from_slice(&["--x", x, "--y", y]);
    let mut with_c = args.clone();
    with_c.extend_from_slice(&["--property", "c"]);
    let (code, out, _) = call(&with_c);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["dim"], 2);
    let mut with_id = args;
    with_id.extend_from_slice(&["--property", "id"]);
    assert_eq!(call(&with_id).0, 1);
}

#[test]
fn worked_example_certificate() {
    let (code, out, _) = call(&["verify-example", "3-3"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.lines().last().unwrap().ends_with("pass"));
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 6);
}

#[test]
fn coend_cell_files_round_trip() {
    let dir = temp_dir("coend");
    let (code, mu, _) = call(&["coend", "mu", "--n", "2", "--p", "0", "--variant", "right"]);
    assert_eq!(code, 0);
    let file = dir.join("mu.json");
    std::fs::write(&file, &mu).unwrap();
    let path = file.to_str().unwrap();
    let (code, violations, _) = call(&["coend", "check", path]);
    assert_eq!(code, 0);
    assert_eq!(violations.trim(), "[]");
    let (code, again, _) = call(&["export", "cell", path]);
    assert_eq!(code, 0);
    assert_eq!(again, mu);
    let (code, _, _) = call(&["coend", "boundary", path, "--side", "target"]);
    assert_eq!(code, 0);
}

#[test]
fn tampered_cell_fails_check() {
    let dir = temp_dir("tamper");
    let (_, mu, _) = call(&["coend", "mu", "--n", "1", "--p", "0"]);
    let mut v: serde_json::Value = serde_json::from_str(&mu).unwrap();
    let images = v["maps"][1][1]["images"].as_object_mut().unwrap();
    images.insert(
        "mu(1,0)".into(),
        serde_json::Value::String("gamma(mu(1,0); mu(1,0) *[1,0] u1)".into()),
    );
    let file = dir.join("bad.json");
    std::fs::write(&file, serde_json::to_string(&v).unwrap()).unwrap();
    let (code, _, _) = call(&["coend", "check", file.to_str().unwrap()]);
    assert_ne!(code, 0);
}

#[test]
fn dot_export_is_deterministic() {
    let a = call(&[
        "export",
        "--format",
        "dot",
        "complex",
        "--n",
        "2",
        "--max-dim",
        "2",
    ]);
    let b = call(&[
        "export",
        "--format",
        "dot",
        "complex",
        "--n",
        "2",
        "--max-dim",
        "2",
    ]);
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
    assert!(a.1.starts_with("digraph"));
    let s = call(&["export", "--format", "dot", "scheme", "1(2) *[2,1] 1(2)"]);
    assert_eq!(s.0, 0);
    assert_eq!(
        s.1.matches(" -> ").count(),
        2 * (s.1.matches("shape=box").count())
    );
}

#[test]
fn cache_reuses_results() {
    let dir = temp_dir("cache");
    let d = dir.to_str().unwrap();
    let args = [
        "--cache-dir",
        d,
        "operad",
        "verify",
        "--complex",
        "0",
        "--property",
        "su",
        "--max-width",
        "2",
    ];
    let mut out1 = Vec::new();
    let mut out2 = Vec::new();
    assert_eq!(
        run(
            std::iter::once("globop").chain(args),
            &mut out1,
            &mut Vec::new()
        ),
        0
    );
    let files: Vec<_> = std::fs::read_dir(&dir).unwrap().collect();
    assert_eq!(files.len(), 1);
    assert_eq!(
        run(
            std::iter::once("globop").chain(args),
            &mut out2,
            &mut Vec::new()
        ),
        0
    );
    assert_eq!(out1, out2);
}

#[test]
fn binary_runs() {
    let out = Command::new(env!("CARGO_BIN_EXE_globop"))
        .args([
            "--no-cache",
            "tree",
            "enumerate",
            "--dim",
            "1",
            "--max-leaves",
            "3",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 4);
    let bad = Command::new(env!("CARGO_BIN_EXE_globop"))
        .args(["tree", "parse", ")"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
