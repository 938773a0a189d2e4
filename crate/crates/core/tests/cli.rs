use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netdesign"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn edge_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#') && !l.is_empty()).collect()
}

#[test]
fn generate_small_ring() {
    let dir = TempDir::new().unwrap();
    let out = run(&["generate", "--family", "ring", "--n", "9", "--no-header"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 18);
    assert_eq!(text.lines().next(), Some("0 1"));

    let out = run(&["generate", "--family", "ring", "--n", "9", "--out", "ring.txt"], dir.path());
    assert!(out.status.success());
    let saved = std::fs::read_to_string(dir.path().join("ring.txt")).unwrap();
    assert!(saved.starts_with("# netdesign"));
    assert_eq!(edge_lines(&saved).len(), 18);
}

#[test]
fn generation_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let args = ["--seed", "11", "generate", "--family", "er", "--n", "300", "--edges", "610"];
    let a = run(&args, dir.path());
    let b = run(&args, dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["--seed", "12", "generate", "--family", "er", "--n", "300", "--edges", "610"], dir.path());
    assert_ne!(edge_lines(&String::from_utf8_lossy(&a.stdout)), edge_lines(&String::from_utf8_lossy(&c.stdout)));
}

#[test]
fn disconnected_graph_is_a_domain_error() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("split.txt"), "0 1\n2 3\n").unwrap();
    let out = run(&["evaluate", "--graph", "split.txt"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["message"], "graph not connected");
    assert_eq!(err["error"]["exit_code"], 2);
}

#[test]
fn usage_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let out = run(&["generate", "--family", "ba", "--rewire", "0.2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["evaluate", "--graph", "missing.txt"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    std::fs::write(dir.path().join("bad.txt"), "0 1\n1 x\n").unwrap();
    let out = run(&["analyze", "--graph", "bad.txt"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let out = run(&["simulate", "--graph", "bad.txt"], dir.path());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--scheme"));
    assert!(run(&["--help"], dir.path()).status.success());
}

#[test]
fn evaluate_reports_closed_forms() {
    let dir = TempDir::new().unwrap();
    run(&["generate", "--family", "ring", "--n", "101", "--out", "r.txt"], dir.path());
    let v = stdout_json(&run(&["evaluate", "--graph", "r.txt", "--scheme", "uc", "--routing", "spr"], dir.path()));
    let r = &v["results"][0];
    let rc = r["rc_analytic"].as_f64().unwrap();
    assert!((rc - 404.0 / 14.0).abs() < 1e-9);
    assert!((r["rc_closed_form"]["value"].as_f64().unwrap() - rc).abs() < 1e-9);
    assert_eq!(v["meta"]["tool"], "netdesign");
}

#[test]
fn analyze_writes_profiles() {
    let dir = TempDir::new().unwrap();
    run(&["generate", "--family", "lattice", "--rows", "5", "--cols", "5", "--out", "l.txt"], dir.path());
    let out = run(&["analyze", "--graph", "l.txt", "--out", "a.csv"], dir.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let mut rows = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    assert_eq!(rows.headers().unwrap().iter().collect::<Vec<_>>(), ["node", "degree", "b_spr", "b_efr"]);
    assert_eq!(rows.records().count(), 25);
    let v = stdout_json(&run(&["analyze", "--graph", "l.txt", "--routing", "efr"], dir.path()));
    assert!(v.to_string().contains("efr"));
}

#[test]
fn reproduce_ring_table() {
    let dir = TempDir::new().unwrap();
    let v = stdout_json(&run(&["reproduce", "--families", "ring", "--instances", "1"], dir.path()));
    let means = v["means"].as_array().unwrap();
    assert_eq!(means.len(), 7);
    for m in means {
        let rc = m["rc_analytic"].as_f64().unwrap();
        assert!((rc - 4.0 * 1225.0 / 154.5).abs() < 1e-9, "{m}");
    }
}

#[test]
fn simulate_and_find_rc_on_small_ring() {
    let dir = TempDir::new().unwrap();
    run(&["generate", "--family", "ring", "--n", "41", "--out", "r.txt"], dir.path());
    let sim = |rate: &str| {
        let args = [
            "simulate", "--graph", "r.txt", "--scheme", "uc", "--routing", "spr", "--R", rate,
            "--warmup", "200", "--windows", "4",
        ];
        stdout_json(&run(&args, dir.path()))["eta"].as_f64().unwrap()
    };
    assert!(sim("2") < 0.01);
    assert!(sim("40") > 0.2);

    let args = [
        "find-rc", "--graph", "r.txt", "--scheme", "uc", "--routing", "spr", "--warmup", "300",
        "--windows", "5",
    ];
    let v = stdout_json(&run(&args, dir.path()));
    let (rc, analytic) = (v["rc_sim"].as_f64().unwrap(), v["rc_analytic"].as_f64().unwrap());
    assert!((analytic - 4.0 * 41.0 / 6.5).abs() < 1e-9);
    assert!(rc > 0.8 * analytic && rc < 1.4 * analytic, "{rc} vs {analytic}");
}

#[test]
fn sweep_identity_quantity() {
    let dir = TempDir::new().unwrap();
    let v = stdout_json(&run(
        &["sweep", "--family", "ring", "--quantity", "n", "--sizes", "20,40,80", "--instances", "1"],
        dir.path(),
    ));
    let exponent = v["fits"][0]["exponent"].as_f64().unwrap();
    assert!((exponent - 1.0).abs() < 1e-9);
    let out = run(&["sweep", "--family", "ring", "--quantity", "n", "--sizes", "20,40"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "seed = 21\n[generate]\nfamily = \"ws\"\nn = 200\nno-header = true\n",
    )
    .unwrap();
    let a = run(&["--config", "run.toml", "generate"], dir.path());
    let b = run(&["--seed", "21", "generate", "--family", "ws", "--n", "200", "--no-header"], dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["--config", "run.toml", "--seed", "22", "generate"], dir.path());
    assert_ne!(a.stdout, c.stdout);
}
