//! End-to-end checks of the command-line driver: exit codes, file
//! formats, and query outputs against the brute-force oracle.

use std::fs;
use std::path::Path;
use std::process::Command;

use bypass::graph::load_graph;
use bypass::runtime::LocalMeter;
use bypass::sssp::replacement_distance_bruteforce;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bypass"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("spawn bypass");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.push("--out");
    let p = path.to_str().unwrap().to_string();
    full.push(&p);
    let (code, _, err) = run(&full);
    assert_eq!(code, 0, "gen failed: {err}");
    p
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a.graph", &["--model", "gnm", "--n", "16", "--m", "48", "--seed", "9"]);
    let b = gen(dir.path(), "b.graph", &["--model", "gnm", "--n", "16", "--m", "48", "--seed", "9"]);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn build_query_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let graph = gen(
        dir.path(),
        "g.graph",
        &["--model", "gnm", "--n", "12", "--m", "40", "--seed", "3"],
    );
    let oracle = dir.path().join("g.oracle").to_str().unwrap().to_string();
    let report = dir.path().join("meter.csv").to_str().unwrap().to_string();
    let (code, out, err) = run(&[
        "build", "--in", &graph, "--pipeline", "b", "--seed", "5", "--out", &oracle, "--report",
        &report,
    ]);
    assert_eq!(code, 0, "build failed: {err}");
    assert!(out.contains("stored words"));
    let meter = fs::read_to_string(&report).unwrap();
    assert!(meter.starts_with("phase,work,span,depth\n"));
    assert!(meter.lines().count() > 3);

    // single query matches brute force
    let loaded = load_graph(fs::read_to_string(&graph).unwrap().as_bytes()).unwrap();
    let g = loaded.graph;
    let e0 = (g.src(0), g.dst(0));
    let (code, out, err) = run(&[
        "query",
        "--in",
        &graph,
        "--oracle",
        &oracle,
        "2",
        "7",
        &e0.0.to_string(),
        &e0.1.to_string(),
    ]);
    assert_eq!(code, 0, "query failed: {err}");
    let mut lm = LocalMeter::default();
    let want = replacement_distance_bruteforce(&g, 2, 7, 0, &mut lm);
    assert_eq!(out.trim(), want.to_string());

    // batch file: one answer per line in order
    let batch = dir.path().join("batch.txt");
    let mut lines = String::from("# batch queries\n");
    for (x, y) in [(0u32, 5u32), (3, 9), (9, 3)] {
        lines.push_str(&format!("{x} {y} {} {}\n", e0.0, e0.1));
    }
    fs::write(&batch, lines).unwrap();
    let (code, out, _) = run(&[
        "query",
        "--in",
        &graph,
        "--oracle",
        &oracle,
        "--batch",
        batch.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let answers: Vec<&str> = out.lines().collect();
    assert_eq!(answers.len(), 3);
    for (i, (x, y)) in [(0u32, 5u32), (3, 9), (9, 3)].iter().enumerate() {
        let want = replacement_distance_bruteforce(&g, *x, *y, 0, &mut lm);
        assert_eq!(answers[i], want.to_string(), "batch line {i}");
    }
}

#[test]
fn query_refuses_fingerprint_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let graph = gen(
        dir.path(),
        "g.graph",
        &["--model", "gnm", "--n", "10", "--m", "30", "--seed", "3"],
    );
    let other = gen(
        dir.path(),
        "h.graph",
        &["--model", "gnm", "--n", "10", "--m", "30", "--seed", "4"],
    );
    let oracle = dir.path().join("g.oracle").to_str().unwrap().to_string();
    let (code, _, _) = run(&["build", "--in", &graph, "--seed", "5", "--out", &oracle]);
    assert_eq!(code, 0);
    let (code, _, err) = run(&["query", "--in", &other, "--oracle", &oracle, "0", "1", "0", "1"]);
    assert_eq!(code, 2, "expected I/O exit code, stderr: {err}");
    assert!(err.contains("fingerprint"));
}

#[test]
fn verify_passes_and_negative_control_fails() {
    let dir = tempfile::tempdir().unwrap();
    let graph = gen(
        dir.path(),
        "g.graph",
        &[
            "--model",
            "path-chords",
            "--n",
            "24",
            "--m",
            "36",
            "--wmax",
            "4",
            "--seed",
            "5",
        ],
    );
    let (code, out, err) = run(&[
        "verify", "--in", &graph, "--pipeline", "a", "--trials", "3", "--seed", "2",
    ]);
    assert_eq!(code, 0, "verify failed: {out} {err}");
    assert!(out.contains("3/3 trials accepted"));

    // crippled coverage depth must be detected: exit code 3, mismatches
    // named with their triples
    let report = dir.path().join("verify.csv").to_str().unwrap().to_string();
    let (code, out, _) = run(&[
        "verify", "--in", &graph, "--pipeline", "a", "--trials", "2", "--seed", "2", "--gamma",
        "0.01", "--report", &report,
    ]);
    assert_eq!(code, 3);
    assert!(out.contains("mismatches"));
    let csv = fs::read_to_string(&report).unwrap();
    assert!(csv.starts_with("trial,seed,"));
}

#[test]
fn bench_writes_grid_rows() {
    let dir = tempfile::tempdir().unwrap();
    let graph = gen(
        dir.path(),
        "g.graph",
        &["--model", "gnm", "--n", "12", "--m", "48", "--seed", "8"],
    );
    let (code, out, err) = run(&[
        "bench", "--in", &graph, "--pipelines", "a,c", "--h", "2,4", "--seed", "1",
    ]);
    assert_eq!(code, 0, "bench failed: {err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "pipeline,h,n,m,work,span,oracle_words,wall_ms,accepted");
    assert_eq!(lines.len(), 1 + 3); // a once, c at h=2 and h=4
}

#[test]
fn usage_and_io_exit_codes() {
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["gen", "--model", "nonsense", "--n", "4", "--m", "2", "--out", "/tmp/x"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["build", "--in", "/nonexistent/file.graph", "--out", "/tmp/x.oracle"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["--help"]);
    assert_eq!(code, 0);
}
