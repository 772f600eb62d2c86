use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ncqpbtr::cli::{ProblemFile, SolutionFile, TRACE_HEADER};

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ncqpbtr"))
}

fn run(args: &[&str]) -> Output {
    exe().args(args).output().expect("spawn ncqpbtr")
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn write_problem(dir: &Path, name: &str, file: &ProblemFile) -> String {
    let p = dir.join(name);
    std::fs::write(&p, file.to_json()).unwrap();
    p.to_str().unwrap().to_owned()
}

#[allow(clippy::too_many_arguments)]
fn diagonal(
    n: usize,
    q: f64,
    c: f64,
    lo: f64,
    hi: f64,
    delta: f64,
    tau: f64,
    pi: f64,
) -> ProblemFile {
    let mut qm = vec![0.0; n * n];
    for i in 0..n {
        qm[i * n + i] = q;
    }
    ProblemFile {
        n,
        q: qm,
        c: vec![c; n],
        x_lower: vec![lo; n],
        x_upper: vec![hi; n],
        delta,
        tau_f: tau,
        pi_f: pi,
        name: None,
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_symmetric_instance() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_problem(
        dir.path(),
        "sym.json",
        &diagonal(3, 0.0, 0.0, -2.0, 2.0, 1.0, 1.0, 1.0),
    );
    let out = dir.path().join("sol.json");
    let trace = dir.path().join("trace.csv");
    let o = run(&[
        "solve",
        &input,
        "--tol",
        "1e-6",
        "--out",
        s(&out),
        "--trace",
        s(&trace),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let sol = SolutionFile::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(sol.x_hat.iter().all(|x| x.abs() <= 1e-6));
    assert_eq!(sol.certified_gap, 1e-6);
    let text = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().next().unwrap(), TRACE_HEADER.join(","));
    assert!(text.lines().count() > 1);
}

#[test]
fn solve_reports_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_problem(
        dir.path(),
        "far.json",
        &diagonal(2, 1.0, 0.0, 3.0, 4.0, 1.0, 1.0, 1.0),
    );
    let o = run(&["solve", &input, "--out", s(&dir.path().join("x.json"))]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("infeasible"), "{err}");
    assert_eq!(err.trim().lines().count(), 1);
}

#[test]
fn parse_and_io_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"n\": 2,").unwrap();
    let out = dir.path().join("x.json");
    assert_eq!(
        run(&["solve", s(&bad), "--out", s(&out)]).status.code(),
        Some(2)
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        run(&["solve", s(&missing), "--out", s(&out)]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["solve"]).status.code(), Some(2));
}

#[test]
fn dimension_mismatch_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut f = diagonal(2, 1.0, 0.0, -1.0, 1.0, 1.0, 1.0, 1.0);
    f.c.push(0.0);
    let input = write_problem(dir.path(), "mm.json", &f);
    assert_eq!(run(&["check", &input]).status.code(), Some(3));
}

#[test]
fn generate_matches_golden_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        assert_eq!(
            run(&["generate", "--n", "2", "--seed", "0", "--out", s(p)])
                .status
                .code(),
            Some(0)
        );
    }
    let a = std::fs::read(&a).unwrap();
    assert_eq!(a, std::fs::read(&b).unwrap());
    assert_eq!(a, std::fs::read(golden("seed0_n2.problem.json")).unwrap());
}

#[test]
fn generate_rejects_bad_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    assert_eq!(
        run(&["generate", "--n", "0", "--seed", "0", "--out", s(&out)])
            .status
            .code(),
        Some(3)
    );
    let o = run(&[
        "generate",
        "--n",
        "2",
        "--seed",
        "0",
        "--tightness",
        "1.5",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn generated_indefinite_instance_is_certified() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let o = run(&[
        "generate",
        "--n",
        "4",
        "--seed",
        "3",
        "--q-min-eig",
        "-2",
        "--tau-f",
        "0.01",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["check", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("Certified"));
}

#[test]
fn solve_matches_golden_snapshot_with_any_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let want = std::fs::read(golden("seed0_n2.solution.json")).unwrap();
    for threads in ["1", "2", "8"] {
        let out = dir.path().join(format!("sol{threads}.json"));
        let o = exe()
            .args([
                "solve",
                s(&golden("seed0_n2.problem.json")),
                "--tol",
                "1e-6",
                "--out",
                s(&out),
            ])
            .env("NCQPBTR_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(std::fs::read(&out).unwrap(), want, "threads = {threads}");
    }
}

#[test]
fn check_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let psd = write_problem(
        dir.path(),
        "psd.json",
        &diagonal(2, 1.0, 0.5, -1.0, 1.0, 1.0, 1.0, 0.1),
    );
    let o = run(&["check", &psd]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(
        text.contains("Certified") && text.contains("|Gamma_hat| = 8"),
        "{text}"
    );
    assert!(text.contains("tau0 = ") && text.contains("L = "));

    let indef = write_problem(
        dir.path(),
        "indef.json",
        &diagonal(2, -5.0, 0.0, -2.0, 2.0, 1.0, 0.01, 0.01),
    );
    let o = run(&["check", &indef]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("Unknown"));

    let far = write_problem(
        dir.path(),
        "far.json",
        &diagonal(1, 1.0, 0.0, 2.0, 3.0, 1.0, 1.0, 1.0),
    );
    assert_eq!(run(&["check", &far]).status.code(), Some(3));
}

#[test]
fn oracle_compare() {
    let dir = tempfile::tempdir().unwrap();
    let scalar = write_problem(
        dir.path(),
        "s.json",
        &diagonal(1, 1.0, 0.3, -2.0, 2.0, 1.0, 1.0, 0.01),
    );
    let o = run(&["oracle-compare", &scalar, "--tol", "1e-6"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    assert!(String::from_utf8_lossy(&o.stdout).contains("gap = "));

    let o = run(&[
        "oracle-compare",
        s(&golden("seed0_n2.problem.json")),
        "--tol",
        "1e-6",
    ]);
    assert_eq!(o.status.code(), Some(0));

    let big = write_problem(
        dir.path(),
        "big.json",
        &diagonal(4, 1.0, 0.0, -1.0, 1.0, 1.0, 1.0, 1.0),
    );
    assert_eq!(
        run(&["oracle-compare", &big, "--tol", "1e-6"])
            .status
            .code(),
        Some(6)
    );
}
