use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logarrange"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in {report}"))
}

#[test]
fn solve_star_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let perm = dir.path().join("star.perm");
    let o = run(&["solve", "-i", fixture("star.txt").to_str().unwrap(), "--out-perm", perm.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = stdout(&o);
    assert_eq!(value(&r, "cost"), "1");
    assert!((value(&r, "beta").parse::<f64>().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(value(&r, "name"), "star");
    assert_eq!(value(&r, "nodes"), "4");
    let order: Vec<String> = std::fs::read_to_string(&perm).unwrap().lines().map(String::from).collect();
    assert_eq!(order.len(), 4);
    let center = order.iter().position(|l| l == "10").unwrap();
    assert!(center == 1 || center == 2);
}

#[test]
fn same_seed_gives_identical_permutations() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for k in 0..2 {
        let perm = dir.path().join(format!("p{k}"));
        let o = run(&["solve", "-i", "gen:pa:3000:3:4:shuffle=1", "--seed", "1", "--out-perm", perm.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        files.push(std::fs::read(perm).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn missing_input_fails() {
    let o = run(&["solve", "-i", "/nonexistent/graph.txt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("No such file"), "{}", stderr(&o));
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(run(&["solve"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "-i", "gen:path:10", "--preset", "turbo"]).status.code(), Some(2));
    let o = run(&["solve", "-i", "gen:path:10", "--theta1", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("theta"), "{}", stderr(&o));
}

#[test]
fn eval_reproduces_solve_cost() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    let perm = dir.path().join("g.perm");
    let o = run(&["generate", "gen:regular:500:4:2", "--out", graph.to_str().unwrap()]);
    assert!(o.status.success());
    let solved = run(&["solve", "-i", graph.to_str().unwrap(), "--out-perm", perm.to_str().unwrap()]);
    assert!(solved.status.success(), "{}", stderr(&solved));
    let eval = run(&["eval", "-i", graph.to_str().unwrap(), "--perm", perm.to_str().unwrap(), "--compare"]);
    assert!(eval.status.success(), "{}", stderr(&eval));
    let (s, e) = (stdout(&solved), stdout(&eval));
    assert_eq!(value(&s, "cost"), value(&e, "cost"));
    assert_eq!(value(&s, "beta"), value(&e, "beta"));
    assert!(value(&e, "ratio").parse::<f64>().unwrap() < 1.0);
}

#[test]
fn eval_examples() {
    let dir = tempfile::tempdir().unwrap();
    let perm = dir.path().join("perm");
    std::fs::write(&perm, "5\n6\n7\n8\n9\n").unwrap();
    let o = run(&["eval", "-i", fixture("path.txt").to_str().unwrap(), "--perm", perm.to_str().unwrap()]);
    assert_eq!(value(&stdout(&o), "beta"), "0");

    std::fs::write(&perm, "2\n0\n1\n").unwrap();
    let o = run(&["eval", "-i", fixture("triangle.txt").to_str().unwrap(), "--perm", perm.to_str().unwrap()]);
    let b: f64 = value(&stdout(&o), "beta").parse().unwrap();
    assert!((b - 1.0 / 3.0).abs() < 1e-15);

    std::fs::write(&perm, "5\n6\n8\n9\n").unwrap();
    let o = run(&["eval", "-i", fixture("path.txt").to_str().unwrap(), "--perm", perm.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains('7'), "{}", stderr(&o));
}

#[test]
fn json_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = run(&[
        "solve", "-i", "gen:grid:20x20", "--report", report.to_str().unwrap(), "--report-format", "json",
        "--preset", "fast", "--nn-k", "3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["nodes"], 400);
    assert_eq!(v["params"]["nn_k"], 3);
    assert_eq!(v["params"]["test_vectors"], 1);
    assert!(v["time"]["total"].as_f64().unwrap() >= 0.0);
    let b = v["beta"].as_f64().unwrap();
    assert!((b - v["cost"].as_f64().unwrap() / v["total_weight"].as_f64().unwrap()).abs() <= 1e-12 * b);
}

#[test]
fn bench_suite() {
    let dir = tempfile::tempdir().unwrap();
    let curve = dir.path().join("curve.txt");
    let o = run(&[
        "bench", "--suite", fixture("suite.txt").to_str().unwrap(), "--errors", "50",
        "--error-curve", curve.to_str().unwrap(), "--jobs", "2",
    ]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let r = stdout(&o);
    assert!(r.contains("entry name=tiny-grid status=ok"));
    assert!(r.contains("entry name=tiny-path status=ok"));
    assert!(r.lines().any(|l| l.starts_with("slope=")));
    assert_eq!(value(&r, "placement_negative"), "0");
    let errors: Vec<f64> = std::fs::read_to_string(curve).unwrap().lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(errors.len(), 100);
    assert!(errors.windows(2).all(|w| w[0] <= w[1]) && errors[0] >= 0.0);
}

#[test]
fn bench_expectation_failure_exits_one() {
    let o = run(&["bench", "--suite", fixture("failing_suite.txt").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("pass=false"));
}

#[test]
fn error_distribution_command() {
    let o = run(&["error-distribution", "-i", "gen:pa:2000:4:1", "--samples", "300"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = stdout(&o);
    assert_eq!(value(&r, "samples"), "300");
    assert_eq!(value(&r, "negative"), "0");
}

#[test]
fn directed_and_weighted_input() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("d.txt");
    std::fs::write(&g, "0 1 2.5\n# comment\n1 0 0.5\n1 2 1\n").unwrap();
    let o = run(&["solve", "-i", g.to_str().unwrap(), "--directed", "--weighted"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = stdout(&o);
    assert_eq!(value(&r, "directed"), "true");
    assert_eq!(value(&r, "total_weight"), "4");
    assert_eq!(value(&r, "cost"), "0");
}
