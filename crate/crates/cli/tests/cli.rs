use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kstree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kstree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .find(|l| l.starts_with("p "))
        .unwrap()
        .to_string()
}

#[test]
fn build_writes_dimacs_headers() {
    let dir = tempfile::tempdir().unwrap();
    for (k, expected) in [(2, "p cnf 3 4"), (4, "p cnf 23 24"), (8, "p cnf 959 960")] {
        let out = dir.path().join(format!("k{k}.cnf"));
        let o = kstree(&[
            "build",
            "--k",
            &k.to_string(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(header(&out), expected);
    }
}

#[test]
fn build_summary_line() {
    let o = kstree(&["build", "--k", "4"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o).trim(),
        "k=4 n=23 m=24 max_occurrences=12 bound=16 proof_bound=8"
    );
}

#[test]
fn unsupported_k_is_a_usage_error() {
    for k in ["6", "1", "0", "128"] {
        let o = kstree(&["build", "--k", k]);
        assert_eq!(o.status.code(), Some(2), "k = {k}");
    }
    let o = kstree(&["build", "--k", "6"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("power of 2"));
}

#[test]
fn dimacs_only_at_joined_stage() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.cnf");
    let o = kstree(&[
        "build",
        "--k",
        "4",
        "--stage",
        "base",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stage_stats_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("s.json");
    let dot = dir.path().join("t.dot");
    let o = kstree(&[
        "build",
        "--k",
        "4",
        "--stage",
        "base",
        "--stats",
        stats.to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&stats).unwrap()).unwrap();
    assert_eq!(v["k"], 4);
    assert_eq!(v["degree_bound"], 8);
    assert_eq!(v["nodes"], 7);
    let dot = fs::read_to_string(&dot).unwrap();
    assert!(dot.starts_with("digraph tree {"));
    assert_eq!(dot.matches("->").count(), 6);
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    for k in ["2", "4", "8"] {
        let json = dir.path().join(format!("v{k}.json"));
        let o = kstree(&["verify", "--k", k, "--json", json.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stdout(&o));
        let v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
        assert_eq!(v["pass"], true);
        assert!(v["reports"].as_array().unwrap().len() >= 10);
    }
}

#[test]
fn solve_reports_unsat() {
    let o = kstree(&["solve", "--k", "4", "--engine", "brute"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("UNSAT decisions=8388608"));
    for k in ["2", "4", "8"] {
        let o = kstree(&["solve", "--k", k, "--engine", "dpll"]);
        assert!(o.status.success());
        assert!(stdout(&o).starts_with("UNSAT"));
    }
}

#[test]
fn solve_budget_exhaustion_exits_1() {
    let o = kstree(&["solve", "--k", "8", "--budget", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("BUDGET_EXCEEDED"));
}

#[test]
fn brute_force_refuses_large_instances() {
    let o = kstree(&["solve", "--k", "8", "--engine", "brute"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn witness_for_all_false() {
    let zeros = "0".repeat(23);
    let o = kstree(&["witness", "--k", "4", "--assignment", &zeros]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("clause 0"));
    assert!(s.contains("branch 0 1 2 4 8"));
    assert!(s.contains("literals 1 2 4 8"));
}

#[test]
fn witness_rejects_bad_assignments() {
    for bad in ["0101", "0000000000000000000000x"] {
        let o = kstree(&["witness", "--k", "4", "--assignment", bad]);
        assert_eq!(o.status.code(), Some(2), "{bad}");
    }
    let o = kstree(&["witness", "--k", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stats_json() {
    let o = kstree(&["stats", "--k", "8"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["num_vars"], 959);
    assert_eq!(v["num_clauses"], 960);
    assert_eq!(v["k_uniform"], true);
    assert_eq!(v["within_occurrence_bound"], true);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let p = |name: &str| dir.path().join(format!("{tag}.{name}"));
        let o = kstree(&[
            "build",
            "--k",
            "8",
            "--out",
            p("cnf").to_str().unwrap(),
            "--dot",
            p("dot").to_str().unwrap(),
            "--stats",
            p("json").to_str().unwrap(),
        ]);
        assert!(o.status.success());
        let v = kstree(&[
            "verify",
            "--k",
            "8",
            "--json",
            p("verify.json").to_str().unwrap(),
        ]);
        assert!(v.status.success());
        ["cnf", "dot", "json", "verify.json"].map(|n| fs::read(p(n)).unwrap())
    };
    assert_eq!(run("a"), run("b"));
    let w1 = kstree(&["witness", "--k", "8", "--random", "--seed", "9"]);
    let w2 = kstree(&["witness", "--k", "8", "--random", "--seed", "9"]);
    assert_eq!(w1.stdout, w2.stdout);
}
