use std::path::Path;

use nilcsat_cli::{run, slope, Outcome};
use serde_json::Value;

fn nilcsat(args: &[&str]) -> Outcome {
    run(std::iter::once("nilcsat").chain(args.iter().copied()))
}

fn json(out: &Outcome) -> Value {
    serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", out.stdout))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn csat_finds_and_revalidates_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let term = write(dir.path(), "t.term", "; shifted variable\n(+ (var 0) (const 1:0))\n");
    let out = nilcsat(&["csat", "--primes", "2,3", "--solver", "brute", "--term", &term]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v = json(&out);
    assert_eq!(v["status"], "SAT");
    assert_eq!(v["witness"], serde_json::json!(["1:0"]));
}

#[test]
fn exit_code_two_for_bounded_and_given_up_answers() {
    let expr = "(+ (var 0) (const 1:0))";
    let bounded = nilcsat(&[
        "csat", "--primes", "2,3", "--expr", expr, "--solver", "sparse", "--bound", "fixed", "--support", "0",
    ]);
    assert_eq!(bounded.code, 2);
    assert_eq!(json(&bounded)["status"], "UNSAT-AT-BOUND");

    let unsat = "(e 2 (var 0))";
    let gave_up = nilcsat(&[
        "csat", "--primes", "2,3", "--expr", unsat, "--target", "1:0", "--solver", "random", "--budget", "10",
        "--seed", "1",
    ]);
    assert_eq!(gave_up.code, 2);
    assert_eq!(json(&gave_up)["status"], "GIVE-UP");

    let decided = nilcsat(&["csat", "--primes", "2,3", "--expr", unsat, "--target", "1:0"]);
    assert_eq!(decided.code, 0);
    assert_eq!(json(&decided)["status"], "UNSAT");
}

#[test]
fn usage_and_parse_errors_exit_one() {
    let out = nilcsat(&["csat", "--primes", "2,3", "--expr", "(var 0)", "--solver", "random"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("--seed"), "{}", out.stderr);

    let out = nilcsat(&["eval", "--primes", "2,3", "--expr", "(+ (var 0)\n  (bogus 1))"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("2:"), "{}", out.stderr);

    let out = nilcsat(&["eval", "--primes", "2,4", "--expr", "(var 0)"]);
    assert_eq!(out.code, 1);

    let out = nilcsat(&["frobnicate"]);
    assert_eq!(out.code, 1);
}

#[test]
fn ceiling_errors_name_the_needed_resource() {
    let out = nilcsat(&[
        "csat", "--primes", "2,3", "--expr", "(+ (var 0) (+ (var 1) (var 2)))", "--ceiling", "10",
    ]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("216"), "{}", out.stderr);
}

#[test]
fn reduce_sat_splits_four_clauses_into_two_parts() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = write(dir.path(), "phi.dimacs", "c four clauses\np cnf 3 4\n1 2 0\n-1 3 0\n-2 -3 0\n1 -3 0\n");
    let term = dir.path().join("phi.term").display().to_string();
    let out = nilcsat(&["reduce-sat", "--primes", "2,3,2", "--cnf", &cnf, "--out", &term]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v = json(&out);
    assert_eq!(v["s"], 2);
    assert_eq!(v["parts"].as_array().unwrap().len(), 2);

    // The written term is solvable at e_1 1 since the formula is satisfiable.
    let solved = nilcsat(&["csat", "--primes", "2,3,2", "--term", &term, "--target", "1:0:0"]);
    assert_eq!(json(&solved)["status"], "SAT");
}

#[test]
fn ceqv_reports_counterexamples() {
    let out = nilcsat(&["ceqv", "--primes", "2,3", "--expr", "(v 1 (var 0))"]);
    assert_eq!(out.code, 0);
    let v = json(&out);
    assert_eq!(v["status"], "NOT-EQUIV");
    assert_eq!(v["value"], "1:0");

    let out = nilcsat(&["ceqv", "--primes", "2,3", "--expr", "(+ (var 0) (- (var 0)))"]);
    assert_eq!(json(&out)["status"], "EQUIV");
}

#[test]
fn hyperplane_and_s4_commands() {
    let dir = tempfile::tempdir().unwrap();
    let vecs = write(dir.path(), "z.vecs", "# three points\n0 0\n1 0\n1 1\n");
    let out = nilcsat(&["hyperplane", "--q", "2", "--vecs", &vecs]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v = json(&out);
    assert_eq!(v["points"], 3);
    assert!(v["codim"].as_u64().unwrap() <= v["codim_bound"].as_u64().unwrap());

    let cnf = write(dir.path(), "phi.dimacs", "p cnf 1 1\n1 0\n");
    let out = nilcsat(&["s4-reduce", "--cnf", &cnf, "--witness"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v = json(&out);
    assert_eq!(v["satisfiable"], true);
    assert_eq!(v["witness"]["x0"], "(123)");
}

#[test]
fn congruences_and_text_format() {
    let out = nilcsat(&["congruences", "--primes", "2,3,2"]);
    let v = json(&out);
    assert_eq!(v["count"], 4);
    assert_eq!(v["equals_chain"], true);

    let out = nilcsat(&["--format", "text", "eval", "--primes", "2,3", "--expr", "(var 0)", "--at", "1:2"]);
    assert_eq!(out.stdout, "value: 1:2\n");
}

#[test]
fn bench_writes_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    let out = nilcsat(&[
        "bench", "--suite", "reduction", "--primes", "2,3,2", "--max-m", "6", "--out", &csv.display().to_string(),
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,n,s,parts,nodes,term_size,build_ms"));
    assert_eq!(lines.count(), 6);
    assert!(json(&out)["slopes"]["loglog_nodes_vs_m"].is_number());

    let out = nilcsat(&["bench", "--suite", "solver", "--primes", "2,3", "--max-m", "3"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.starts_with("size,n,status"));
}

#[test]
fn workers_flag_is_validated() {
    let out = nilcsat(&["--workers", "0", "congruences", "--primes", "2,3"]);
    assert_eq!(out.code, 1);
    let one = nilcsat(&["--workers", "1", "density", "--primes", "2,3", "--expr", "(v 1 (var 0))", "--seed", "5"]);
    let four = nilcsat(&["--workers", "4", "density", "--primes", "2,3", "--expr", "(v 1 (var 0))", "--seed", "5"]);
    let strip = |o: &Outcome| {
        let mut v = json(o);
        v.as_object_mut().unwrap().remove("elapsed_ms");
        v
    };
    assert_eq!(strip(&one), strip(&four));
}

#[test]
fn slope_fits_lines() {
    assert_eq!(slope(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]), Some(2.0));
    assert_eq!(slope(&[1.0], &[1.0]), None);
    assert_eq!(slope(&[2.0, 2.0], &[1.0, 3.0]), None);
}
