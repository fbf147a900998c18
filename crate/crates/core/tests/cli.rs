use std::path::Path;
use std::process::{Command, Output};

use fanoci::io::{operator_from_json, period_from_json};
use fanoci::periods::DiffOperator;

fn fanoci(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fanoci")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = fanoci(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn pf_fit_on_cubic_periods_gives_the_cubic_operator() {
    let dir = tempfile::tempdir().unwrap();
    let per = p(dir.path(), "cubic.json");
    ok(&["period", "--catalog", "P5", "--bundle", "3", "--terms", "35", "--out", &per]);
    let s = period_from_json(&std::fs::read_to_string(&per).unwrap()).unwrap();
    assert_eq!(s.coeffs[6].to_string(), "8100");
    let op = ok(&["pf-fit", &per, "--max-order", "4", "--max-degree", "5"]);
    let l = operator_from_json(&op).unwrap();
    let expected = DiffOperator::from_i64(&[
        vec![0, 0, 0, 2916],
        vec![0, 0, 0, 8748],
        vec![0, 0, 0, 9477],
        vec![0, 0, 0, 4374],
        vec![-1, 0, 0, 729],
    ])
    .unwrap();
    assert_eq!(l, expected);
    let opf = p(dir.path(), "op.json");
    std::fs::write(&opf, &op).unwrap();
    let rep: serde_json::Value = serde_json::from_str(&ok(&["ramify", &opf])).unwrap();
    assert_eq!(rep["rf"], 8);
    assert_eq!(rep["extremal"], true);
}

#[test]
fn bucket_groups_equal_prefixes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (p(dir.path(), "a.json"), p(dir.path(), "b.json"), p(dir.path(), "c.json"));
    ok(&["period", "--catalog", "P5", "--bundle", "3", "--terms", "20", "--out", &a]);
    ok(&["period", "--catalog", "P6", "--bundle", "3", "--bundle", "3", "--terms", "20", "--out", &b]);
    ok(&["period", "--catalog", "P5", "--bundle", "3", "--terms", "20", "--out", &c]);
    let v: serde_json::Value = serde_json::from_str(&ok(&["bucket", &a, &b, &c])).unwrap();
    let buckets = v.as_array().unwrap();
    assert_eq!(buckets.len(), 2);
    assert_eq!(buckets[0]["members"], serde_json::json!([a, c]));
    assert_eq!(buckets[1]["members"], serde_json::json!([b]));
}

#[test]
fn scan_is_independent_of_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let (one, two) = (p(dir.path(), "one"), p(dir.path(), "two"));
    ok(&["scan", "--catalog", "P5", "--terms", "15", "--jobs", "1", "--out", &one]);
    ok(&["scan", "--catalog", "P5", "--terms", "15", "--jobs", "2", "--out", &two]);
    let r1 = std::fs::read(dir.path().join("one/records.jsonl")).unwrap();
    let r2 = std::fs::read(dir.path().join("two/records.jsonl")).unwrap();
    assert_eq!(r1, r2);
    assert_eq!(String::from_utf8(r1).unwrap().lines().count(), 5);
    let man: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("one/manifest.json")).unwrap()).unwrap();
    assert_eq!(man["triples"], 5);
    ok(&["validate", "--records", &p(dir.path(), "one/records.jsonl")]);
    let h = p(dir.path(), "hist");
    ok(&["histogram", &p(dir.path(), "one/records.jsonl"), "--bin-width", "100", "--out", &h]);
    let deg = std::fs::read_to_string(dir.path().join("hist/degree.tsv")).unwrap();
    assert_eq!(deg, "bin_low\tbin_high\tcount\n0\t100\t2\n100\t200\t0\n200\t300\t1\n300\t400\t0\n400\t500\t0\n500\t600\t1\n600\t700\t1\n");
}

#[test]
fn exit_codes() {
    assert_eq!(fanoci(&["validate", "--catalog", "Q4"]).status.code(), Some(2));
    assert_eq!(fanoci(&["invariants", "--catalog", "P5", "--bundle", "6"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let per = p(dir.path(), "p.json");
    ok(&["period", "--catalog", "P5", "--bundle", "3", "--terms", "12", "--out", &per]);
    // too few terms for any operator of order >= 1 with nontrivial degree
    assert_eq!(fanoci(&["pf-fit", &per, "--max-order", "4", "--max-degree", "5"]).status.code(), Some(3));
    let over = fanoci(&["period", "--catalog", "P5", "--bundle", "3", "--terms", "30", "--point-budget", "10"]);
    assert_eq!(over.status.code(), Some(3));
    let bad = p(dir.path(), "bad.json");
    std::fs::write(&bad, "{\"order\":1,\"polys\":[[0,1],[1]]}").unwrap();
    // D + t is singular only at 0 and infinity; the zero operator is rejected
    assert!(fanoci(&["ramify", &bad]).status.success());
    std::fs::write(&bad, "{\"order\":0,\"polys\":[[0]]}").unwrap();
    assert_eq!(fanoci(&["ramify", &bad]).status.code(), Some(2));
}
