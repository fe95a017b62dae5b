use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn recount(args: &[&str], stdin: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_recount"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn sample_rules() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/sample.rules").to_string_lossy().into_owned()
}

#[test]
fn analyze_reports_per_instance() {
    let o = recount(&["analyze", "--mode", "hybrid", "a{3}b{5}"], b"");
    assert!(o.status.success());
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    let inst = v["instances"].as_array().unwrap();
    assert_eq!(inst.len(), 2);
    assert!(inst.iter().all(|i| i["verdict"] == "unambiguous"));
}

#[test]
fn analyze_exact_with_witness() {
    let o = recount(&["analyze", "--mode", "exact", "--witness", ".*a{2}"], b"");
    assert!(o.status.success());
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["verdict"], "ambiguous");
    assert_eq!(v["instances"][0]["witness"], "aa");
}

#[test]
fn analyze_empty_ruleset() {
    let o = recount(&["analyze", "--rules", "-"], b"# nothing here\n\n");
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
}

#[test]
fn analyze_ruleset_keeps_file_order() {
    let rules = sample_rules();
    let o = recount(&["analyze", "--rules", &rules, "--jobs", "3"], b"");
    assert!(o.status.success());
    let lines: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[3]["reason"], "backreference");
    assert_eq!(lines[2]["verdict"], "ambiguous");
}

#[test]
fn bench_fixture_counts() {
    let rules = sample_rules();
    let o = recount(&["bench", "--csv", &rules], b"");
    assert!(o.status.success());
    assert_eq!(stdout(&o), "benchmark,total,supported,counting,c-ambiguous\nsample,5,4,3,2\n");
    let o = recount(&["bench", "--json", "--thresholds", "0,4,64", &rules], b"");
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["rejected"][0]["reason"], "backreference");
    let nodes: Vec<u64> = v["nodes"].as_array().unwrap().iter().map(|n| n.as_u64().unwrap()).collect();
    assert!(nodes.windows(2).all(|w| w[0] <= w[1]), "{nodes:?}");
}

#[test]
fn bench_timing_flags() {
    let rules = sample_rules();
    let o = recount(&["bench", "--trials", "3", "--warmup", "2", "--thresholds", "0", &rules], b"");
    assert!(o.status.success());
    assert!(stdout(&o).contains("sample"));
}

#[test]
fn match_backends_agree() {
    for backend in ["reference", "optimized", "nfa"] {
        let o = recount(&["match", "--backend", backend, ".*x[ab]{2}"], b"xabxbbb");
        assert!(o.status.success());
        assert_eq!(stdout(&o), "0\t3\n0\t6\n", "{backend}");
    }
    let o = recount(&["match", "--json", "a(bc){1,3}d"], b"abcbcd");
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!((v["rule"].as_u64(), v["end_offset"].as_u64()), (Some(0), Some(6)));
}

#[test]
fn compile_then_simulate_and_cost() {
    let dir = tempfile::tempdir().unwrap();
    let ir = dir.path().join("ir.json");
    let ir = ir.to_str().unwrap();
    let input = dir.path().join("in.txt");
    std::fs::write(&input, b"abcd").unwrap();
    let input = input.to_str().unwrap();

    let o = recount(&["compile", "a(bc){1,3}d", "--threshold", "0", "--out", ir], b"");
    assert!(o.status.success());
    let o = recount(&["simulate", ir, input], b"");
    assert_eq!(stdout(&o), "0\t4\n");

    let o = recount(&["cost", ir, input, "--json"], b"");
    assert!(o.status.success());
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["allocation"]["counters"], 1);
    assert_eq!(v["params"]["bank_area"], 3919.0);

    let params = dir.path().join("p.conf");
    std::fs::write(&params, "bank_area = 1000\n").unwrap();
    let o = recount(&["cost", ir, input, "--params", params.to_str().unwrap(), "--json"], b"");
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["total_area"], 1000.0 + 237.0);
}

#[test]
fn print_params_round_trips() {
    let o = recount(&["cost", "--print-params"], b"");
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("bank_energy = 16780.0"));
    assert!(text.contains("bitvector_capacity_bits = 2000"));
}

#[test]
fn exit_codes() {
    assert_eq!(recount(&["frobnicate"], b"").status.code(), Some(1));
    assert_eq!(recount(&["compile", "a{3,2}"], b"").status.code(), Some(1));
    assert_eq!(recount(&["simulate", "/nonexistent/ir.json"], b"").status.code(), Some(2));
    let o = recount(&["compile", "--force-unfold", "--node-limit", "100", "a{1000}"], b"");
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(recount(&["--help"], b"").status.code(), Some(0));
}

#[test]
fn corrupted_ir_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let ir = dir.path().join("ir.json");
    let o = recount(&["compile", "a(bc){1,3}d"], b"");
    let text = stdout(&o).replace("\"en_out\"", "\"en_outt\"");
    std::fs::write(&ir, text).unwrap();
    let o = recount(&["simulate", ir.to_str().unwrap()], b"abcd");
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("en_outt"));
}
