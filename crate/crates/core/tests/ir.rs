mod common;

use std::path::PathBuf;

use proptest::prelude::*;
use recount::analysis::{analyze, Mode, DEFAULT_BUDGET};
use recount::engine::{match_bytes, Backend};
use recount::ir::{compile, emit_json, load_json, simulate_ir, validate, AutomatonIr, CompileOptions, NodeKind};
use recount::placement::Placement;
use recount::syntax::{normalize, parse, InstanceId};

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn compiled(p: &str, threshold: u32) -> AutomatonIr {
    compile(&parse(p).unwrap(), &CompileOptions { unfold_threshold: threshold, ..CompileOptions::default() }).unwrap()
}

/// Set UPDATE_GOLDEN=1 to rewrite the file after an intended format change.
#[test]
fn counted_group_golden() {
    let text = emit_json(&compiled("a(bc){1,3}d", 0));
    let path = golden_path("counted_group.ir.json");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &text).unwrap();
    }
    let golden = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, golden);
    let (events, _) = simulate_ir(&load_json(&golden).unwrap(), b"abcd").unwrap();
    assert_eq!(events.iter().map(|e| e.end_offset).collect::<Vec<_>>(), vec![4]);
}

#[test]
fn threshold_monotonicity() {
    for p in ["a(bc){1,3}d{4}", ".*x[ab]{2,9}y{3}", "(a{3}b){2}c{6}"] {
        let mut prev: Option<(usize, usize)> = None;
        for k in [0, 1, 2, 3, 4, 6, 9, 12] {
            let ir = compiled(p, k);
            let cur = (ir.hstate_count(), ir.counter_count() + ir.bitvector_count());
            if let Some((h, c)) = prev {
                assert!(cur.0 >= h && cur.1 <= c, "{p} at threshold {k}: {cur:?} after {prev:?}");
            }
            prev = Some(cur);
        }
    }
}

#[test]
fn counters_only_for_unambiguous_instances() {
    for p in [".*a{5}", ".*xa{5}", "(ab){3}c{2,4}", ".*(ab){4}", ".*[^x]x{3}"] {
        let ir = compiled(p, 0);
        let re = normalize(&parse(p).unwrap());
        let report = analyze(&re, Mode::Exact, DEFAULT_BUDGET);
        for rec in &ir.metadata.placements {
            if rec.placement == Placement::Counter {
                let v = &report.instance(InstanceId(rec.instance)).unwrap().verdict;
                assert!(v.is_unambiguous(), "{p}: instance {} placed on a counter", rec.instance);
            }
        }
    }
}

/// Every port replaced by a name the node kind does not have must fail.
#[test]
fn single_field_port_mutations_are_rejected() {
    let vocabulary = ["o", "i", "pre", "fst", "lst", "en_fst", "en_out", "body", "en_body", "startOfData", "x"];
    for p in ["a(bc){1,3}d", "[ab]*a[ab]{2,5}b", "x{4}y"] {
        let ir = compiled(p, 0);
        validate(&ir).unwrap();
        let kind_of = |id: &str| ir.node(id).map(|n| n.kind.clone());
        for (ci, c) in ir.connections.iter().enumerate() {
            for port in vocabulary {
                let legal_from = match kind_of(&c.from.node) {
                    Some(k) => k.outputs().contains(&port),
                    None => port == "startOfData" || port == "always",
                };
                if !legal_from {
                    let mut bad = ir.clone();
                    bad.connections[ci].from.port = port.to_string();
                    assert!(validate(&bad).is_err(), "{p}: from port {port} on connection {ci}");
                }
                if !kind_of(&c.to.node).unwrap().inputs().contains(&port) {
                    let mut bad = ir.clone();
                    bad.connections[ci].to.port = port.to_string();
                    assert!(validate(&bad).is_err(), "{p}: to port {port} on connection {ci}");
                }
            }
            let mut bad = ir.clone();
            bad.connections[ci].to.node = "nowhere".into();
            assert!(validate(&bad).is_err());
        }
        for (ni, n) in ir.nodes.iter().enumerate() {
            let mut bad = ir.clone();
            bad.nodes[ni].kind = match n.kind {
                NodeKind::HState { .. } => NodeKind::Counter { min: 1, max: 2, instance: 99, report: false },
                _ => NodeKind::HState {
                    class: recount::CharClass::full(),
                    enable: recount::ir::Enable::Always,
                    report: false,
                },
            };
            assert!(validate(&bad).is_err(), "{p}: node {} retyped", n.id);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn networks_round_trip_and_agree(seed in any::<u64>(), threshold in prop_oneof![Just(0u32), Just(2), Just(5)], force in any::<bool>()) {
        let mut rng = common::rng(seed);
        let text = common::random_pattern(&mut rng, 6, 6);
        let re = parse(&text).unwrap();
        let opts = CompileOptions { unfold_threshold: threshold, force_unfold: force, ..CompileOptions::default() };
        let ir = compile(&re, &opts).unwrap();
        prop_assert_eq!(&load_json(&emit_json(&ir)).unwrap(), &ir);
        for _ in 0..3 {
            let input = common::runny_input(&mut rng, 40, b"abcd");
            let (events, trace) = simulate_ir(&ir, &input).unwrap();
            prop_assert_eq!(trace.len(), input.len());
            let want = match_bytes(&re, &input, Backend::Reference).unwrap();
            prop_assert_eq!(events, want, "{} on {:?}", text, input);
        }
    }
}
