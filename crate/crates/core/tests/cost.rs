mod common;

use proptest::prelude::*;
use recount::cost::{allocate, estimate, pack_bitvectors, CostParams};
use recount::ir::{compile, simulate_ir, CompileOptions, NodeKind};
use recount::syntax::parse;

/// Fewest bins of `capacity` holding every size, by exhaustive search.
fn optimal_bins(sizes: &[u32], capacity: u32) -> u64 {
    fn go(i: usize, sizes: &[u32], bins: &mut Vec<u32>, capacity: u32, best: &mut usize) {
        if bins.len() >= *best {
            return;
        }
        if i == sizes.len() {
            *best = bins.len();
            return;
        }
        for b in 0..bins.len() {
            if bins[b] + sizes[i] <= capacity {
                bins[b] += sizes[i];
                go(i + 1, sizes, bins, capacity, best);
                bins[b] -= sizes[i];
            }
        }
        bins.push(sizes[i]);
        go(i + 1, sizes, bins, capacity, best);
        bins.pop();
    }
    let mut best = sizes.len() + 1;
    go(0, sizes, &mut Vec::new(), capacity, &mut best);
    best as u64
}

#[test]
fn module_area_is_flat_while_unfolding_grows() {
    let params = CostParams::default();
    let mut rng = common::rng(7);
    let input = common::random_input(&mut rng, 2000, b"ab");
    let mut prev_unfolded = 0.0;
    for pattern in ["a{N}", ".*a{N}"] {
        let mut counted_area = None;
        for n in [64u32, 256, 1024] {
            let re = parse(&pattern.replace('N', &n.to_string())).unwrap();
            let counted = compile(&re, &CompileOptions::default()).unwrap();
            let flat = compile(&re, &CompileOptions { force_unfold: true, ..CompileOptions::default() }).unwrap();
            let cost = |ir| estimate(ir, &simulate_ir(ir, &input).unwrap().1, &params).unwrap();
            let (c, f) = (cost(&counted), cost(&flat));
            assert_eq!(*counted_area.get_or_insert(c.total_area), c.total_area, "{pattern} at {n}");
            assert!(f.total_area >= prev_unfolded);
            prev_unfolded = f.total_area;
        }
        prev_unfolded = 0.0;
    }
    let big = parse("a{2048}").unwrap();
    let counted = compile(&big, &CompileOptions::default()).unwrap();
    let flat = compile(&big, &CompileOptions { force_unfold: true, ..CompileOptions::default() }).unwrap();
    assert!(allocate(&counted, &params).banks < allocate(&flat, &params).banks);
}

#[test]
fn parameters_pass_through() {
    let ir = compile(&parse("a(bc){1,3}d").unwrap(), &CompileOptions::default()).unwrap();
    let (_, trace) = simulate_ir(&ir, b"abcbcd").unwrap();
    let text = "bank_area = 100\ncounter_area = 10\ncounter_energy = 5\nbank_delay = 50\n";
    let params = CostParams::from_config(text).unwrap();
    let r = estimate(&ir, &trace, &params).unwrap();
    assert_eq!(r.total_area, 110.0);
    assert_eq!(r.cycle_time, 101.0);
    assert_eq!(r.critical_path, "counter");
    assert_eq!(r.energy.counter, r.counter_ops_per_byte * 5.0);
    assert_eq!(CostParams::from_config(&params.to_config()).unwrap(), params);
    assert!(CostParams::from_config("bank_area = 0\n").is_err());
    assert!(CostParams::from_config("bank_aera = 1\n").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn packing_is_close_to_optimal(sizes in prop::collection::vec(1u32..100, 0..8)) {
        let got = pack_bitvectors(&sizes, 100);
        let best = optimal_bins(&sizes, 100);
        prop_assert!(got >= best);
        // first fit decreasing never exceeds 11/9 of the optimum plus 6/9
        prop_assert!(9 * got <= 11 * best + 6, "{:?}: {} vs {}", sizes, got, best);
    }

    #[test]
    fn reports_follow_the_formulas(seed in any::<u64>(), threshold in 0u32..4) {
        let mut rng = common::rng(seed);
        let text = common::random_pattern(&mut rng, 6, 6);
        let ir = compile(&parse(&text).unwrap(), &CompileOptions { unfold_threshold: threshold, ..CompileOptions::default() }).unwrap();
        let input = common::runny_input(&mut rng, 50, b"abcd");
        let (_, trace) = simulate_ir(&ir, &input).unwrap();
        let p = CostParams { stes_per_pe: 2, pes_per_bank: 2, counters_per_pe: 1, bitvector_capacity_bits: 8, ..CostParams::default() };
        let r = estimate(&ir, &trace, &p).unwrap();

        let h = ir.nodes.iter().filter(|n| matches!(n.kind, NodeKind::HState { .. })).count() as u64;
        let c = ir.nodes.iter().filter(|n| matches!(n.kind, NodeKind::Counter { .. })).count() as u64;
        let pes = [1, h.div_ceil(2), c].into_iter().max().unwrap();
        prop_assert_eq!(r.allocation.pes, pes);
        prop_assert_eq!(r.allocation.banks, pes.div_ceil(2));
        prop_assert_eq!(&r.allocation, &allocate(&ir, &p));

        let area = r.allocation.banks as f64 * p.bank_area
            + c as f64 * p.counter_area
            + r.allocation.bitvectors as f64 * p.bitvector_area;
        prop_assert!((r.total_area - area).abs() < 1e-6);
        prop_assert!((r.energy_per_byte - r.energy.total()).abs() < 1e-9);

        let n = input.len().max(1) as f64;
        let active_pes: usize = trace.cycles.iter().map(|cy| {
            let mut pes: Vec<u32> = cy.active.iter().map(|s| s / 2).collect();
            pes.sort();
            pes.dedup();
            pes.len()
        }).sum();
        let energy = active_pes as f64 / n * p.bank_energy / 2.0
            + trace.total_counter_ops() as f64 / n * p.counter_energy
            + trace.total_bitvector_ops() as f64 / n * p.bitvector_energy;
        prop_assert!((r.energy_per_byte - energy).abs() < 1e-6, "{}", text);

        let mut delay = p.bank_delay;
        if c > 0 { delay = delay.max(p.counter_delay); }
        if r.allocation.bitvectors > 0 { delay = delay.max(p.bitvector_delay); }
        prop_assert_eq!(r.cycle_time, delay);
    }
}
