mod common;

use std::collections::{HashMap, HashSet, VecDeque};

use proptest::prelude::*;
use recount::analysis::{
    analyze, degree_at_least, explore, subset_sum_regex, subset_sum_tail, verify_witness, DegreeAnswer, ExactOptions,
    Mode, Verdict, WitnessCheck, DEFAULT_BUDGET,
};
use recount::engine::{run, step, Configuration};
use recount::nca::{glushkov, Nca, StateId};
use recount::syntax::{normalize, parse, Regex};

const BYTES: &[u8] = b"abcd";

/// Facts about one counter gathered by exploring every reachable
/// configuration of the automaton.
#[derive(Debug, Default, Clone)]
struct Truth {
    /// Shortest input leaving two differently valued tokens on one state.
    ambiguous_at: Option<usize>,
    /// Some configuration holds two values of the counter on any states.
    multi_valued: bool,
}

/// Breadth-first search over whole configurations. `None` when more than
/// `cap` configurations are reachable.
fn determinize(nca: &Nca, cap: usize) -> Option<(Vec<Truth>, HashSet<StateId>)> {
    let mut truths = vec![Truth::default(); nca.counters().len()];
    let mut crowded = HashSet::new();
    let start = Configuration::initial(nca);
    let mut seen = HashMap::from([(start.tokens().to_vec(), 0usize)]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((cfg, depth)) = queue.pop_front() {
        for (x, truth) in truths.iter_mut().enumerate() {
            let mut values: Vec<(StateId, u32)> = Vec::new();
            for (q, v) in cfg.tokens() {
                if let Some(slot) = nca.state(*q).counters.iter().position(|c| c.0 as usize == x) {
                    values.push((*q, v[slot]));
                }
            }
            let pairs = || values.iter().flat_map(|a| values.iter().map(move |b| (a, b))).filter(|(a, b)| a.1 != b.1);
            truth.multi_valued |= pairs().next().is_some();
            if truth.ambiguous_at.is_none() && pairs().any(|(a, b)| a.0 == b.0) {
                truth.ambiguous_at = Some(depth);
            }
        }
        for q in 0..nca.num_states() as StateId {
            let vals: HashSet<_> = cfg.on_state(q).collect();
            if vals.len() >= 2 {
                crowded.insert(q);
            }
        }
        for &b in BYTES {
            let next = step(nca, &cfg, b);
            if !seen.contains_key(next.tokens()) {
                if seen.len() >= cap {
                    return None;
                }
                seen.insert(next.tokens().to_vec(), depth + 1);
                queue.push_back((next, depth + 1));
            }
        }
    }
    Some((truths, crowded))
}

fn setup(text: &str) -> (Regex, Nca) {
    let re = normalize(&parse(text).unwrap());
    let nca = glushkov(&re);
    (re, nca)
}

#[test]
fn fixed_verdicts() {
    let cases = [
        (".*a{3}", true),
        ("a{3}", false),
        (".*xa{3}", false),
        (".*[ab]a{2}", true),
        ("(ab){2}c{3}", false),
        (".*a(ba){2}", true),
        (".*x(ab){2}", false),
        (".*[^x]x{3}", false),
    ];
    for (p, ambiguous) in cases {
        let (re, _) = setup(p);
        let report = analyze(&re, Mode::Exact, DEFAULT_BUDGET);
        assert_eq!(report.instances.iter().any(|i| i.verdict.is_ambiguous()), ambiguous, "{p}");
    }
}

#[test]
fn subset_sum_small() {
    for (set, target, want) in [(&[1u32, 2][..], 3u32, true), (&[2, 4], 5, false), (&[3], 3, true), (&[1, 1], 3, false)]
    {
        let re = normalize(&subset_sum_regex(set, target));
        let report = analyze(&re, Mode::Exact, DEFAULT_BUDGET);
        let tail = report.instance(subset_sum_tail(set)).unwrap();
        assert_eq!(tail.verdict.is_ambiguous(), want, "{set:?} / {target}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn exact_matches_determinization(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let text = common::random_pattern(&mut rng, 5, 4);
        let (re, nca) = setup(&text);
        let Some((truths, crowded)) = determinize(&nca, 20_000) else { return Ok(()) };
        let report = analyze(&re, Mode::Exact, DEFAULT_BUDGET);
        for (x, c) in nca.counters().iter().enumerate() {
            let inst = report.instance(c.instance).unwrap();
            let truth = &truths[x];
            match &inst.verdict {
                Verdict::Ambiguous(w) => {
                    prop_assert_eq!(Some(w.input.len()), truth.ambiguous_at, "{} instance {}", text, x);
                    let cfg = run(&nca, &w.input);
                    let on: Vec<_> = cfg.on_state(w.state).collect();
                    prop_assert!(on.contains(&&w.valuations.0) && on.contains(&&w.valuations.1));
                    let confirmed = matches!(verify_witness(&nca, &w.input), WitnessCheck::Confirmed { .. });
                    prop_assert!(confirmed, "{} witness {:?}", text, w.input);
                }
                Verdict::Unambiguous => prop_assert_eq!(truth.ambiguous_at, None, "{} instance {}", text, x),
                Verdict::Inconclusive(_) => prop_assert!(false, "budget exhausted on {}", text),
            }
            prop_assert_eq!(inst.single_valued, !truth.multi_valued, "{} instance {}", text, x);
        }
        for q in 0..nca.num_states() as StateId {
            let want = if crowded.contains(&q) { DegreeAnswer::Yes } else { DegreeAnswer::No };
            prop_assert_eq!(degree_at_least(&nca, q, 2, DEFAULT_BUDGET), want, "{} state {}", text, q);
        }
    }

    #[test]
    fn symmetry_reduction_keeps_verdicts(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let text = common::random_pattern(&mut rng, 6, 5);
        let (_, nca) = setup(&text);
        let with = explore(&nca, &ExactOptions { symmetry: true, ..ExactOptions::default() });
        let without = explore(&nca, &ExactOptions { symmetry: false, ..ExactOptions::default() });
        prop_assert!(with.pairs_created <= without.pairs_created);
        for x in 0..nca.counters().len() {
            prop_assert_eq!(with.ambiguous[x].is_some(), without.ambiguous[x].is_some(), "{}", text);
            prop_assert_eq!(with.multi_valued[x], without.multi_valued[x], "{}", text);
        }
    }

    #[test]
    fn approximations_never_certify_ambiguous_instances(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let text = common::random_pattern(&mut rng, 6, 5);
        let (re, _) = setup(&text);
        let exact = analyze(&re, Mode::Exact, DEFAULT_BUDGET);
        for mode in [Mode::Approx, Mode::Hybrid] {
            let other = analyze(&re, mode, DEFAULT_BUDGET);
            for inst in &other.instances {
                let truth = exact.instance(inst.id).unwrap();
                if inst.verdict.is_unambiguous() {
                    prop_assert!(truth.verdict.is_unambiguous(), "{} instance {:?} under {}", text, inst.id, mode);
                }
                if inst.single_valued {
                    prop_assert!(truth.single_valued, "{} instance {:?} under {}", text, inst.id, mode);
                }
            }
        }
        // hybrid settles everything exact does
        let hybrid = analyze(&re, Mode::Hybrid, DEFAULT_BUDGET);
        for inst in &hybrid.instances {
            let truth = exact.instance(inst.id).unwrap();
            prop_assert_eq!(inst.verdict.is_ambiguous(), truth.verdict.is_ambiguous(), "{}", text);
        }
    }
}
