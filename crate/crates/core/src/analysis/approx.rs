//! Over-approximating analysis and the hybrid strategy built on it.

use std::time::{Duration, Instant};

use super::exact::{explore, report_from, ExactOptions};
use super::{AmbiguityReport, InconclusiveReason, InstanceReport, Mode, Verdict};
use crate::nca::{glushkov, Nca};
use crate::syntax::{normalize, Ast, InstanceId, Regex};

/// Replaces every repetition other than `keep` by a star of its body.
pub fn approximate_regex(re: &Regex, keep: InstanceId) -> Regex {
    fn go(ast: &Ast, keep: InstanceId) -> Ast {
        match ast {
            Ast::Epsilon | Ast::Class(_) => ast.clone(),
            Ast::Concat(xs) => Ast::Concat(xs.iter().map(|x| go(x, keep)).collect()),
            Ast::Alt(xs) => Ast::Alt(xs.iter().map(|x| go(x, keep)).collect()),
            Ast::Star(c) => Ast::star(go(c, keep)),
            Ast::Repeat { child, min, max, id } => {
                let body = go(child, keep);
                if *id == keep {
                    Ast::repeat(body, *min, *max, *id)
                } else {
                    Ast::star(body)
                }
            }
        }
    }
    normalize(&re.with_root(go(&re.root, keep)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxOutcome {
    /// `Unambiguous` or `Inconclusive`; never `Ambiguous`.
    pub verdict: Verdict,
    pub single_valued: bool,
    pub pairs_created: u64,
    pub elapsed: Duration,
}

/// Analyzes one instance on the automaton where all other repetitions are
/// relaxed to stars. Sound for unambiguity only.
pub fn approximate_ambiguity(re: &Regex, instance: InstanceId, budget: u64) -> ApproxOutcome {
    let start = Instant::now();
    let approx = approximate_regex(re, instance);
    let nca = glushkov(&approx);
    let Some(x) = nca.counter_of_instance(instance) else {
        // the instance vanished under normalization; nothing can be ambiguous
        return ApproxOutcome {
            verdict: Verdict::Unambiguous,
            single_valued: true,
            pairs_created: 0,
            elapsed: start.elapsed(),
        };
    };
    let ex = explore(&nca, &ExactOptions { budget, scope: Some(vec![x]), ..ExactOptions::default() });
    let verdict = match ex.verdict(x) {
        Verdict::Unambiguous => Verdict::Unambiguous,
        Verdict::Inconclusive(r) => Verdict::Inconclusive(r),
        Verdict::Ambiguous(_) => Verdict::Inconclusive(InconclusiveReason::Approx),
    };
    ApproxOutcome {
        single_valued: ex.single_valued(x),
        verdict,
        pairs_created: ex.pairs_created,
        elapsed: start.elapsed(),
    }
}

fn approx_reports(re: &Regex, nca: &Nca, budget: u64, stop_at_first_failure: bool) -> (Vec<InstanceReport>, bool) {
    let mut out = Vec::new();
    let mut failed = false;
    for c in nca.counters() {
        let o = approximate_ambiguity(re, c.instance, budget);
        let ok = o.verdict.is_unambiguous();
        out.push(InstanceReport {
            id: c.instance,
            min: c.min,
            max: c.max,
            verdict: o.verdict,
            single_valued: o.single_valued && ok,
            pairs_created: o.pairs_created,
            elapsed: o.elapsed,
        });
        if !ok {
            failed = true;
            if stop_at_first_failure {
                break;
            }
        }
    }
    (out, failed)
}

/// Approximation per instance; at the first instance it cannot certify,
/// falls back to the exact analysis of the whole automaton.
pub fn hybrid_ambiguity(re: &Regex, budget: u64) -> AmbiguityReport {
    let start = Instant::now();
    let nca = glushkov(re);
    let (approx, failed) = approx_reports(re, &nca, budget, true);
    let approx_pairs: u64 = approx.iter().map(|i| i.pairs_created).sum();
    if !failed {
        return AmbiguityReport {
            mode: Mode::Hybrid,
            instances: approx,
            pairs_created: approx_pairs,
            elapsed: start.elapsed(),
        };
    }
    let ex = explore(&nca, &ExactOptions { budget, ..ExactOptions::default() });
    let mut report = report_from(&nca, &ex, Mode::Hybrid);
    for inst in &mut report.instances {
        if let Some(a) = approx.iter().find(|a| a.id == inst.id && a.verdict.is_unambiguous()) {
            if !inst.verdict.is_unambiguous() {
                // exact ran out of budget; the approximation already settled it
                inst.verdict = Verdict::Unambiguous;
                inst.single_valued = a.single_valued;
            }
            inst.pairs_created = a.pairs_created;
        } else {
            inst.pairs_created += approx.iter().find(|a| a.id == inst.id).map_or(0, |a| a.pairs_created);
        }
    }
    report.pairs_created = approx_pairs + ex.pairs_created;
    report.elapsed = start.elapsed();
    report
}

/// Runs the analysis selected by `mode` on a normalized pattern.
pub fn analyze(re: &Regex, mode: Mode, budget: u64) -> AmbiguityReport {
    match mode {
        Mode::Exact => {
            let nca = glushkov(re);
            let ex = explore(&nca, &ExactOptions { budget, ..ExactOptions::default() });
            report_from(&nca, &ex, Mode::Exact)
        }
        Mode::Hybrid => hybrid_ambiguity(re, budget),
        Mode::Approx => {
            let start = Instant::now();
            let nca = glushkov(re);
            let (instances, _) = approx_reports(re, &nca, budget, false);
            let pairs_created = instances.iter().map(|i| i.pairs_created).sum();
            AmbiguityReport { mode: Mode::Approx, instances, pairs_created, elapsed: start.elapsed() }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{exact_ambiguity, DEFAULT_BUDGET};
    use crate::syntax::{parse, to_pattern};

    fn re(s: &str) -> Regex {
        normalize(&parse(s).unwrap())
    }

    #[test]
    fn relaxes_all_other_instances() {
        let r = re("a{5}b{7}(cd){2,3}");
        assert_eq!(to_pattern(&approximate_regex(&r, InstanceId(1)).root), "a*b{7}(cd)*");
    }

    #[test]
    fn anchored_concatenation_is_certified() {
        let r = re("a{5}b{7}");
        for id in [InstanceId(0), InstanceId(1)] {
            assert_eq!(approximate_ambiguity(&r, id, DEFAULT_BUDGET).verdict, Verdict::Unambiguous);
        }
        let exact = exact_ambiguity(&glushkov(&r), DEFAULT_BUDGET);
        assert!(exact.instances.iter().all(|i| i.verdict.is_unambiguous()));
    }

    #[test]
    fn ambiguous_instance_is_inconclusive_under_approximation() {
        let r = re(".*a{2}");
        assert_eq!(
            approximate_ambiguity(&r, InstanceId(0), DEFAULT_BUDGET).verdict,
            Verdict::Inconclusive(InconclusiveReason::Approx)
        );
    }

    #[test]
    fn hybrid_falls_back_and_finds_witness() {
        let r = hybrid_ambiguity(&re(".*aa{8}"), DEFAULT_BUDGET);
        assert!(r.instances[0].verdict.is_ambiguous());
        // with disjoint classes every fresh entry kills the running tokens
        let r = hybrid_ambiguity(&re(".*ab{8}"), DEFAULT_BUDGET);
        assert!(r.instances[0].verdict.is_unambiguous());
        let r = hybrid_ambiguity(&re("abc"), DEFAULT_BUDGET);
        assert!(r.instances.is_empty());
        assert_eq!(r.pairs_created, 0);
    }
}
