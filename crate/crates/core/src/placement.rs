//! Decides, per repetition instance, whether it is tracked by a counter, a
//! bit vector, or expanded into plain states. Shared by the optimized
//! engine and the IR compiler.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, AmbiguityReport, Mode, Verdict, DEFAULT_BUDGET};
use crate::engine::optimized::CellKind;
use crate::nca::{glushkov, CounterId, Nca, Update};
use crate::syntax::{
    count_instances, normalize, single_class_body, unfold, unfold_instances, InstanceId, Regex, SizeError,
    DEFAULT_NODE_LIMIT,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    Counter,
    Bitvector,
    Unfold,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementRecord {
    pub instance: u32,
    pub min: u32,
    pub max: u32,
    pub placement: Placement,
    pub verdict: String,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct PlanOptions {
    /// Instances with `max <= threshold` are unfolded up front.
    pub threshold: u32,
    /// Ignore the analysis and unfold everything.
    pub force_unfold: bool,
    pub budget: u64,
    pub node_limit: u64,
    pub mode: Mode,
    /// Require the counter wiring of the hardware module: one entry state
    /// and one exit state per body, with the entry state reached only by
    /// entering or iterating the body.
    pub hardware_ports: bool,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            threshold: 0,
            force_unfold: false,
            budget: DEFAULT_BUDGET,
            node_limit: DEFAULT_NODE_LIMIT,
            mode: Mode::Hybrid,
            hardware_ports: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Plan {
    /// Normalized pattern in which only placed instances remain counted.
    pub regex: Regex,
    pub nca: Nca,
    pub kinds: BTreeMap<InstanceId, CellKind>,
    /// One record per instance ever considered, including unfolded ones.
    pub records: Vec<PlacementRecord>,
    /// Analysis of the final pattern.
    pub report: Option<AmbiguityReport>,
}

/// Counter-module wiring constraints on counter `x`.
pub fn fits_counter_ports(nca: &Nca, x: CounterId) -> bool {
    let c = nca.counter(x);
    if c.first.len() != 1 || c.last.len() != 1 {
        return false;
    }
    let fst = c.first[0];
    nca.transitions().iter().filter(|t| t.dst == fst).all(|t| !matches!(t.action.update_of(x), Some(Update::Copy(_))))
}

fn record(id: InstanceId, min: u32, max: u32, p: Placement, verdict: &str, reason: &str) -> PlacementRecord {
    PlacementRecord { instance: id.0, min, max, placement: p, verdict: verdict.to_string(), reason: reason.to_string() }
}

pub fn plan(re: &Regex, opts: &PlanOptions) -> Result<Plan, SizeError> {
    let mut cur = normalize(re);
    let mut records = Vec::new();

    let initial = count_instances(&cur.root);
    if opts.force_unfold {
        for i in &initial {
            records.push(record(i.id, i.min, i.max, Placement::Unfold, "-", "forced"));
        }
        cur = unfold(&cur, None, opts.node_limit)?;
    } else {
        let small: Vec<_> = initial.iter().filter(|i| i.max <= opts.threshold).collect();
        if !small.is_empty() {
            for i in &small {
                records.push(record(i.id, i.min, i.max, Placement::Unfold, "-", "below threshold"));
            }
            cur = unfold(&cur, Some(opts.threshold), opts.node_limit)?;
        }
    }

    loop {
        let insts = count_instances(&cur.root);
        let nca = glushkov(&cur);
        if insts.is_empty() {
            return Ok(Plan { regex: cur, nca, kinds: BTreeMap::new(), records, report: None });
        }
        let report = analyze(&cur, opts.mode, opts.budget);
        let mut nested_inner: BTreeSet<InstanceId> = BTreeSet::new();
        let mut has_inner: BTreeSet<InstanceId> = BTreeSet::new();
        // nesting from the syntax tree: an instance whose body holds another
        cur.root.walk(&mut |n| {
            if let crate::syntax::Ast::Repeat { child, id, .. } = n {
                if child.has_repeat() {
                    has_inner.insert(*id);
                    child.walk(&mut |m| {
                        if let crate::syntax::Ast::Repeat { id: inner, .. } = m {
                            nested_inner.insert(*inner);
                        }
                    });
                }
            }
        });

        let mut to_unfold = BTreeSet::new();
        let mut decided = Vec::new();
        let mut kinds = BTreeMap::new();
        for i in &insts {
            let ir = report.instance(i.id).expect("analysis covers every instance");
            let verdict = ir.verdict.label();
            let x = nca.counter_of_instance(i.id).expect("instance has a counter");
            let single = single_class_body(&cur.root, i.id).is_some();
            let (placement, reason) = if has_inner.contains(&i.id) {
                (Placement::Unfold, "nested counting")
            } else if nested_inner.contains(&i.id) {
                continue;
            } else if matches!(ir.verdict, Verdict::Inconclusive(_)) {
                (Placement::Unfold, "analysis inconclusive")
            } else if ir.verdict.is_unambiguous()
                && ir.single_valued
                && (!opts.hardware_ports || fits_counter_ports(&nca, x))
            {
                (Placement::Counter, "counter-unambiguous")
            } else if single {
                (Placement::Bitvector, if ir.verdict.is_ambiguous() { "counter-ambiguous" } else { "multi-valued" })
            } else if ir.verdict.is_ambiguous() {
                (Placement::Unfold, "counter-ambiguous body is not a single class")
            } else if !ir.single_valued {
                (Placement::Unfold, "counter may hold several values across body states")
            } else {
                (Placement::Unfold, "body does not fit the counter ports")
            };
            if placement == Placement::Unfold {
                to_unfold.insert(i.id);
            } else {
                kinds.insert(
                    i.id,
                    if placement == Placement::Counter { CellKind::Counter } else { CellKind::Bitvector },
                );
            }
            decided.push(record(i.id, i.min, i.max, placement, verdict, reason));
        }
        if to_unfold.is_empty() {
            records.extend(decided);
            return Ok(Plan { regex: cur, nca, kinds, records, report: Some(report) });
        }
        records.extend(decided.into_iter().filter(|r| r.placement == Placement::Unfold));
        cur = unfold_instances(&cur, &to_unfold, opts.node_limit)?;
    }
}
