use std::collections::BTreeSet;

use super::{AutomatonIr, Enable, Endpoint, IrConnection, IrMetadata, IrNode, NodeKind, IR_VERSION, START_NODE};
use crate::analysis::{Mode, DEFAULT_BUDGET};
use crate::charclass::CharClass;
use crate::engine::CellKind;
use crate::nca::{CounterId, StateId, Update};
use crate::placement::{plan, PlanOptions};
use crate::syntax::{to_pattern, Regex, SizeError, DEFAULT_NODE_LIMIT};

#[derive(Clone, Debug)]
pub struct CompileOptions {
    /// Instances with `max <= unfold_threshold` become plain states.
    pub unfold_threshold: u32,
    pub force_unfold: bool,
    pub budget: u64,
    pub node_limit: u64,
    pub mode: Mode,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            unfold_threshold: 0,
            force_unfold: false,
            budget: DEFAULT_BUDGET,
            node_limit: DEFAULT_NODE_LIMIT,
            mode: Mode::Hybrid,
        }
    }
}

fn state_id(q: StateId) -> String {
    format!("h{q}")
}

/// Lowers a pattern to the automaton network. Fails only when unfolding
/// exceeds the node limit; inconclusive analyses fall back to unfolding.
pub fn compile(re: &Regex, opts: &CompileOptions) -> Result<AutomatonIr, SizeError> {
    let p = plan(
        re,
        &PlanOptions {
            threshold: opts.unfold_threshold,
            force_unfold: opts.force_unfold,
            budget: opts.budget,
            node_limit: opts.node_limit,
            mode: opts.mode,
            hardware_ports: true,
        },
    )?;
    let nca = &p.nca;
    let anywhere = nca.starts_anywhere();
    let start_port = if anywhere { "always" } else { "startOfData" };

    // plan() leaves no nested counting, so a state has at most one counter
    let owner = |q: StateId| nca.state(q).counters.first().copied();
    let module_id = |x: CounterId| {
        let c = nca.counter(x);
        match p.kinds[&c.instance] {
            CellKind::Counter => format!("c{}", c.instance.0),
            CellKind::Bitvector => format!("v{}", c.instance.0),
        }
    };
    let is_vector = |x: CounterId| p.kinds[&nca.counter(x).instance] == CellKind::Bitvector;

    let from_initial: BTreeSet<StateId> =
        nca.transitions().iter().filter(|t| t.src == 0 && t.dst != 0).map(|t| t.dst).collect();

    let mut nodes = Vec::new();
    if anywhere && nca.final_guard(0).is_some() {
        // nullable pattern searched anywhere: every prefix matches
        nodes.push(IrNode {
            id: state_id(0),
            kind: NodeKind::HState { class: CharClass::full(), enable: Enable::Always, report: true },
        });
    }
    for q in 1..nca.num_states() as StateId {
        let enable = if !from_initial.contains(&q) {
            Enable::OnActivateIn
        } else if anywhere {
            Enable::Always
        } else {
            Enable::OnStartOfData
        };
        nodes.push(IrNode {
            id: state_id(q),
            kind: NodeKind::HState {
                class: nca.state(q).class.expect("non-initial states carry a class"),
                enable,
                report: nca.final_guard(q).is_some() && nca.is_pure(q),
            },
        });
    }

    let mut conns = BTreeSet::new();
    let mut wire = |from: Endpoint, to: Endpoint| {
        conns.insert(IrConnection { from, to });
    };

    for (i, c) in nca.counters().iter().enumerate() {
        let x = CounterId(i as u32);
        let id = module_id(x);
        let body: Vec<StateId> = (1..nca.num_states() as StateId).filter(|&q| owner(q) == Some(x)).collect();
        let report = body.iter().any(|&q| nca.final_guard(q).is_some());
        let kind = if is_vector(x) {
            wire(Endpoint::new(state_id(body[0]), "o"), Endpoint::new(&id, "body"));
            NodeKind::Bitvector { size: c.max, min: c.exit_min, max: c.max, instance: c.instance.0, report }
        } else {
            wire(Endpoint::new(state_id(c.first[0]), "o"), Endpoint::new(&id, "fst"));
            wire(Endpoint::new(state_id(c.last[0]), "o"), Endpoint::new(&id, "lst"));
            NodeKind::Counter { min: c.exit_min, max: c.max, instance: c.instance.0, report }
        };
        nodes.push(IrNode { id, kind });
    }

    for t in nca.transitions() {
        if t.dst == 0 {
            continue;
        }
        let signal = if t.src == 0 {
            Endpoint::new(START_NODE, start_port)
        } else if let Some(x) = owner(t.src) {
            match t.action.update_of(x) {
                Some(Update::Copy(_)) => Endpoint::new(state_id(t.src), "o"),
                Some(Update::Increment(_)) => {
                    Endpoint::new(module_id(x), if is_vector(x) { "en_body" } else { "en_fst" })
                }
                _ => Endpoint::new(module_id(x), "en_out"),
            }
        } else {
            Endpoint::new(state_id(t.src), "o")
        };
        if t.src != 0 {
            wire(signal.clone(), Endpoint::new(state_id(t.dst), "i"));
        }
        if let Some(y) = owner(t.dst) {
            if matches!(t.action.update_of(y), Some(Update::AssignConst(_))) {
                wire(signal, Endpoint::new(module_id(y), "pre"));
            }
        }
    }

    Ok(AutomatonIr {
        version: IR_VERSION,
        metadata: IrMetadata {
            regex: to_pattern(&re.root),
            unfold_threshold: opts.unfold_threshold,
            force_unfold: opts.force_unfold,
            mode: opts.mode.to_string(),
            placements: p.records,
        },
        nodes,
        connections: conns.into_iter().collect(),
    })
}
