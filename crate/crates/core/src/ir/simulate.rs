//! Cycle-accurate simulation of the network, one byte per cycle.
//!
//! A state is active in cycle `t` when it was enabled by some signal in
//! cycle `t - 1` (or by its enable attribute) and the byte matches its
//! class. Module outputs computed in cycle `t` enable states in `t + 1`.

use std::collections::HashMap;

use serde::Serialize;

use super::{validate, AutomatonIr, Enable, IrError, NodeKind, START_NODE};
use crate::charclass::CharClass;
use crate::engine::{counter_cell_step, BitVectorCell, CounterCell, MatchEvent};

/// Work done in one cycle.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CycleActivity {
    /// Indices of the active states, in node order among states.
    pub active: Vec<u32>,
    pub counter_ops: u32,
    pub bitvector_ops: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ActivityTrace {
    pub cycles: Vec<CycleActivity>,
}

impl ActivityTrace {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn total_active(&self) -> u64 {
        self.cycles.iter().map(|c| c.active.len() as u64).sum()
    }

    pub fn total_counter_ops(&self) -> u64 {
        self.cycles.iter().map(|c| c.counter_ops as u64).sum()
    }

    pub fn total_bitvector_ops(&self) -> u64 {
        self.cycles.iter().map(|c| c.bitvector_ops as u64).sum()
    }
}

const SOD: usize = 0;
const ALWAYS: usize = 1;

struct HState {
    class: CharClass,
    enable: Enable,
    report: bool,
    inputs: Vec<usize>,
    out: usize,
}

struct Counter {
    cell: CounterCell,
    pre: Vec<usize>,
    fst: usize,
    lst: usize,
    en_fst: usize,
    en_out: usize,
    report: bool,
}

struct Vector {
    cell: BitVectorCell,
    min: u32,
    pre: Vec<usize>,
    body: usize,
    en_body: usize,
    en_out: usize,
    report: bool,
}

/// Simulator state for one IR.
pub struct IrSimulator {
    hstates: Vec<HState>,
    counters: Vec<Counter>,
    vectors: Vec<Vector>,
    prev: Vec<bool>,
    cur: Vec<bool>,
    active: Vec<bool>,
    cycle: u64,
}

impl IrSimulator {
    pub fn new(ir: &AutomatonIr) -> Result<IrSimulator, IrError> {
        validate(ir)?;
        // signal slots: start ports, then every output port in node order
        let mut slot: HashMap<(String, String), usize> = HashMap::new();
        slot.insert((START_NODE.into(), "startOfData".into()), SOD);
        slot.insert((START_NODE.into(), "always".into()), ALWAYS);
        for n in &ir.nodes {
            for p in n.kind.outputs() {
                let k = slot.len();
                slot.insert((n.id.clone(), p.to_string()), k);
            }
        }
        let sig = |node: &str, port: &str| slot[&(node.to_string(), port.to_string())];
        let inputs = |node: &str, port: &str| -> Vec<usize> {
            ir.sources(node, port).into_iter().map(|e| sig(&e.node, &e.port)).collect()
        };
        let mut ordinal = HashMap::new();
        let mut hstates = Vec::new();
        let mut counters = Vec::new();
        let mut vectors = Vec::new();
        for n in &ir.nodes {
            if let NodeKind::HState { class, enable, report } = n.kind {
                ordinal.insert(n.id.as_str(), hstates.len());
                hstates.push(HState { class, enable, report, inputs: inputs(&n.id, "i"), out: sig(&n.id, "o") });
            }
        }
        let driver = |node: &str, port: &str| ordinal[ir.sources(node, port)[0].node.as_str()];
        for n in &ir.nodes {
            match n.kind {
                NodeKind::Counter { min, max, report, .. } => counters.push(Counter {
                    cell: CounterCell::new(min, max),
                    pre: inputs(&n.id, "pre"),
                    fst: driver(&n.id, "fst"),
                    lst: driver(&n.id, "lst"),
                    en_fst: sig(&n.id, "en_fst"),
                    en_out: sig(&n.id, "en_out"),
                    report,
                }),
                NodeKind::Bitvector { size, min, report, .. } => vectors.push(Vector {
                    cell: BitVectorCell::new(size),
                    min,
                    pre: inputs(&n.id, "pre"),
                    body: driver(&n.id, "body"),
                    en_body: sig(&n.id, "en_body"),
                    en_out: sig(&n.id, "en_out"),
                    report,
                }),
                NodeKind::HState { .. } => {}
            }
        }
        let nsig = slot.len();
        let mut sim = IrSimulator {
            active: vec![false; hstates.len()],
            hstates,
            counters,
            vectors,
            prev: vec![false; nsig],
            cur: vec![false; nsig],
            cycle: 0,
        };
        sim.reset();
        Ok(sim)
    }

    pub fn reset(&mut self) {
        self.prev.iter_mut().for_each(|s| *s = false);
        self.prev[SOD] = true;
        self.prev[ALWAYS] = true;
        self.cycle = 0;
        for c in &mut self.counters {
            c.cell = CounterCell::new(c.cell.min, c.cell.max);
        }
        for v in &mut self.vectors {
            v.cell.reset();
        }
    }

    /// Runs one cycle; true if a reporting node fired.
    pub fn step(&mut self, byte: u8, activity: Option<&mut CycleActivity>) -> bool {
        self.cycle += 1;
        let first = self.cycle == 1;
        let prev = &self.prev;
        let cur = &mut self.cur;
        cur.iter_mut().for_each(|s| *s = false);
        cur[ALWAYS] = true;
        let mut report = false;

        for (i, h) in self.hstates.iter().enumerate() {
            let enabled = match h.enable {
                Enable::Always => true,
                Enable::OnStartOfData if first => true,
                _ => h.inputs.iter().any(|&s| prev[s]),
            };
            let on = enabled && h.class.contains(byte);
            self.active[i] = on;
            cur[h.out] = on;
            report |= on && h.report;
        }

        let mut counter_ops = 0;
        for c in &mut self.counters {
            let pre_prev = c.pre.iter().any(|&s| prev[s]);
            let (fst, lst) = (self.active[c.fst], self.active[c.lst]);
            let (cell, en_fst, en_out) = counter_cell_step(&c.cell, pre_prev, fst, lst);
            c.cell = cell;
            cur[c.en_fst] = en_fst;
            cur[c.en_out] = en_out;
            report |= en_out && c.report;
            counter_ops += (fst || lst) as u32;
        }

        let mut bitvector_ops = 0;
        for v in &mut self.vectors {
            let pre_prev = v.pre.iter().any(|&s| prev[s]);
            let was_empty = v.cell.is_empty();
            if self.active[v.body] {
                v.cell.shift();
                if pre_prev {
                    v.cell.set_first();
                }
            } else {
                v.cell.reset();
            }
            let max = v.cell.len();
            let en_body = max > 1 && v.cell.disjunct(1, max - 1);
            let en_out = v.cell.disjunct(v.min, max);
            cur[v.en_body] = en_body;
            cur[v.en_out] = en_out;
            report |= en_out && v.report;
            bitvector_ops += (self.active[v.body] || !was_empty) as u32;
        }

        if let Some(a) = activity {
            a.active.clear();
            a.active.extend(self.active.iter().enumerate().filter(|(_, on)| **on).map(|(i, _)| i as u32));
            a.counter_ops = counter_ops;
            a.bitvector_ops = bitvector_ops;
        }
        std::mem::swap(&mut self.prev, &mut self.cur);
        report
    }

    /// Current contents of the `k`-th bit vector, in node order.
    pub fn vector_values(&self, k: usize) -> Vec<u32> {
        self.vectors[k].cell.ones()
    }

    pub fn run(&mut self, input: &[u8], rule: u32, trace: Option<&mut ActivityTrace>) -> Vec<MatchEvent> {
        let mut events = Vec::new();
        let mut cycles = trace.map(|t| &mut t.cycles);
        for (i, &b) in input.iter().enumerate() {
            let fired = match cycles.as_deref_mut() {
                Some(cs) => {
                    let mut a = CycleActivity::default();
                    let f = self.step(b, Some(&mut a));
                    cs.push(a);
                    f
                }
                None => self.step(b, None),
            };
            if fired {
                events.push(MatchEvent { end_offset: i as u64 + 1, rule });
            }
        }
        events
    }
}

/// Simulates `ir` on `input` from the start of data.
pub fn simulate_ir(ir: &AutomatonIr, input: &[u8]) -> Result<(Vec<MatchEvent>, ActivityTrace), IrError> {
    let mut sim = IrSimulator::new(ir)?;
    let mut trace = ActivityTrace::default();
    let events = sim.run(input, 0, Some(&mut trace));
    Ok((events, trace))
}
