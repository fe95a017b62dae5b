//! Execution with one storage cell per repetition instance.
//!
//! Pure states are single bits. An instance tracked by a counter keeps one
//! active bit per body state plus a single shared value, which is exact
//! when the analysis proved the instance single-valued. An instance
//! tracked by a bit vector must have a one-state body (`σ{m,n}`); its cell
//! holds the full set of live values.

use std::collections::BTreeMap;

use serde::Serialize;
use smallvec::smallvec;

use super::cells::{bits_for, BitVectorCell};
use super::EngineError;
use crate::nca::{Nca, StateId, Update};
use crate::syntax::InstanceId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Counter,
    Bitvector,
}

#[derive(Clone, Debug)]
enum Cell {
    Counter { value: u32 },
    Vector { state: StateId, bits: BitVectorCell },
}

/// Storage used for one instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellSize {
    pub instance: InstanceId,
    pub kind: CellKind,
    pub bits: u32,
}

#[derive(Clone, Debug)]
pub struct OptimizedMatcher {
    nca: Nca,
    /// Counter index owning each state, if any.
    owner: Vec<Option<usize>>,
    cells: Vec<Cell>,
    active: Vec<bool>,
    active_list: Vec<StateId>,
    // scratch for the next step
    next_active: Vec<bool>,
    next_value: Vec<Option<u32>>,
    next_vec: Vec<Option<BitVectorCell>>,
}

impl OptimizedMatcher {
    /// Builds the matcher; every counter of `nca` needs a cell kind. Fails
    /// with [`EngineError::FallbackRequired`] on nested counting, missing
    /// kinds, or bit-vector instances whose body is not a single state.
    pub fn new(nca: Nca, kinds: &BTreeMap<InstanceId, CellKind>) -> Result<OptimizedMatcher, EngineError> {
        let fallback = |m: String| Err(EngineError::FallbackRequired(m));
        let mut owner = vec![None; nca.num_states()];
        for (q, s) in nca.states().iter().enumerate() {
            match s.counters.len() {
                0 => {}
                1 => owner[q] = Some(s.counters[0].0 as usize),
                _ => return fallback(format!("state {q} is inside nested repetitions")),
            }
        }
        let mut cells = Vec::new();
        for (i, c) in nca.counters().iter().enumerate() {
            match kinds.get(&c.instance) {
                None => return fallback(format!("no cell kind for instance {}", c.instance)),
                Some(CellKind::Counter) => cells.push(Cell::Counter { value: 0 }),
                Some(CellKind::Bitvector) => {
                    let body: Vec<usize> = (0..nca.num_states()).filter(|&q| owner[q] == Some(i)).collect();
                    if body.len() != 1 {
                        return fallback(format!("instance {} has a multi-state body", c.instance));
                    }
                    let q = body[0] as StateId;
                    for t in nca.transitions() {
                        let x = crate::nca::CounterId(i as u32);
                        let shape_ok = if t.dst == q && t.src == q {
                            matches!(t.action.update_of(x), Some(Update::Increment(_) | Update::AssignConst(1)))
                        } else if t.dst == q {
                            t.action.update_of(x) == Some(Update::AssignConst(1))
                        } else {
                            true
                        };
                        if !shape_ok {
                            return fallback(format!("instance {} has an unsupported transition shape", c.instance));
                        }
                    }
                    cells.push(Cell::Vector { state: q, bits: BitVectorCell::new(c.max) });
                }
            }
        }
        let n = nca.num_states();
        let ncount = cells.len();
        let mut m = OptimizedMatcher {
            nca,
            owner,
            cells,
            active: vec![false; n],
            active_list: Vec::new(),
            next_active: vec![false; n],
            next_value: vec![None; ncount],
            next_vec: vec![None; ncount],
        };
        m.reset();
        Ok(m)
    }

    pub fn nca(&self) -> &Nca {
        &self.nca
    }

    pub fn reset(&mut self) {
        self.active.iter_mut().for_each(|a| *a = false);
        self.active_list.clear();
        for c in &mut self.cells {
            match c {
                Cell::Counter { value } => *value = 0,
                Cell::Vector { bits, .. } => bits.reset(),
            }
        }
        for (q, _) in self.nca.initial() {
            self.active[*q as usize] = true;
            self.active_list.push(*q);
        }
    }

    /// Consumes one byte; true if a final token exists afterwards.
    pub fn feed(&mut self, byte: u8) -> bool {
        let nca = &self.nca;
        for v in &mut self.next_value {
            *v = None;
        }
        for (i, v) in self.next_vec.iter_mut().enumerate() {
            *v = match &self.cells[i] {
                Cell::Vector { bits, .. } => Some(BitVectorCell::new(bits.len())),
                Cell::Counter { .. } => None,
            };
        }
        let mut next_list = Vec::with_capacity(self.active_list.len() + 4);

        // scalar-valued sources: pure states and counter body states
        for &p in &self.active_list {
            let vals: crate::nca::Valuation = match self.owner[p as usize] {
                Some(x) => match &self.cells[x] {
                    Cell::Counter { value } => smallvec![*value],
                    Cell::Vector { .. } => continue,
                },
                None => smallvec![],
            };
            for &ti in nca.outgoing(p) {
                let t = &nca.transitions()[ti as usize];
                if !t.class.contains(byte) {
                    continue;
                }
                let Some(nv) = nca.fire(ti as usize, &vals) else { continue };
                let q = t.dst;
                match self.owner[q as usize] {
                    Some(x) if matches!(self.cells[x], Cell::Vector { .. }) => {
                        self.next_vec[x].as_mut().unwrap().set_first();
                    }
                    Some(x) => {
                        debug_assert!(
                            self.next_value[x].is_none_or(|v| v == nv[0]),
                            "counter instance holds two values at once"
                        );
                        self.next_value[x] = Some(nv[0]);
                        if !self.next_active[q as usize] {
                            self.next_active[q as usize] = true;
                            next_list.push(q);
                        }
                    }
                    None => {
                        if !self.next_active[q as usize] {
                            self.next_active[q as usize] = true;
                            next_list.push(q);
                        }
                    }
                }
            }
        }

        // bit-vector sources
        for x in 0..self.cells.len() {
            let Cell::Vector { state: p, bits } = &self.cells[x] else { continue };
            if bits.is_empty() {
                continue;
            }
            for &ti in nca.outgoing(*p) {
                let t = &nca.transitions()[ti as usize];
                if !t.class.contains(byte) {
                    continue;
                }
                if t.dst == *p && matches!(t.action.0.first(), Some((_, Update::Increment(_)))) {
                    let mut shifted = bits.clone();
                    shifted.shift();
                    self.next_vec[x].as_mut().unwrap().or_assign(&shifted);
                    continue;
                }
                let (lo, hi) = t.guard.0.first().map_or((1, bits.len()), |a| a.interval());
                let Some(v) = bits.first_in(lo, hi) else { continue };
                let Some(nv) = nca.fire(ti as usize, &[v]) else { continue };
                let q = t.dst;
                match self.owner[q as usize] {
                    Some(y) if matches!(self.cells[y], Cell::Vector { .. }) => {
                        self.next_vec[y].as_mut().unwrap().set_first();
                    }
                    Some(y) => {
                        debug_assert!(self.next_value[y].is_none_or(|w| w == nv[0]));
                        self.next_value[y] = Some(nv[0]);
                        if !self.next_active[q as usize] {
                            self.next_active[q as usize] = true;
                            next_list.push(q);
                        }
                    }
                    None => {
                        if !self.next_active[q as usize] {
                            self.next_active[q as usize] = true;
                            next_list.push(q);
                        }
                    }
                }
            }
        }

        // commit
        for &p in &self.active_list {
            self.active[p as usize] = false;
        }
        for &q in &next_list {
            self.active[q as usize] = true;
            self.next_active[q as usize] = false;
        }
        self.active_list = next_list;
        for x in 0..self.cells.len() {
            match &mut self.cells[x] {
                Cell::Counter { value } => {
                    if let Some(v) = self.next_value[x] {
                        *value = v;
                    }
                }
                Cell::Vector { bits, .. } => *bits = self.next_vec[x].take().unwrap(),
            }
        }
        self.accepting()
    }

    fn accepting(&self) -> bool {
        for &q in &self.active_list {
            let vals: crate::nca::Valuation = match self.owner[q as usize] {
                Some(x) => match &self.cells[x] {
                    Cell::Counter { value } => smallvec![*value],
                    Cell::Vector { .. } => unreachable!(),
                },
                None => smallvec![],
            };
            if self.nca.is_final_token(q, &vals) {
                return true;
            }
        }
        for c in &self.cells {
            if let Cell::Vector { state, bits } = c {
                if let Some(g) = self.nca.final_guard(*state) {
                    let (lo, hi) = g.0.first().map_or((1, bits.len()), |a| a.interval());
                    if bits.disjunct(lo, hi) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Live values of a bit-vector instance.
    pub fn vector_values(&self, instance: InstanceId) -> Option<Vec<u32>> {
        let x = self.nca.counter_of_instance(instance)?.0 as usize;
        match &self.cells[x] {
            Cell::Vector { bits, .. } => Some(bits.ones()),
            Cell::Counter { .. } => None,
        }
    }

    /// Value of a counter instance while one of its body states is active.
    pub fn counter_value(&self, instance: InstanceId) -> Option<u32> {
        let x = self.nca.counter_of_instance(instance)?.0 as usize;
        let Cell::Counter { value } = self.cells[x] else { return None };
        self.active_list.iter().any(|&q| self.owner[q as usize] == Some(x)).then_some(value)
    }

    /// Active states, counting a bit-vector state as active when its cell
    /// is non-empty.
    pub fn active_states(&self) -> Vec<StateId> {
        let mut out: Vec<StateId> = self.active_list.clone();
        for c in &self.cells {
            if let Cell::Vector { state, bits } = c {
                if !bits.is_empty() {
                    out.push(*state);
                }
            }
        }
        out.sort();
        out
    }

    /// Register and vector sizes per instance.
    pub fn cell_sizes(&self) -> Vec<CellSize> {
        self.nca
            .counters()
            .iter()
            .zip(&self.cells)
            .map(|(c, cell)| match cell {
                Cell::Counter { .. } => {
                    CellSize { instance: c.instance, kind: CellKind::Counter, bits: bits_for(c.max) }
                }
                Cell::Vector { .. } => CellSize { instance: c.instance, kind: CellKind::Bitvector, bits: c.max },
            })
            .collect()
    }
}
