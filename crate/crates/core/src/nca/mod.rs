//! Nondeterministic counter automata.
//!
//! An automaton has a set of states, each owning a (possibly empty) set of
//! counters. Transitions consume one byte from a class, are enabled by a
//! guard over the source state's counters and assign every counter of the
//! destination state. Automata produced by [`glushkov`] are homogeneous
//! (every transition into a state carries the state's class) and have a
//! single pure initial state.

mod dump;
mod glushkov;

use std::fmt;

use serde::Serialize;
use smallvec::SmallVec;
use thiserror::Error;

use crate::charclass::CharClass;
use crate::syntax::InstanceId;

pub use glushkov::glushkov;

pub type StateId = u32;

/// Counter values of one state, ordered like [`StateInfo::counters`].
pub type Valuation = SmallVec<[u32; 4]>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct CounterId(pub u32);

impl fmt::Display for CounterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Lt(CounterId, u32),
    Eq(CounterId, u32),
    Between(CounterId, u32, u32),
}

impl Atom {
    pub fn counter(&self) -> CounterId {
        match *self {
            Atom::Lt(x, _) | Atom::Eq(x, _) | Atom::Between(x, _, _) => x,
        }
    }

    /// Inclusive value interval admitted by the atom.
    pub fn interval(&self) -> (u32, u32) {
        match *self {
            Atom::Lt(_, n) => (0, n.saturating_sub(1)),
            Atom::Eq(_, n) => (n, n),
            Atom::Between(_, m, n) => (m, n),
        }
    }

    pub fn holds(&self, v: u32) -> bool {
        let (lo, hi) = self.interval();
        lo <= v && v <= hi
    }
}

/// Conjunction of atoms; the empty conjunction is `true`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Guard(pub Vec<Atom>);

impl Guard {
    pub fn always() -> Guard {
        Guard(Vec::new())
    }

    pub fn is_true(&self) -> bool {
        self.0.is_empty()
    }

    pub fn atom_for(&self, x: CounterId) -> Option<&Atom> {
        self.0.iter().find(|a| a.counter() == x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Update {
    AssignConst(u32),
    Copy(CounterId),
    Increment(CounterId),
}

/// One update per destination counter, in destination counter order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Action(pub Vec<(CounterId, Update)>);

impl Action {
    pub fn update_of(&self, x: CounterId) -> Option<Update> {
        self.0.iter().find(|(y, _)| *y == x).map(|(_, u)| *u)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub src: StateId,
    pub class: CharClass,
    pub guard: Guard,
    pub dst: StateId,
    pub action: Action,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateInfo {
    /// Class on every incoming transition; `None` for a state without any.
    pub class: Option<CharClass>,
    /// Counters owned by the state, ascending.
    pub counters: Vec<CounterId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CounterInfo {
    pub instance: InstanceId,
    pub min: u32,
    pub max: u32,
    /// Smallest counter value admitted on exit: `min`, or 1 when the body
    /// is nullable.
    pub exit_min: u32,
    /// States where an iteration of the repeated body can begin.
    pub first: Vec<StateId>,
    /// States where an iteration of the repeated body can end.
    pub last: Vec<StateId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum NcaError {
    #[error("transition {0} has an empty class")]
    EmptyClass(usize),
    #[error("state {0} has incoming transitions with different classes")]
    NotHomogeneous(StateId),
    #[error("transition {index}: {message}")]
    BadTransition { index: usize, message: String },
    #[error("counter {0} does not occur in the automaton")]
    UnknownCounter(CounterId),
    #[error("counter {0} is incremented without an upper-bound guard")]
    Unbounded(CounterId),
    #[error("counter {counter} is assigned {value}, above its bound {bound}")]
    AssignAboveBound { counter: CounterId, value: u32, bound: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum SlotOp {
    Const(u32),
    Copy(usize),
    Inc(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Compiled {
    checks: SmallVec<[(usize, u32, u32); 2]>,
    ops: SmallVec<[SlotOp; 4]>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nca {
    states: Vec<StateInfo>,
    counters: Vec<CounterInfo>,
    transitions: Vec<Transition>,
    compiled: Vec<Compiled>,
    outgoing: Vec<Vec<u32>>,
    init: Vec<(StateId, Valuation)>,
    finals: Vec<Option<Guard>>,
    final_checks: Vec<SmallVec<[(usize, u32, u32); 2]>>,
}

fn slot_of(states: &[StateInfo], q: StateId, x: CounterId) -> Option<usize> {
    states[q as usize].counters.iter().position(|y| *y == x)
}

fn compile_guard(states: &[StateInfo], q: StateId, g: &Guard) -> Option<SmallVec<[(usize, u32, u32); 2]>> {
    g.0.iter()
        .map(|a| {
            let (lo, hi) = a.interval();
            slot_of(states, q, a.counter()).map(|s| (s, lo, hi))
        })
        .collect()
}

impl Nca {
    /// Assembles an automaton, checking the structural invariants: non-empty
    /// classes, homogeneity, guards only over source counters and exactly
    /// one update per destination counter drawn from source counters.
    pub fn from_parts(
        states: Vec<StateInfo>,
        counters: Vec<CounterInfo>,
        transitions: Vec<Transition>,
        init: Vec<(StateId, Valuation)>,
        finals: Vec<Option<Guard>>,
    ) -> Result<Nca, NcaError> {
        let mut compiled = Vec::with_capacity(transitions.len());
        let mut outgoing = vec![Vec::new(); states.len()];
        for (i, t) in transitions.iter().enumerate() {
            let bad = |m: &str| NcaError::BadTransition { index: i, message: m.to_string() };
            if t.class.is_empty() {
                return Err(NcaError::EmptyClass(i));
            }
            if t.src as usize >= states.len() || t.dst as usize >= states.len() {
                return Err(bad("state out of range"));
            }
            if states[t.dst as usize].class != Some(t.class) {
                return Err(NcaError::NotHomogeneous(t.dst));
            }
            let checks = compile_guard(&states, t.src, &t.guard).ok_or_else(|| bad("guard on a foreign counter"))?;
            let dst_counters = &states[t.dst as usize].counters;
            if t.action.0.len() != dst_counters.len() || t.action.0.iter().zip(dst_counters).any(|((x, _), y)| x != y) {
                return Err(bad("action must assign each destination counter once, in order"));
            }
            let mut ops = SmallVec::new();
            for (_, u) in &t.action.0 {
                ops.push(match *u {
                    Update::AssignConst(c) => SlotOp::Const(c),
                    Update::Copy(y) => {
                        SlotOp::Copy(slot_of(&states, t.src, y).ok_or_else(|| bad("copy of a foreign counter"))?)
                    }
                    Update::Increment(y) => {
                        SlotOp::Inc(slot_of(&states, t.src, y).ok_or_else(|| bad("increment of a foreign counter"))?)
                    }
                });
            }
            compiled.push(Compiled { checks, ops });
            outgoing[t.src as usize].push(i as u32);
        }
        let mut final_checks = Vec::with_capacity(states.len());
        for (q, f) in finals.iter().enumerate() {
            let checks = match f {
                Some(g) => compile_guard(&states, q as StateId, g).ok_or(NcaError::BadTransition {
                    index: usize::MAX,
                    message: format!("final guard of state {q} uses a foreign counter"),
                })?,
                None => SmallVec::new(),
            };
            final_checks.push(checks);
        }
        Ok(Nca { states, counters, transitions, compiled, outgoing, init, finals, final_checks })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, q: StateId) -> &StateInfo {
        &self.states[q as usize]
    }

    pub fn states(&self) -> &[StateInfo] {
        &self.states
    }

    pub fn counters(&self) -> &[CounterInfo] {
        &self.counters
    }

    pub fn counter(&self, x: CounterId) -> &CounterInfo {
        &self.counters[x.0 as usize]
    }

    /// The counter allocated for a repetition instance.
    pub fn counter_of_instance(&self, id: InstanceId) -> Option<CounterId> {
        self.counters.iter().position(|c| c.instance == id).map(|i| CounterId(i as u32))
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Indices of transitions leaving `q`.
    pub fn outgoing(&self, q: StateId) -> &[u32] {
        &self.outgoing[q as usize]
    }

    pub fn initial(&self) -> &[(StateId, Valuation)] {
        &self.init
    }

    pub fn final_guard(&self, q: StateId) -> Option<&Guard> {
        self.finals[q as usize].as_ref()
    }

    pub fn is_final_token(&self, q: StateId, vals: &[u32]) -> bool {
        self.finals[q as usize].is_some()
            && self.final_checks[q as usize].iter().all(|&(s, lo, hi)| lo <= vals[s] && vals[s] <= hi)
    }

    /// Fires transition `t` from a token with valuation `vals`, ignoring the
    /// class. `None` if the guard rejects.
    #[inline]
    pub fn fire(&self, t: usize, vals: &[u32]) -> Option<Valuation> {
        let c = &self.compiled[t];
        if !c.checks.iter().all(|&(s, lo, hi)| lo <= vals[s] && vals[s] <= hi) {
            return None;
        }
        Some(
            c.ops
                .iter()
                .map(|op| match *op {
                    SlotOp::Const(k) => k,
                    SlotOp::Copy(s) => vals[s],
                    SlotOp::Inc(s) => vals[s] + 1,
                })
                .collect(),
        )
    }

    /// Token successors of `(q, vals)` on `byte`.
    pub fn successors<'a>(
        &'a self,
        q: StateId,
        vals: &'a [u32],
        byte: u8,
    ) -> impl Iterator<Item = (StateId, Valuation)> + 'a {
        self.outgoing[q as usize].iter().filter_map(move |&t| {
            let tr = &self.transitions[t as usize];
            if !tr.class.contains(byte) {
                return None;
            }
            self.fire(t as usize, vals).map(|v| (tr.dst, v))
        })
    }

    /// States that own at least one counter.
    pub fn is_pure(&self, q: StateId) -> bool {
        self.states[q as usize].counters.is_empty()
    }

    /// True if the initial state carries a self-loop on every byte, i.e.
    /// the pattern may start matching at any offset.
    pub fn starts_anywhere(&self) -> bool {
        self.init.iter().any(|(q, _)| {
            self.outgoing(*q).iter().any(|&t| {
                let tr = &self.transitions[t as usize];
                tr.dst == *q && tr.class.is_full()
            })
        })
    }

    /// Upper bound of counter `x` read off the automaton: the least `n` such
    /// that every increment of `x` is guarded by `x < n`, raised to cover
    /// constants and values copied from other counters.
    pub fn bound_of(&self, x: CounterId) -> Result<u32, NcaError> {
        if !self.states.iter().any(|s| s.counters.contains(&x)) {
            return Err(NcaError::UnknownCounter(x));
        }
        let ncount = self.counters.len().max(x.0 as usize + 1);
        let mut ub: Vec<Option<u32>> = vec![None; ncount];
        // least fixpoint over the dependency structure of updates
        loop {
            let mut changed = false;
            for t in &self.transitions {
                for (y, u) in &t.action.0 {
                    let v = match *u {
                        Update::AssignConst(c) => Some(c),
                        Update::Copy(z) => ub.get(z.0 as usize).copied().flatten(),
                        Update::Increment(z) => match t.guard.atom_for(z) {
                            Some(a) => Some(a.interval().1 + 1),
                            None => return Err(NcaError::Unbounded(z)),
                        },
                    };
                    if let Some(v) = v {
                        let slot = &mut ub[y.0 as usize];
                        if slot.is_none_or(|old| v > old) {
                            *slot = Some(v);
                            changed = true;
                        }
                    }
                }
            }
            for (q, vals) in &self.init {
                for (x, v) in self.states[*q as usize].counters.iter().zip(vals) {
                    let slot = &mut ub[x.0 as usize];
                    if slot.is_none_or(|old| *v > old) {
                        *slot = Some(*v);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        Ok(ub[x.0 as usize].unwrap_or(0))
    }

    pub fn to_text(&self) -> String {
        dump::to_text(self)
    }

    pub fn to_dot(&self) -> String {
        dump::to_dot(self)
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("true");
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" && ")?;
            }
            match *a {
                Atom::Lt(x, n) => write!(f, "{x}<{n}")?,
                Atom::Eq(x, n) => write!(f, "{x}={n}")?,
                Atom::Between(x, m, n) => write!(f, "{m}<={x}<={n}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, u)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            match *u {
                Update::AssignConst(c) => write!(f, "{x}:={c}")?,
                Update::Copy(y) if y == *x => write!(f, "{x}")?,
                Update::Copy(y) => write!(f, "{x}:={y}")?,
                Update::Increment(y) if y == *x => write!(f, "{x}++")?,
                Update::Increment(y) => write!(f, "{x}:={y}+1")?,
            }
        }
        Ok(())
    }
}
