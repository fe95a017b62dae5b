//! Position-automaton construction with one counter per repetition.

use std::collections::{BTreeMap, HashSet};

use smallvec::smallvec;

use super::{Action, Atom, CounterId, CounterInfo, Guard, Nca, StateId, StateInfo, Transition, Update, Valuation};
use crate::charclass::CharClass;
use crate::syntax::{Ast, InstanceId, Regex};

struct Pos {
    class: CharClass,
    /// Enclosing repetitions, outermost first.
    anc: Vec<InstanceId>,
}

struct Info {
    first: Vec<usize>,
    last: Vec<usize>,
    nullable: bool,
}

#[derive(Clone, Copy)]
struct Rep {
    min: u32,
    max: u32,
    nullable_body: bool,
}

struct Builder {
    pos: Vec<Pos>,
    reps: BTreeMap<InstanceId, Rep>,
    rep_first: BTreeMap<InstanceId, Vec<usize>>,
    rep_last: BTreeMap<InstanceId, Vec<usize>>,
    /// Follow pairs: (p, q, depth, iterated repetition).
    follows: Vec<(usize, usize, usize, Option<InstanceId>)>,
}

impl Builder {
    fn visit(&mut self, ast: &Ast, anc: &mut Vec<InstanceId>) -> Info {
        match ast {
            Ast::Epsilon => Info { first: vec![], last: vec![], nullable: true },
            Ast::Class(c) => {
                let p = self.pos.len();
                self.pos.push(Pos { class: *c, anc: anc.clone() });
                Info { first: vec![p], last: vec![p], nullable: false }
            }
            Ast::Concat(items) => {
                let infos: Vec<Info> = items.iter().map(|x| self.visit(x, anc)).collect();
                let d = anc.len();
                for i in 0..infos.len() {
                    for j in i + 1..infos.len() {
                        for &p in &infos[i].last {
                            for &q in &infos[j].first {
                                self.follows.push((p, q, d, None));
                            }
                        }
                        if !infos[j].nullable {
                            break;
                        }
                    }
                }
                let mut first = Vec::new();
                for inf in &infos {
                    first.extend(&inf.first);
                    if !inf.nullable {
                        break;
                    }
                }
                let mut last = Vec::new();
                for inf in infos.iter().rev() {
                    last.extend(&inf.last);
                    if !inf.nullable {
                        break;
                    }
                }
                Info { first, last, nullable: infos.iter().all(|i| i.nullable) }
            }
            Ast::Alt(branches) => {
                let infos: Vec<Info> = branches.iter().map(|x| self.visit(x, anc)).collect();
                Info {
                    first: infos.iter().flat_map(|i| i.first.iter().copied()).collect(),
                    last: infos.iter().flat_map(|i| i.last.iter().copied()).collect(),
                    nullable: infos.iter().any(|i| i.nullable),
                }
            }
            Ast::Star(child) => {
                let inf = self.visit(child, anc);
                let d = anc.len();
                for &p in &inf.last {
                    for &q in &inf.first {
                        self.follows.push((p, q, d, None));
                    }
                }
                Info { first: inf.first, last: inf.last, nullable: true }
            }
            Ast::Repeat { child, min, max, id } => {
                let d = anc.len();
                anc.push(*id);
                let inf = self.visit(child, anc);
                anc.pop();
                for &p in &inf.last {
                    for &q in &inf.first {
                        self.follows.push((p, q, d, Some(*id)));
                    }
                }
                self.reps.insert(*id, Rep { min: *min, max: *max, nullable_body: inf.nullable });
                self.rep_first.insert(*id, inf.first.clone());
                self.rep_last.insert(*id, inf.last.clone());
                Info { first: inf.first, last: inf.last, nullable: inf.nullable || *min == 0 }
            }
        }
    }

    fn exit_atom(&self, x: CounterId, id: InstanceId) -> Atom {
        let r = self.reps[&id];
        let lo = if r.nullable_body { 1 } else { r.min.max(1) };
        if lo == r.max {
            Atom::Eq(x, lo)
        } else {
            Atom::Between(x, lo, r.max)
        }
    }
}

/// Builds the counter automaton of a normalized pattern.
///
/// State 0 is the initial state; state `p + 1` corresponds to the `p`-th
/// class occurrence. A leading `.*` is folded into a byte-wide self-loop on
/// the initial state.
pub fn glushkov(re: &Regex) -> Nca {
    let (root, sigma_loop) = split_leading_any(&re.root);
    let mut b = Builder {
        pos: Vec::new(),
        reps: BTreeMap::new(),
        rep_first: BTreeMap::new(),
        rep_last: BTreeMap::new(),
        follows: Vec::new(),
    };
    let top = b.visit(&root, &mut Vec::new());

    let cid: BTreeMap<InstanceId, CounterId> =
        b.reps.keys().enumerate().map(|(i, id)| (*id, CounterId(i as u32))).collect();
    let state = |p: usize| (p + 1) as StateId;

    let mut states = vec![StateInfo { class: sigma_loop.then_some(CharClass::FULL), counters: vec![] }];
    for p in &b.pos {
        let mut counters: Vec<CounterId> = p.anc.iter().map(|id| cid[id]).collect();
        counters.sort();
        states.push(StateInfo { class: Some(p.class), counters });
    }

    let counters: Vec<CounterInfo> = b
        .reps
        .iter()
        .map(|(id, r)| CounterInfo {
            instance: *id,
            min: r.min,
            max: r.max,
            exit_min: if r.nullable_body { 1 } else { r.min.max(1) },
            first: b.rep_first[id].iter().map(|&p| state(p)).collect(),
            last: b.rep_last[id].iter().map(|&p| state(p)).collect(),
        })
        .collect();

    let action_for = |q: usize, keep: &[InstanceId], inc: Option<InstanceId>| -> Action {
        let mut a: Vec<(CounterId, Update)> = b.pos[q]
            .anc
            .iter()
            .map(|id| {
                let x = cid[id];
                let u = if Some(*id) == inc {
                    Update::Increment(x)
                } else if keep.contains(id) {
                    Update::Copy(x)
                } else {
                    Update::AssignConst(1)
                };
                (x, u)
            })
            .collect();
        a.sort_by_key(|(x, _)| *x);
        Action(a)
    };

    let mut transitions = Vec::new();
    let mut seen = HashSet::new();
    let mut push = |t: Transition, transitions: &mut Vec<Transition>| {
        let key = (t.src, t.dst, t.guard.clone(), t.action.clone());
        if seen.insert(key) {
            transitions.push(t);
        }
    };

    if sigma_loop {
        push(
            Transition { src: 0, class: CharClass::FULL, guard: Guard::always(), dst: 0, action: Action::default() },
            &mut transitions,
        );
    }
    for &q in &top.first {
        let t = Transition {
            src: 0,
            class: b.pos[q].class,
            guard: Guard::always(),
            dst: state(q),
            action: action_for(q, &[], None),
        };
        push(t, &mut transitions);
    }
    for &(p, q, d, iter) in &b.follows {
        let skip = d + usize::from(iter.is_some());
        let mut atoms: Vec<Atom> = b.pos[p].anc[skip..].iter().map(|id| b.exit_atom(cid[id], *id)).collect();
        if let Some(id) = iter {
            atoms.push(Atom::Lt(cid[&id], b.reps[&id].max));
        }
        atoms.sort_by_key(|a| a.counter());
        let t = Transition {
            src: state(p),
            class: b.pos[q].class,
            guard: Guard(atoms),
            dst: state(q),
            action: action_for(q, &b.pos[q].anc[..d], iter),
        };
        push(t, &mut transitions);
    }

    let mut finals = vec![None; states.len()];
    if top.nullable {
        finals[0] = Some(Guard::always());
    }
    for &p in &top.last {
        let mut atoms: Vec<Atom> = b.pos[p].anc.iter().map(|id| b.exit_atom(cid[id], *id)).collect();
        atoms.sort_by_key(|a| a.counter());
        finals[state(p) as usize] = Some(Guard(atoms));
    }

    let init: Vec<(StateId, Valuation)> = vec![(0, smallvec![])];
    Nca::from_parts(states, counters, transitions, init, finals).expect("construction yields a well-formed automaton")
}

/// Strips a leading `.*` factor, reporting whether it was present.
fn split_leading_any(root: &Ast) -> (Ast, bool) {
    let is_any_star = |a: &Ast| matches!(a, Ast::Star(c) if matches!(c.as_ref(), Ast::Class(k) if k.is_full()));
    match root {
        r if is_any_star(r) => (Ast::Epsilon, true),
        Ast::Concat(items) if is_any_star(&items[0]) => (Ast::concat(items[1..].to_vec()), true),
        other => (other.clone(), false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{normalize, parse};

    fn build(s: &str) -> Nca {
        glushkov(&normalize(&parse(s).unwrap()))
    }

    #[test]
    fn state_counts_of_reference_shapes() {
        assert_eq!(build(".*ab{5}").num_states(), 3);
        assert_eq!(build(".*a(bc){2,4}d").num_states(), 5);
        assert_eq!(build("a{3}.*b{4}").num_states(), 4);
        let n = build(".*a(b(cd){2,5}e){3}f");
        assert_eq!(n.num_states(), 7);
        let sizes: Vec<usize> = (0..7).map(|q| n.state(q).counters.len()).collect();
        assert_eq!(sizes, vec![0, 0, 1, 2, 2, 1, 0]);
    }

    #[test]
    fn self_loop_and_guards_for_single_class_repetition() {
        let n = build(".*ab{5}");
        let has = |src, dst, g: &str, a: &str| {
            n.transitions()
                .iter()
                .any(|t| t.src == src && t.dst == dst && t.guard.to_string() == g && t.action.to_string() == a)
        };
        assert!(has(0, 0, "true", ""));
        assert!(has(1, 2, "true", "x0:=1"));
        assert!(has(2, 2, "x0<5", "x0++"));
        assert_eq!(n.final_guard(2).unwrap().to_string(), "x0=5");
        assert!(n.starts_anywhere());
    }

    #[test]
    fn nested_counters_follow_the_two_counter_pattern() {
        // counter x0 is the inner {2,5}, x1 the outer {3}
        let n = build(".*a(b(cd){2,5}e){3}f");
        let find = |src, dst| n.transitions().iter().filter(move |t| t.src == src && t.dst == dst);
        let back: Vec<_> = find(5, 2).collect();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].guard.to_string(), "x1<3");
        assert_eq!(back[0].action.to_string(), "x1++");
        let enter: Vec<_> = find(2, 3).collect();
        assert_eq!(enter[0].action.to_string(), "x0:=1; x1");
        let exit: Vec<_> = find(4, 5).collect();
        assert_eq!(exit[0].guard.to_string(), "2<=x0<=5");
        assert_eq!(exit[0].action.to_string(), "x1");
        assert_eq!(n.bound_of(CounterId(1)), Ok(3));
        assert_eq!(n.bound_of(CounterId(0)), Ok(5));
    }

    #[test]
    fn trivial_literal() {
        let n = build("a");
        assert_eq!(n.num_states(), 2);
        assert_eq!(n.final_guard(1), Some(&Guard::always()));
        assert!(n.final_guard(0).is_none());
        assert!(n.counters().is_empty());
    }

    #[test]
    fn bound_of_unknown_counter_is_an_error() {
        let n = build("a");
        assert_eq!(n.bound_of(CounterId(0)), Err(super::super::NcaError::UnknownCounter(CounterId(0))));
    }

    #[test]
    fn counting_free_state_count() {
        let n = build("(a|bc)*d[ef]");
        assert_eq!(n.num_states(), 5 + 1);
    }
}
