//! Language-preserving rewrites: normalization and unfolding.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use super::ast::{Ast, IdAlloc, InstanceId, Regex};
use super::print::to_pattern;
use crate::charclass::CharClass;

/// Default ceiling on the node count an unfolding may produce.
pub const DEFAULT_NODE_LIMIT: u64 = 10_000_000;

/// Normal form expected by the automaton construction:
///
/// * repetitions with `max < 2` are expanded, `min = 0` repetitions become
///   `ε | r{1,n}`;
/// * alternations are flattened and their single-class branches merged
///   into one class;
/// * concatenations are flattened and `ε` factors dropped.
///
/// Idempotent; instance ids of surviving repetitions are preserved.
pub fn normalize(re: &Regex) -> Regex {
    re.with_root(norm(&re.root))
}

fn norm(ast: &Ast) -> Ast {
    match ast {
        Ast::Epsilon => Ast::Epsilon,
        Ast::Class(c) => Ast::Class(*c),
        Ast::Concat(items) => mk_concat(items.iter().map(norm).collect()),
        Ast::Alt(branches) => mk_alt(branches.iter().map(norm).collect()),
        Ast::Star(child) => mk_star(norm(child)),
        Ast::Repeat { child, min, max, id } => mk_repeat(norm(child), *min, *max, *id),
    }
}

fn mk_concat(items: Vec<Ast>) -> Ast {
    let flat: Vec<Ast> = items
        .into_iter()
        .flat_map(|i| match i {
            Ast::Concat(inner) => inner,
            other => vec![other],
        })
        .filter(|i| *i != Ast::Epsilon)
        .collect();
    Ast::concat(flat)
}

fn mk_alt(branches: Vec<Ast>) -> Ast {
    let mut out: Vec<Ast> = Vec::new();
    let mut class_slot: Option<usize> = None;
    let mut has_eps = false;
    let flat = branches.into_iter().flat_map(|b| match b {
        Ast::Alt(inner) => inner,
        other => vec![other],
    });
    for b in flat {
        match b {
            Ast::Class(c) => match class_slot {
                Some(i) => {
                    if let Ast::Class(prev) = &mut out[i] {
                        *prev = prev.union(&c);
                    }
                }
                None => {
                    class_slot = Some(out.len());
                    out.push(Ast::Class(c));
                }
            },
            Ast::Epsilon => {
                if !has_eps {
                    has_eps = true;
                    out.push(Ast::Epsilon);
                }
            }
            other => {
                if !out.contains(&other) {
                    out.push(other);
                }
            }
        }
    }
    Ast::alt(out)
}

fn mk_star(child: Ast) -> Ast {
    match child {
        Ast::Epsilon => Ast::Epsilon,
        Ast::Star(inner) => Ast::Star(inner),
        other => Ast::star(other),
    }
}

fn mk_repeat(child: Ast, min: u32, max: u32, id: InstanceId) -> Ast {
    if max == 0 || child == Ast::Epsilon {
        return Ast::Epsilon;
    }
    if max == 1 {
        return if min == 0 { mk_alt(vec![Ast::Epsilon, child]) } else { child };
    }
    if min == 0 {
        return mk_alt(vec![Ast::Epsilon, Ast::repeat(child, 1, max, id)]);
    }
    Ast::repeat(child, min, max, id)
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("unfolding would produce about {estimated} nodes, above the limit of {limit}")]
pub struct SizeError {
    pub estimated: u64,
    pub limit: u64,
}

/// Unfolds every repetition with `max <= threshold`. `None` unfolds all of
/// them, yielding a counting-free pattern.
pub fn unfold(re: &Regex, threshold: Option<u32>, limit: u64) -> Result<Regex, SizeError> {
    unfold_where(re, &|_, _, max| threshold.is_none_or(|t| max <= t), limit)
}

/// Unfolds exactly the listed instances.
pub fn unfold_instances(re: &Regex, ids: &BTreeSet<InstanceId>, limit: u64) -> Result<Regex, SizeError> {
    unfold_where(re, &|id, _, _| ids.contains(&id), limit)
}

/// Unfolds every repetition for which `pick(id, min, max)` holds:
/// `r{m,n}` becomes `r^m (ε | r (ε | r ...))` with `n - m` optional copies.
/// The first copy keeps the original nested ids; later copies get fresh ones.
pub fn unfold_where(re: &Regex, pick: &dyn Fn(InstanceId, u32, u32) -> bool, limit: u64) -> Result<Regex, SizeError> {
    let estimated = estimate(&re.root, pick);
    if estimated > limit {
        return Err(SizeError { estimated, limit });
    }
    let mut next = re.next_instance();
    let root = expand(&re.root, pick, &mut IdAlloc(&mut next));
    Ok(Regex::with_allocator(norm(&root), next, re.notes.clone()))
}

fn estimate(ast: &Ast, pick: &dyn Fn(InstanceId, u32, u32) -> bool) -> u64 {
    match ast {
        Ast::Epsilon | Ast::Class(_) => 1,
        Ast::Concat(xs) | Ast::Alt(xs) => xs.iter().fold(1u64, |acc, x| acc.saturating_add(estimate(x, pick))),
        Ast::Star(c) => estimate(c, pick).saturating_add(1),
        Ast::Repeat { child, min, max, id } => {
            let c = estimate(child, pick);
            if pick(*id, *min, *max) {
                // each copy plus an Alt, an Epsilon and a Concat per optional
                (*max as u64).saturating_mul(c.saturating_add(3)).saturating_add(1)
            } else {
                c.saturating_add(1)
            }
        }
    }
}

fn expand(ast: &Ast, pick: &dyn Fn(InstanceId, u32, u32) -> bool, ids: &mut IdAlloc) -> Ast {
    match ast {
        Ast::Epsilon | Ast::Class(_) => ast.clone(),
        Ast::Concat(xs) => Ast::concat(xs.iter().map(|x| expand(x, pick, ids)).collect()),
        Ast::Alt(xs) => Ast::alt(xs.iter().map(|x| expand(x, pick, ids)).collect()),
        Ast::Star(c) => Ast::star(expand(c, pick, ids)),
        Ast::Repeat { child, min, max, id } => {
            let body = expand(child, pick, ids);
            if !pick(*id, *min, *max) {
                return Ast::repeat(body, *min, *max, *id);
            }
            let mut copies = Vec::with_capacity(*max as usize);
            for i in 0..*max {
                copies.push(if i == 0 { body.clone() } else { ids.copy_fresh(&body) });
            }
            let mut tail = Ast::Epsilon;
            for copy in copies.drain(*min as usize..).rev() {
                tail = Ast::Alt(vec![Ast::Epsilon, Ast::concat(vec![copy, tail])]);
            }
            copies.push(tail);
            Ast::concat(copies)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InstanceInfo {
    pub id: InstanceId,
    pub min: u32,
    pub max: u32,
    /// The repeated subexpression, pretty-printed.
    pub body: String,
}

/// Repetition instances in left-to-right source order.
pub fn count_instances(ast: &Ast) -> Vec<InstanceInfo> {
    let mut out = Vec::new();
    ast.walk(&mut |n| {
        if let Ast::Repeat { child, min, max, id } = n {
            out.push(InstanceInfo { id: *id, min: *min, max: *max, body: to_pattern(child) });
        }
    });
    out
}

/// Largest repetition upper bound in the pattern; 0 when there is none.
pub fn max_bound(ast: &Ast) -> u32 {
    count_instances(ast).iter().map(|i| i.max).max().unwrap_or(0)
}

/// The body class of a repetition whose body is a single class.
pub fn single_class_body(ast: &Ast, id: InstanceId) -> Option<CharClass> {
    let mut found = None;
    ast.walk(&mut |n| {
        if let Ast::Repeat { child, id: i, .. } = n {
            if *i == id {
                if let Ast::Class(c) = child.as_ref() {
                    found = Some(*c);
                }
            }
        }
    });
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse::parse;

    fn n(s: &str) -> String {
        to_pattern(&normalize(&parse(s).unwrap()).root)
    }

    #[test]
    fn merges_simple_alternations() {
        assert_eq!(n("[a]|[b]"), "[ab]");
        assert_eq!(n("a|bc|c"), "[ac]|bc");
        assert_eq!(n("(a|b)|(c|d)"), "[a-d]");
    }

    #[test]
    fn small_repetitions_disappear() {
        assert_eq!(n("a{1,1}"), "a");
        assert_eq!(n("a{0,1}"), "()|a");
        assert_eq!(n("a{0,3}"), "()|a{1,3}");
        assert_eq!(n("a{0}b"), "b");
        assert!(count_instances(&normalize(&parse("a{0,1}").unwrap()).root).is_empty());
    }

    #[test]
    fn normalize_is_idempotent_on_samples() {
        for s in ["a{0,3}|b|()|()", "((a|b)*)*x{0,2}", "(a{2}){0,4}", "(){3}a"] {
            let once = normalize(&parse(s).unwrap());
            assert_eq!(normalize(&once).root, once.root, "{s}");
        }
    }

    #[test]
    fn instance_listing() {
        let r = parse("a{1,5}bc{4}").unwrap();
        let inst = count_instances(&r.root);
        assert_eq!(inst.len(), 2);
        assert_eq!((inst[0].max, inst[1].max), (5, 4));
        assert_eq!(max_bound(&r.root), 5);
        assert!(count_instances(&parse("abc").unwrap().root).is_empty());
    }

    #[test]
    fn unfolding_shapes() {
        let r = parse("a{2}").unwrap();
        assert_eq!(to_pattern(&unfold(&r, Some(2), DEFAULT_NODE_LIMIT).unwrap().root), "aa");
        let r = parse("(bc){1,3}").unwrap();
        assert_eq!(to_pattern(&unfold(&r, Some(3), DEFAULT_NODE_LIMIT).unwrap().root), "bc(()|bc(()|bc))");
        let r = parse("a{1000}").unwrap();
        assert_eq!(unfold(&r, Some(2), DEFAULT_NODE_LIMIT).unwrap().root, r.root);
    }

    #[test]
    fn unfolding_respects_the_node_limit() {
        let r = parse("(a{1000}){1000}").unwrap();
        assert!(unfold(&r, None, 1000).is_err());
        assert!(unfold(&r, Some(10), 1000).is_ok());
    }

    #[test]
    fn unfolded_copies_get_fresh_ids() {
        let r = parse("(a{5}){2}").unwrap();
        let u = unfold(&r, Some(2), DEFAULT_NODE_LIMIT).unwrap();
        let ids: Vec<u32> = count_instances(&u.root).iter().map(|i| i.id.0).collect();
        assert_eq!(ids, vec![0, 2]);
        assert_eq!(u.next_instance(), 3);
    }
}
