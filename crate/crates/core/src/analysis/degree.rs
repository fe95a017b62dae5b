//! Threshold queries on the degree of counter-ambiguity.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::nca::{Nca, StateId, Valuation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegreeAnswer {
    Yes,
    No,
    Inconclusive,
}

/// One representative byte per equivalence class of bytes that no
/// transition class distinguishes.
pub(crate) fn byte_representatives(nca: &Nca) -> Vec<u8> {
    let mut classes: Vec<_> = nca.transitions().iter().map(|t| t.class).collect();
    classes.sort();
    classes.dedup();
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    let mut reps = Vec::new();
    for b in 0..=255u8 {
        let sig: Vec<bool> = classes.iter().map(|c| c.contains(b)).collect();
        if seen.insert(sig) {
            reps.push(b);
        }
    }
    reps
}

/// Whether some input puts `d` tokens with pairwise distinct valuations on
/// state `q` simultaneously. Explores sorted `d`-tuples of tokens; gives up
/// with `Inconclusive` after `budget` tuples.
pub fn degree_at_least(nca: &Nca, q: StateId, d: usize, budget: u64) -> DegreeAnswer {
    if d <= 1 {
        // any reachable token on q; a d = 0 query is trivially satisfied
        if d == 0 {
            return DegreeAnswer::Yes;
        }
    } else if nca.state(q).counters.is_empty() {
        return DegreeAnswer::No;
    }
    let reps = byte_representatives(nca);
    let mut ids: HashMap<(StateId, Valuation), u32> = HashMap::new();
    let mut tokens: Vec<(StateId, Valuation)> = Vec::new();
    let mut intern = |t: (StateId, Valuation), tokens: &mut Vec<(StateId, Valuation)>| -> u32 {
        *ids.entry(t.clone()).or_insert_with(|| {
            tokens.push(t);
            tokens.len() as u32 - 1
        })
    };
    let hit = |tuple: &[u32], tokens: &[(StateId, Valuation)]| {
        tuple.iter().all(|&t| tokens[t as usize].0 == q) && {
            let mut vals: Vec<&Valuation> = tuple.iter().map(|&t| &tokens[t as usize].1).collect();
            vals.sort();
            vals.dedup();
            vals.len() == d
        }
    };

    let init: Vec<u32> = nca.initial().iter().map(|t| intern(t.clone(), &mut tokens)).collect();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut queue: VecDeque<Vec<u32>> = VecDeque::new();
    for start in tuples_from(&[init], d) {
        if seen.insert(start.clone()) {
            if hit(&start, &tokens) {
                return DegreeAnswer::Yes;
            }
            queue.push_back(start);
        }
    }
    while let Some(tuple) = queue.pop_front() {
        for &b in &reps {
            let mut per: Vec<Vec<u32>> = Vec::with_capacity(d);
            for &t in &tuple {
                let (p, vals) = tokens[t as usize].clone();
                let succ: Vec<u32> = nca
                    .successors(p, &vals, b)
                    .collect::<Vec<_>>()
                    .into_iter()
                    .map(|s| intern(s, &mut tokens))
                    .collect();
                per.push(succ);
            }
            if per.iter().any(|s| s.is_empty()) {
                continue;
            }
            for next in tuples_from(&per, d) {
                if seen.insert(next.clone()) {
                    if hit(&next, &tokens) {
                        return DegreeAnswer::Yes;
                    }
                    if seen.len() as u64 >= budget {
                        return DegreeAnswer::Inconclusive;
                    }
                    queue.push_back(next);
                }
            }
        }
    }
    DegreeAnswer::No
}

/// Sorted tuples picking one element from each list (a single list is
/// reused for every position).
fn tuples_from(lists: &[Vec<u32>], d: usize) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = vec![Vec::new()];
    for i in 0..d {
        let choices = &lists[i.min(lists.len() - 1)];
        let mut next = Vec::new();
        for prefix in &out {
            for &c in choices {
                let mut t = prefix.clone();
                t.push(c);
                next.push(t);
            }
        }
        out = next;
    }
    let mut set: Vec<Vec<u32>> = out
        .into_iter()
        .map(|mut t| {
            t.sort();
            t
        })
        .collect();
    set.sort();
    set.dedup();
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nca::glushkov;
    use crate::syntax::{normalize, parse};

    fn nca(s: &str) -> Nca {
        glushkov(&normalize(&parse(s).unwrap()))
    }

    #[test]
    fn pair_and_triple_on_any_then_two() {
        let n = nca(".*a{2}");
        assert_eq!(degree_at_least(&n, 1, 2, 10_000), DegreeAnswer::Yes);
        // only values 1 and 2 exist, so three distinct valuations cannot
        assert_eq!(degree_at_least(&n, 1, 3, 10_000), DegreeAnswer::No);
        assert_eq!(degree_at_least(&nca(".*a{3}"), 1, 3, 10_000), DegreeAnswer::Yes);
    }

    #[test]
    fn counting_free_states_have_degree_one() {
        let n = nca(".*ab*c");
        for q in 0..n.num_states() as u32 {
            assert_eq!(degree_at_least(&n, q, 2, 10_000), DegreeAnswer::No);
        }
    }
}
