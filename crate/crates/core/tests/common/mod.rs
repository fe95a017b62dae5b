//! Test support: a set-semantics membership oracle that works directly on
//! the syntax tree, and seeded random pattern/input generators.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use recount::syntax::{Ast, Regex};

/// End positions reachable by matching `ast` from each position in `from`.
pub fn ends(ast: &Ast, input: &[u8], from: &BTreeSet<usize>) -> BTreeSet<usize> {
    match ast {
        Ast::Epsilon => from.clone(),
        Ast::Class(c) => from.iter().filter(|&&i| i < input.len() && c.contains(input[i])).map(|i| i + 1).collect(),
        Ast::Concat(items) => items.iter().fold(from.clone(), |s, x| ends(x, input, &s)),
        Ast::Alt(bs) => bs.iter().flat_map(|b| ends(b, input, from)).collect(),
        Ast::Star(c) => {
            let mut all = from.clone();
            let mut frontier = from.clone();
            while !frontier.is_empty() {
                let next: BTreeSet<usize> = ends(c, input, &frontier).difference(&all).copied().collect();
                all.extend(&next);
                frontier = next;
            }
            all
        }
        Ast::Repeat { child, min, max, .. } => {
            let mut out = if *min == 0 { from.clone() } else { BTreeSet::new() };
            let mut cur = from.clone();
            for k in 1..=*max {
                cur = ends(child, input, &cur);
                if k >= *min {
                    out.extend(&cur);
                }
                if cur.is_empty() {
                    break;
                }
            }
            out
        }
    }
}

/// Offsets `p >= 1` such that `input[..p]` is in the language.
pub fn oracle_events(re: &Regex, input: &[u8]) -> Vec<u64> {
    ends(&re.root, input, &BTreeSet::from([0])).into_iter().filter(|&p| p >= 1).map(|p| p as u64).collect()
}

const LEAVES: &[&str] = &["a", "b", "c", "[ab]", "[bc]", ".", "[^a]"];

/// Random pattern text with at most `classes` class occurrences and
/// repetition bounds up to `max_bound`.
pub fn random_pattern(rng: &mut ChaCha8Rng, classes: usize, max_bound: u32) -> String {
    fn go(rng: &mut ChaCha8Rng, budget: &mut usize, depth: u32, max_bound: u32) -> String {
        if *budget <= 1 || depth == 0 || rng.gen_bool(0.3) {
            *budget = budget.saturating_sub(1);
            return LEAVES[rng.gen_range(0..LEAVES.len())].to_string();
        }
        match rng.gen_range(0..7) {
            0 | 1 => {
                let a = go(rng, budget, depth - 1, max_bound);
                if *budget == 0 {
                    return a;
                }
                let b = go(rng, budget, depth - 1, max_bound);
                format!("{a}{b}")
            }
            2 => {
                let a = go(rng, budget, depth - 1, max_bound);
                if *budget == 0 {
                    return a;
                }
                let b = go(rng, budget, depth - 1, max_bound);
                format!("({a}|{b})")
            }
            3 => format!("({})*", go(rng, budget, depth - 1, max_bound)),
            4 => format!("({})?", go(rng, budget, depth - 1, max_bound)),
            _ => {
                let body = go(rng, budget, depth - 1, max_bound);
                let n = rng.gen_range(1..=max_bound);
                let m = rng.gen_range(0..=n);
                match rng.gen_range(0..3) {
                    0 => format!("({body}){{{n}}}"),
                    1 => format!("({body}){{{m},{n}}}"),
                    _ => format!("({body}){{{m},}}"),
                }
            }
        }
    }
    let mut budget = classes.saturating_sub(1).max(1);
    let core = go(rng, &mut budget, 4, max_bound);
    if rng.gen_bool(0.5) {
        format!(".*{core}")
    } else {
        core
    }
}

pub fn random_input(rng: &mut ChaCha8Rng, max_len: usize, alphabet: &[u8]) -> Vec<u8> {
    let n = rng.gen_range(0..=max_len);
    (0..n).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
}

/// Inputs biased toward long runs, which exercise repetition bounds.
pub fn runny_input(rng: &mut ChaCha8Rng, max_len: usize, alphabet: &[u8]) -> Vec<u8> {
    let n = rng.gen_range(0..=max_len);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let b = alphabet[rng.gen_range(0..alphabet.len())];
        let run = rng.gen_range(1..=10).min(n - out.len());
        out.extend(std::iter::repeat_n(b, run));
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}
