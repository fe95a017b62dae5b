//! Breadth-first reachability over pairs of tokens.

use std::collections::{HashMap, HashSet};
use std::ops::Range;
use std::time::{Duration, Instant};

use super::{AmbiguityReport, InconclusiveReason, InstanceReport, Mode, Verdict, Witness, DEFAULT_BUDGET};
use crate::charclass::CharClass;
use crate::nca::{CounterId, Nca, StateId, Valuation};

#[derive(Clone, Debug)]
pub struct ExactOptions {
    /// Stop once this many token pairs have been created.
    pub budget: u64,
    /// Store each unordered pair once, in canonical order.
    pub symmetry: bool,
    /// Counters whose verdicts are wanted; the search halts early once all
    /// of them are known to be ambiguous. `None` means every counter.
    pub scope: Option<Vec<CounterId>>,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions { budget: DEFAULT_BUDGET, symmetry: true, scope: None }
    }
}

/// Raw outcome of one exploration, indexed by counter.
#[derive(Clone, Debug)]
pub struct Exploration {
    pub ambiguous: Vec<Option<Witness>>,
    pub multi_valued: Vec<bool>,
    pub pairs_created: u64,
    pub exhausted: bool,
    pub elapsed: Duration,
}

impl Exploration {
    /// Verdict for counter `x` under this exploration.
    pub fn verdict(&self, x: CounterId) -> Verdict {
        match &self.ambiguous[x.0 as usize] {
            Some(w) => Verdict::Ambiguous(w.clone()),
            None if self.exhausted => Verdict::Inconclusive(InconclusiveReason::Budget),
            None => Verdict::Unambiguous,
        }
    }

    pub fn single_valued(&self, x: CounterId) -> bool {
        !self.exhausted && !self.multi_valued[x.0 as usize]
    }
}

struct Explorer<'a> {
    nca: &'a Nca,
    tokens: Vec<(StateId, Valuation)>,
    index: HashMap<(StateId, Valuation), u32>,
    succ: Vec<Option<Range<usize>>>,
    arena: Vec<(CharClass, u32)>,
}

impl Explorer<'_> {
    fn intern(&mut self, q: StateId, v: Valuation) -> u32 {
        if let Some(&i) = self.index.get(&(q, v.clone())) {
            return i;
        }
        let i = self.tokens.len() as u32;
        self.tokens.push((q, v.clone()));
        self.index.insert((q, v), i);
        self.succ.push(None);
        i
    }

    fn ensure(&mut self, t: u32) -> Range<usize> {
        if let Some(r) = &self.succ[t as usize] {
            return r.clone();
        }
        let (q, vals) = self.tokens[t as usize].clone();
        let mut out = Vec::new();
        for &ti in self.nca.outgoing(q) {
            if let Some(nv) = self.nca.fire(ti as usize, &vals) {
                let tr = &self.nca.transitions()[ti as usize];
                out.push((tr.class, tr.dst, nv));
            }
        }
        let start = self.arena.len();
        for (c, dst, nv) in out {
            let id = self.intern(dst, nv);
            self.arena.push((c, id));
        }
        let r = start..self.arena.len();
        self.succ[t as usize] = Some(r.clone());
        r
    }
}

struct Node {
    a: u32,
    b: u32,
    parent: u32,
    byte: u8,
}

fn key(a: u32, b: u32) -> u64 {
    ((a as u64) << 32) | b as u64
}

/// Explores the product of the token transition system with itself.
pub fn explore(nca: &Nca, opts: &ExactOptions) -> Exploration {
    let start = Instant::now();
    let ncount = nca.counters().len();
    let mut result = Exploration {
        ambiguous: vec![None; ncount],
        multi_valued: vec![false; ncount],
        pairs_created: 0,
        exhausted: false,
        elapsed: Duration::ZERO,
    };
    let scope: Vec<CounterId> = match &opts.scope {
        Some(s) => s.clone(),
        None => (0..ncount as u32).map(CounterId).collect(),
    };
    if scope.is_empty() {
        result.elapsed = start.elapsed();
        return result;
    }
    let mut in_scope = vec![false; ncount];
    for x in &scope {
        in_scope[x.0 as usize] = true;
    }
    let mut remaining = scope.len();

    let mut ex = Explorer { nca, tokens: Vec::new(), index: HashMap::new(), succ: Vec::new(), arena: Vec::new() };
    let mut visited: HashSet<u64> = HashSet::new();
    let mut nodes: Vec<Node> = Vec::new();

    let canon = |ex: &Explorer, a: u32, b: u32| -> (u32, u32) {
        if opts.symmetry && ex.tokens[b as usize] < ex.tokens[a as usize] {
            (b, a)
        } else {
            (a, b)
        }
    };

    // returns true when the search can stop
    let check = |ex: &Explorer, nodes: &Vec<Node>, idx: usize, result: &mut Exploration, remaining: &mut usize| {
        let n = &nodes[idx];
        let (qa, va) = &ex.tokens[n.a as usize];
        let (qb, vb) = &ex.tokens[n.b as usize];
        if va == vb && qa == qb {
            return false;
        }
        let ca = &nca.state(*qa).counters;
        let cb = &nca.state(*qb).counters;
        for (i, x) in ca.iter().enumerate() {
            let Some(j) = cb.iter().position(|y| y == x) else { continue };
            if va[i] == vb[j] {
                continue;
            }
            let xi = x.0 as usize;
            result.multi_valued[xi] = true;
            if qa == qb && result.ambiguous[xi].is_none() {
                let input = reconstruct(nodes, idx);
                result.ambiguous[xi] = Some(Witness { input, state: *qa, valuations: (va.clone(), vb.clone()) });
                if in_scope[xi] {
                    *remaining -= 1;
                }
            }
        }
        *remaining == 0
    };

    let inits: Vec<u32> = nca.initial().iter().map(|(q, v)| ex.intern(*q, v.clone())).collect();
    let mut stop = false;
    'init: for i in 0..inits.len() {
        let lo = if opts.symmetry { i } else { 0 };
        for j in lo..inits.len() {
            let (a, b) = canon(&ex, inits[i], inits[j]);
            if visited.insert(key(a, b)) {
                nodes.push(Node { a, b, parent: u32::MAX, byte: 0 });
                if check(&ex, &nodes, nodes.len() - 1, &mut result, &mut remaining) {
                    stop = true;
                    break 'init;
                }
            }
        }
    }

    let mut head = 0;
    'bfs: while !stop && head < nodes.len() {
        let (a, b) = (nodes[head].a, nodes[head].b);
        let ra = ex.ensure(a);
        let rb = ex.ensure(b);
        for ia in ra {
            let (ca, ta) = ex.arena[ia];
            for ib in rb.clone() {
                let (cb, tb) = ex.arena[ib];
                if !ca.intersects(&cb) {
                    continue;
                }
                let (x, y) = canon(&ex, ta, tb);
                if !visited.insert(key(x, y)) {
                    continue;
                }
                let byte = ca.intersect(&cb).min_byte().unwrap();
                nodes.push(Node { a: x, b: y, parent: head as u32, byte });
                if check(&ex, &nodes, nodes.len() - 1, &mut result, &mut remaining) {
                    break 'bfs;
                }
                if nodes.len() as u64 >= opts.budget {
                    result.exhausted = true;
                    break 'bfs;
                }
            }
        }
        head += 1;
    }

    result.pairs_created = nodes.len() as u64;
    result.elapsed = start.elapsed();
    result
}

fn reconstruct(nodes: &[Node], mut idx: usize) -> Vec<u8> {
    let mut out = Vec::new();
    while nodes[idx].parent != u32::MAX {
        out.push(nodes[idx].byte);
        idx = nodes[idx].parent as usize;
    }
    out.reverse();
    out
}

/// Exact analysis of every counter of `nca`.
pub fn exact_ambiguity(nca: &Nca, budget: u64) -> AmbiguityReport {
    let ex = explore(nca, &ExactOptions { budget, ..ExactOptions::default() });
    report_from(nca, &ex, Mode::Exact)
}

pub(crate) fn report_from(nca: &Nca, ex: &Exploration, mode: Mode) -> AmbiguityReport {
    let instances = nca
        .counters()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let x = CounterId(i as u32);
            InstanceReport {
                id: c.instance,
                min: c.min,
                max: c.max,
                verdict: ex.verdict(x),
                single_valued: ex.single_valued(x),
                pairs_created: ex.pairs_created,
                elapsed: ex.elapsed,
            }
        })
        .collect();
    AmbiguityReport { mode, instances, pairs_created: ex.pairs_created, elapsed: ex.elapsed }
}
