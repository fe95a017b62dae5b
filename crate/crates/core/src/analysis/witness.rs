//! Witness replay and the subset-sum family of hard instances.

use crate::engine::reference::run;
use crate::nca::{Nca, StateId, Valuation};
use crate::syntax::{Ast, InstanceId, Regex};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessCheck {
    Confirmed { state: StateId, valuations: (Valuation, Valuation) },
    Refuted,
}

/// Replays `witness` and reports the first state holding two tokens.
pub fn verify_witness(nca: &Nca, witness: &[u8]) -> WitnessCheck {
    let config = run(nca, witness);
    let tokens = config.tokens();
    for w in tokens.windows(2) {
        if w[0].0 == w[1].0 {
            return WitnessCheck::Confirmed { state: w[0].0, valuations: (w[0].1.clone(), w[1].1.clone()) };
        }
    }
    WitnessCheck::Refuted
}

/// Instance id of the trailing `b{2}` in [`subset_sum_regex`].
pub fn subset_sum_tail(set: &[u32]) -> InstanceId {
    InstanceId(set.len() as u32 + 1)
}

/// `((a{n1}|ε)…(a{nk}|ε)#b | a{T}#bb) b{2}` over the alphabet `{a, b, #}`.
/// Its final `b{2}` is counter-ambiguous iff some subset of `set` sums to
/// `target`.
pub fn subset_sum_regex(set: &[u32], target: u32) -> Regex {
    assert!(!set.is_empty() && set.iter().all(|&n| n >= 1) && target >= 1);
    let mut ids = 0u32;
    let mut rep = |child: Ast, n: u32| {
        ids += 1;
        Ast::repeat(child, n, n, InstanceId(ids - 1))
    };
    let mut left = Vec::new();
    for &n in set {
        left.push(Ast::Alt(vec![rep(Ast::byte(b'a'), n), Ast::Epsilon]));
    }
    left.push(Ast::byte(b'#'));
    left.push(Ast::byte(b'b'));
    let right = Ast::concat(vec![rep(Ast::byte(b'a'), target), Ast::literal(b"#bb")]);
    let tail = rep(Ast::byte(b'b'), 2);
    Regex::new(Ast::concat(vec![Ast::Alt(vec![Ast::Concat(left), right]), tail]))
}
