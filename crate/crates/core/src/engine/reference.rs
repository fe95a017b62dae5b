//! Token-set execution: the configuration semantics, used as the baseline
//! every other backend is checked against.

use crate::nca::{Nca, StateId, Valuation};

/// A set of tokens, kept sorted and duplicate-free.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Configuration {
    tokens: Vec<(StateId, Valuation)>,
}

impl Configuration {
    pub fn initial(nca: &Nca) -> Configuration {
        Configuration::from_tokens(nca.initial().to_vec())
    }

    pub fn from_tokens(mut tokens: Vec<(StateId, Valuation)>) -> Configuration {
        tokens.sort();
        tokens.dedup();
        Configuration { tokens }
    }

    pub fn tokens(&self) -> &[(StateId, Valuation)] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Valuations of the tokens sitting on `q`.
    pub fn on_state(&self, q: StateId) -> impl Iterator<Item = &Valuation> {
        self.tokens.iter().filter(move |(p, _)| *p == q).map(|(_, v)| v)
    }

    pub fn contains_final(&self, nca: &Nca) -> bool {
        self.tokens.iter().any(|(q, v)| nca.is_final_token(*q, v))
    }
}

/// One configuration transition on `byte`.
pub fn step(nca: &Nca, config: &Configuration, byte: u8) -> Configuration {
    let mut next = Vec::with_capacity(config.tokens.len() + 4);
    for (q, vals) in &config.tokens {
        next.extend(nca.successors(*q, vals, byte));
    }
    Configuration::from_tokens(next)
}

/// Streaming matcher over the token-set semantics.
#[derive(Clone, Debug)]
pub struct ReferenceMatcher<'a> {
    nca: &'a Nca,
    config: Configuration,
}

impl<'a> ReferenceMatcher<'a> {
    pub fn new(nca: &'a Nca) -> Self {
        ReferenceMatcher { nca, config: Configuration::initial(nca) }
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    /// Consumes one byte; true if the new configuration holds a final token.
    pub fn feed(&mut self, byte: u8) -> bool {
        self.config = step(self.nca, &self.config, byte);
        self.config.contains_final(self.nca)
    }

    pub fn reset(&mut self) {
        self.config = Configuration::initial(self.nca);
    }
}

/// Runs `input` from the initial configuration and returns the final one.
pub fn run(nca: &Nca, input: &[u8]) -> Configuration {
    let mut m = ReferenceMatcher::new(nca);
    for &b in input {
        m.feed(b);
    }
    m.config
}
