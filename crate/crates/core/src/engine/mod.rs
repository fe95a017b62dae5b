//! Streaming match engines.
//!
//! Three interchangeable backends report the same events: the token-set
//! [`reference`] semantics, the [`optimized`] engine with one storage cell
//! per repetition, and the fully unfolded [`nfa`].

pub mod cells;
pub mod nfa;
pub mod optimized;
pub mod reference;

use std::io::{self, Read};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nca::{glushkov, Nca};
use crate::placement::{plan, PlanOptions};
use crate::syntax::{normalize, Regex, SizeError};

pub use cells::{counter_cell_step, BitVectorCell, CounterCell};
pub use nfa::NfaMatcher;
pub use optimized::{CellKind, CellSize, OptimizedMatcher};
pub use reference::{run, step, Configuration, ReferenceMatcher};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MatchEvent {
    /// Number of bytes consumed when the match was detected.
    pub end_offset: u64,
    pub rule: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Reference,
    Optimized,
    UnfoldedNfa,
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "reference" => Ok(Backend::Reference),
            "optimized" => Ok(Backend::Optimized),
            "nfa" | "unfolded" => Ok(Backend::UnfoldedNfa),
            _ => Err(format!("unknown backend {s:?}")),
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    /// The optimized engine cannot run this automaton as given; use the
    /// reference backend or plan the pattern first.
    #[error("fallback required: {0}")]
    FallbackRequired(String),
    #[error(transparent)]
    Size(#[from] SizeError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A matcher owning its automaton.
#[derive(Clone, Debug)]
pub enum Engine {
    Reference { nca: Nca, config: Configuration },
    Optimized(OptimizedMatcher),
    UnfoldedNfa(NfaMatcher),
}

impl Engine {
    pub fn reference(nca: Nca) -> Engine {
        let config = Configuration::initial(&nca);
        Engine::Reference { nca, config }
    }

    /// Builds a matcher for `re`. The optimized backend plans cell kinds
    /// itself, unfolding whatever neither cell kind can track.
    pub fn build(re: &Regex, backend: Backend, opts: &PlanOptions) -> Result<Engine, EngineError> {
        Ok(match backend {
            Backend::Reference => Engine::reference(glushkov(&normalize(re))),
            Backend::UnfoldedNfa => Engine::UnfoldedNfa(NfaMatcher::new(re, opts.node_limit)?),
            Backend::Optimized => {
                let p = plan(re, opts)?;
                Engine::Optimized(OptimizedMatcher::new(p.nca, &p.kinds)?)
            }
        })
    }

    pub fn reset(&mut self) {
        match self {
            Engine::Reference { nca, config } => *config = Configuration::initial(nca),
            Engine::Optimized(m) => m.reset(),
            Engine::UnfoldedNfa(m) => m.reset(),
        }
    }

    /// Consumes one byte; true if the prefix read so far matches.
    pub fn feed(&mut self, byte: u8) -> bool {
        match self {
            Engine::Reference { nca, config } => {
                *config = step(nca, config, byte);
                config.contains_final(nca)
            }
            Engine::Optimized(m) => m.feed(byte),
            Engine::UnfoldedNfa(m) => m.feed(byte),
        }
    }

    pub fn run(&mut self, input: &[u8], rule: u32) -> Vec<MatchEvent> {
        let mut out = Vec::new();
        for (i, &b) in input.iter().enumerate() {
            if self.feed(b) {
                out.push(MatchEvent { end_offset: i as u64 + 1, rule });
            }
        }
        out
    }

    /// Reads `input` to the end in fixed-size chunks.
    pub fn run_reader<R: Read>(&mut self, mut input: R, rule: u32) -> io::Result<Vec<MatchEvent>> {
        let mut buf = [0u8; 8192];
        let mut offset = 0u64;
        let mut out = Vec::new();
        loop {
            let n = match input.read(&mut buf) {
                Ok(0) => break,
                Ok(n) => n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => return Err(e),
            };
            for &b in &buf[..n] {
                offset += 1;
                if self.feed(b) {
                    out.push(MatchEvent { end_offset: offset, rule });
                }
            }
        }
        Ok(out)
    }
}

/// One pass over `input`, reporting every matching prefix end.
pub fn match_stream<R: Read>(
    re: &Regex,
    input: R,
    backend: Backend,
    rule: u32,
) -> Result<Vec<MatchEvent>, EngineError> {
    let mut e = Engine::build(re, backend, &PlanOptions::default())?;
    Ok(e.run_reader(input, rule)?)
}

pub fn match_bytes(re: &Regex, input: &[u8], backend: Backend) -> Result<Vec<MatchEvent>, EngineError> {
    let mut e = Engine::build(re, backend, &PlanOptions::default())?;
    Ok(e.run(input, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn ends(s: &str, input: &[u8], b: Backend) -> Vec<u64> {
        match_bytes(&parse(s).unwrap(), input, b).unwrap().iter().map(|e| e.end_offset).collect()
    }

    const ALL: [Backend; 3] = [Backend::Reference, Backend::Optimized, Backend::UnfoldedNfa];

    #[test]
    fn counted_group() {
        for b in ALL {
            assert_eq!(ends("a(bc){1,3}d", b"abcbcd", b), vec![6], "{b:?}");
            assert!(ends("a", b"", b).is_empty());
            assert_eq!(ends(".*w(xy){1,2}z", b"wxyxyz", b), vec![6]);
            assert!(ends(".*w(xy){1,2}z", b"wxyxyxyz", b).is_empty());
        }
    }

    #[test]
    fn reference_step_examples() {
        let n = glushkov(&normalize(&parse(".*.{2}").unwrap()));
        let c = step(&n, &Configuration::initial(&n), b'a');
        assert_eq!(c.len(), 2);
        assert!(step(&n, &Configuration::default(), b'a').is_empty());
        let c = step(&n, &c, b'a');
        let vals: Vec<u32> = c.on_state(1).map(|v| v[0]).collect();
        assert_eq!(vals, vec![1, 2]);
    }

    #[test]
    fn optimized_refuses_nested_counting() {
        let n = glushkov(&normalize(&parse("(a{2}b){2}").unwrap()));
        let kinds = n.counters().iter().map(|c| (c.instance, CellKind::Counter)).collect();
        assert!(matches!(OptimizedMatcher::new(n, &kinds), Err(EngineError::FallbackRequired(_))));
    }

    #[test]
    fn optimized_cell_sizes() {
        let p = plan(&parse(".*a{1000}|b(cd){1000}").unwrap(), &PlanOptions::default()).unwrap();
        let m = OptimizedMatcher::new(p.nca, &p.kinds).unwrap();
        let sizes = m.cell_sizes();
        assert!(sizes.contains(&CellSize {
            instance: crate::syntax::InstanceId(0),
            kind: CellKind::Bitvector,
            bits: 1000
        }));
        assert!(sizes.contains(&CellSize {
            instance: crate::syntax::InstanceId(1),
            kind: CellKind::Counter,
            bits: 10
        }));
    }
}
