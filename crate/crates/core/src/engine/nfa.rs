//! Counting-free position automaton run as a set of states.

use crate::charclass::CharClass;
use crate::nca::{glushkov, Nca};
use crate::syntax::{normalize, unfold, Regex, SizeError};

/// Bit-set simulation of the fully unfolded pattern.
#[derive(Clone, Debug)]
pub struct NfaMatcher {
    classes: Vec<CharClass>,
    succ: Vec<Vec<u32>>,
    finals: Vec<u64>,
    init: Vec<u64>,
    active: Vec<u64>,
    next: Vec<u64>,
}

impl NfaMatcher {
    /// Unfolds every repetition and builds the automaton.
    pub fn new(re: &Regex, node_limit: u64) -> Result<NfaMatcher, SizeError> {
        let flat = unfold(&normalize(re), None, node_limit)?;
        Ok(NfaMatcher::from_nca(&glushkov(&flat)))
    }

    /// Builds from a counting-free automaton; guards are ignored.
    pub fn from_nca(nca: &Nca) -> NfaMatcher {
        let n = nca.num_states();
        let words = n.div_ceil(64);
        let classes = nca.states().iter().map(|s| s.class.unwrap_or(CharClass::EMPTY)).collect();
        let mut succ = vec![Vec::new(); n];
        for t in nca.transitions() {
            succ[t.src as usize].push(t.dst);
        }
        let mut finals = vec![0u64; words];
        for q in 0..n {
            if nca.final_guard(q as u32).is_some() {
                finals[q / 64] |= 1 << (q % 64);
            }
        }
        let mut init = vec![0u64; words];
        for (q, _) in nca.initial() {
            init[*q as usize / 64] |= 1 << (q % 64);
        }
        NfaMatcher { classes, succ, finals, active: init.clone(), init, next: vec![0; words] }
    }

    pub fn num_states(&self) -> usize {
        self.classes.len()
    }

    pub fn reset(&mut self) {
        self.active.copy_from_slice(&self.init);
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Consumes one byte; true if a final state is active afterwards.
    pub fn feed(&mut self, byte: u8) -> bool {
        self.next.iter_mut().for_each(|w| *w = 0);
        for (wi, &w) in self.active.iter().enumerate() {
            let mut bits = w;
            while bits != 0 {
                let p = wi * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                for &q in &self.succ[p] {
                    if self.classes[q as usize].contains(byte) {
                        self.next[q as usize / 64] |= 1 << (q % 64);
                    }
                }
            }
        }
        std::mem::swap(&mut self.active, &mut self.next);
        self.active.iter().zip(&self.finals).any(|(a, f)| a & f != 0)
    }
}
