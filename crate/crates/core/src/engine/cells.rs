//! Storage cells for repetition instances: a scalar counter for instances
//! that never hold two values at once, and a bit vector holding the whole
//! set of live values otherwise.

/// Scalar counter of one repetition instance.
///
/// `value` is the number of body iterations begun so far in the current
/// run through the repetition, so it can be compared with the bounds
/// directly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CounterCell {
    pub active: bool,
    pub value: u32,
    pub min: u32,
    pub max: u32,
}

impl CounterCell {
    pub fn new(min: u32, max: u32) -> Self {
        CounterCell { active: false, value: 0, min, max }
    }

    /// Width of the register, in bits.
    pub fn width(&self) -> u32 {
        bits_for(self.max)
    }
}

/// Bits needed to store values `0..=n`.
pub fn bits_for(n: u32) -> u32 {
    32 - n.leading_zeros()
}

/// One cycle of the counter module.
///
/// `pre_prev`: the entry signal was raised in the previous cycle.
/// `fst_now`, `lst_now`: the first/last body states are active this cycle.
/// Returns the new cell and the `(en_fst, en_out)` outputs, which enable
/// the first body state and the successor states in the next cycle.
pub fn counter_cell_step(
    cell: &CounterCell,
    pre_prev: bool,
    fst_now: bool,
    lst_now: bool,
) -> (CounterCell, bool, bool) {
    let mut next = *cell;
    if fst_now {
        if pre_prev {
            next.value = 1;
        } else {
            next.value = next.value.saturating_add(1);
        }
        next.active = true;
    }
    let live = next.active && lst_now;
    let en_fst = live && next.value < next.max;
    let en_out = live && next.min <= next.value && next.value <= next.max;
    (next, en_fst, en_out)
}

/// Set of live counter values `1..=n` of one repetition instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitVectorCell {
    words: Vec<u64>,
    len: u32,
}

impl BitVectorCell {
    pub fn new(len: u32) -> Self {
        assert!(len >= 1);
        BitVectorCell { words: vec![0; (len as usize).div_ceil(64)], len }
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    /// Bit `i` (1-based).
    pub fn get(&self, i: u32) -> bool {
        debug_assert!(1 <= i && i <= self.len);
        let k = (i - 1) as usize;
        self.words[k / 64] >> (k % 64) & 1 == 1
    }

    pub fn set(&mut self, i: u32) {
        let k = (i - 1) as usize;
        self.words[k / 64] |= 1 << (k % 64);
    }

    pub fn reset(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    /// Sets bit 1: a token enters the repetition with value 1.
    pub fn set_first(&mut self) {
        self.words[0] |= 1;
    }

    /// Moves bit `i` to `i + 1` for `i < n`; bit `n` falls off and bit 1
    /// becomes 0.
    pub fn shift(&mut self) {
        let mut carry = 0;
        for w in self.words.iter_mut() {
            let out = *w >> 63;
            *w = (*w << 1) | carry;
            carry = out;
        }
        let tail = self.len as usize % 64;
        if tail != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << tail) - 1;
        }
    }

    /// OR of bits `m..=n`.
    pub fn disjunct(&self, m: u32, n: u32) -> bool {
        let (lo, hi) = (m.max(1), n.min(self.len));
        if lo > hi {
            return false;
        }
        let (a, b) = ((lo - 1) as usize, (hi - 1) as usize);
        for wi in a / 64..=b / 64 {
            let mut mask = u64::MAX;
            if wi == a / 64 {
                mask &= u64::MAX << (a % 64);
            }
            if wi == b / 64 {
                mask &= u64::MAX >> (63 - b % 64);
            }
            if self.words[wi] & mask != 0 {
                return true;
            }
        }
        false
    }

    /// Positions of the set bits, ascending.
    pub fn ones(&self) -> Vec<u32> {
        (1..=self.len).filter(|&i| self.get(i)).collect()
    }

    pub fn or_assign(&mut self, other: &BitVectorCell) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    /// Smallest set bit within `m..=n`.
    pub fn first_in(&self, m: u32, n: u32) -> Option<u32> {
        (m.max(1)..=n.min(self.len)).find(|&i| self.get(i))
    }
}
