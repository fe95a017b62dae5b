//! Byte character classes.
//!
//! The alphabet is fixed to the 256 byte values, so a class is exactly a
//! 256-bit membership set.

use std::fmt;

/// A set of byte values.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CharClass([u64; 4]);

impl CharClass {
    pub const EMPTY: CharClass = CharClass([0; 4]);
    pub const FULL: CharClass = CharClass([u64::MAX; 4]);

    pub fn empty() -> Self {
        Self::EMPTY
    }

    /// The universal class, `.` in the pattern dialect.
    pub fn full() -> Self {
        Self::FULL
    }

    pub fn singleton(byte: u8) -> Self {
        let mut c = Self::EMPTY;
        c.insert(byte);
        c
    }

    /// Inclusive byte range.
    pub fn range(lo: u8, hi: u8) -> Self {
        let mut c = Self::EMPTY;
        for b in lo..=hi {
            c.insert(b);
        }
        c
    }

    pub fn from_bytes<I: IntoIterator<Item = u8>>(bytes: I) -> Self {
        let mut c = Self::EMPTY;
        for b in bytes {
            c.insert(b);
        }
        c
    }

    #[inline]
    pub fn insert(&mut self, byte: u8) {
        self.0[(byte >> 6) as usize] |= 1u64 << (byte & 63);
    }

    #[inline]
    pub fn remove(&mut self, byte: u8) {
        self.0[(byte >> 6) as usize] &= !(1u64 << (byte & 63));
    }

    #[inline]
    pub fn contains(&self, byte: u8) -> bool {
        self.0[(byte >> 6) as usize] & (1u64 << (byte & 63)) != 0
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0 == [0; 4]
    }

    #[inline]
    pub fn is_full(&self) -> bool {
        self.0 == [u64::MAX; 4]
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn union(&self, other: &CharClass) -> CharClass {
        CharClass([self.0[0] | other.0[0], self.0[1] | other.0[1], self.0[2] | other.0[2], self.0[3] | other.0[3]])
    }

    #[inline]
    pub fn intersect(&self, other: &CharClass) -> CharClass {
        CharClass([self.0[0] & other.0[0], self.0[1] & other.0[1], self.0[2] & other.0[2], self.0[3] & other.0[3]])
    }

    #[inline]
    pub fn intersects(&self, other: &CharClass) -> bool {
        (self.0[0] & other.0[0]) | (self.0[1] & other.0[1]) | (self.0[2] & other.0[2]) | (self.0[3] & other.0[3]) != 0
    }

    pub fn complement(&self) -> CharClass {
        CharClass([!self.0[0], !self.0[1], !self.0[2], !self.0[3]])
    }

    /// Smallest member, if any.
    pub fn min_byte(&self) -> Option<u8> {
        for (i, w) in self.0.iter().enumerate() {
            if *w != 0 {
                return Some((i * 64 + w.trailing_zeros() as usize) as u8);
            }
        }
        None
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        (0..=255u8).filter(move |b| self.contains(*b))
    }

    /// Maximal runs of consecutive members as inclusive `(lo, hi)` pairs.
    pub fn ranges(&self) -> Vec<(u8, u8)> {
        let mut out = Vec::new();
        let mut start: Option<u8> = None;
        for b in 0..=255u8 {
            match (self.contains(b), start) {
                (true, None) => start = Some(b),
                (false, Some(s)) => {
                    out.push((s, b - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((s, 255));
        }
        out
    }

    /// Adds the other ASCII case of every letter in the class.
    pub fn case_fold(&self) -> CharClass {
        let mut out = *self;
        for b in self.iter() {
            if b.is_ascii_alphabetic() {
                out.insert(b ^ 0x20);
            }
        }
        out
    }
}

impl fmt::Debug for CharClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CharClass({})", crate::syntax::print::class_to_string(self))
    }
}

impl fmt::Display for CharClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print::class_to_string(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_round_trips() {
        let c = CharClass::from_bytes(*b"abcz");
        assert_eq!(c.complement().complement(), c);
        assert_eq!(c.complement().len(), 252);
        assert!(c.union(&c.complement()).is_full());
        assert!(c.intersect(&c.complement()).is_empty());
    }

    #[test]
    fn ranges_and_min() {
        let c = CharClass::range(b'a', b'c').union(&CharClass::singleton(b'x'));
        assert_eq!(c.ranges(), vec![(b'a', b'c'), (b'x', b'x')]);
        assert_eq!(c.min_byte(), Some(b'a'));
        assert_eq!(CharClass::EMPTY.min_byte(), None);
        assert_eq!(CharClass::FULL.ranges(), vec![(0, 255)]);
        assert_eq!(CharClass::singleton(255).min_byte(), Some(255));
    }

    #[test]
    fn case_folding_only_touches_letters() {
        let c = CharClass::from_bytes(*b"a1Z").case_fold();
        assert_eq!(c, CharClass::from_bytes(*b"aA1zZ"));
    }
}
