//! Bounded sets of word lengths, stored as bit vectors.
//!
//! In a unary language a word is determined by its length, so bounded
//! language fragments are just sets of naturals up to a cap. The shifted-or
//! operation is the workhorse of the grammar length oracle: the lengths
//! derivable from `B C` are the sumset of the lengths of `B` and `C`.

/// A set of naturals `{0, ..., max}` backed by a bit vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LengthSet {
    max: usize,
    words: Vec<u64>,
}

impl LengthSet {
    /// The empty set over the universe `{0, ..., max}`.
    pub fn empty(max: usize) -> Self {
        LengthSet {
            max,
            words: vec![0; max / 64 + 1],
        }
    }

    /// Builds a set from a membership predicate evaluated on `0..=max`.
    pub fn from_fn(max: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut s = LengthSet::empty(max);
        for n in 0..=max {
            if f(n) {
                s.insert(n);
            }
        }
        s
    }

    /// Largest length this set can hold.
    pub fn max(&self) -> usize {
        self.max
    }

    pub fn insert(&mut self, n: usize) {
        assert!(n <= self.max, "length {n} beyond set bound {}", self.max);
        self.words[n / 64] |= 1 << (n % 64);
    }

    pub fn contains(&self, n: usize) -> bool {
        assert!(n <= self.max, "length {n} beyond set bound {}", self.max);
        self.words[n / 64] >> (n % 64) & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `self |= other` (universes must agree).
    pub fn union_with(&mut self, other: &LengthSet) {
        assert_eq!(self.max, other.max);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// `self |= other << shift`, truncated to the universe. Returns whether
    /// any new bit was set.
    pub fn or_shifted(&mut self, other: &LengthSet, shift: usize) -> bool {
        if shift > self.max {
            return false;
        }
        let (wshift, bshift) = (shift / 64, shift % 64);
        let mut changed = false;
        for i in (0..self.words.len() - wshift).rev() {
            let mut w = other.words.get(i).copied().unwrap_or(0) << bshift;
            if bshift > 0 && i > 0 {
                w |= other.words.get(i - 1).copied().unwrap_or(0) >> (64 - bshift);
            }
            let dst = &mut self.words[i + wshift];
            if *dst | w != *dst {
                changed = true;
                *dst |= w;
            }
        }
        if changed {
            self.trim();
        }
        changed
    }

    /// Iterates the members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..=self.max).filter(move |&n| self.contains(n))
    }

    /// Least member `>= n`, if any.
    pub fn first_at_least(&self, n: usize) -> Option<usize> {
        (n..=self.max).find(|&m| self.contains(m))
    }

    // Clear bits beyond `max` that shifting may have smeared into the top word.
    fn trim(&mut self) {
        let top = self.max % 64;
        if top < 63 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << (top + 1)) - 1;
        }
    }
}
