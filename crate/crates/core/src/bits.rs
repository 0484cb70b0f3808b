//! Growable GF(2) bit vectors packed into `u64` words.

use std::fmt;

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn new() -> Self {
        BitSet { words: Vec::new() }
    }

    pub fn singleton(i: usize) -> Self {
        let mut s = BitSet::new();
        s.toggle(i);
        s
    }

    pub fn from_words(words: Vec<u64>) -> Self {
        let mut s = BitSet { words };
        s.trim();
        s
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn get(&self, i: usize) -> bool {
        self.words.get(i / 64).is_some_and(|w| (w >> (i % 64)) & 1 == 1)
    }

    pub fn toggle(&mut self, i: usize) {
        if self.words.len() <= i / 64 {
            self.words.resize(i / 64 + 1, 0);
        }
        self.words[i / 64] ^= 1 << (i % 64);
        self.trim();
    }

    pub fn set(&mut self, i: usize, v: bool) {
        if self.get(i) != v {
            self.toggle(i);
        }
    }

    pub fn xor_with(&mut self, other: &BitSet) {
        if self.words.len() < other.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (d, s) in self.words.iter_mut().zip(&other.words) {
            *d ^= s;
        }
        self.trim();
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn first(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let b = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(wi * 64 + b)
            })
        })
    }
}

impl FromIterator<usize> for BitSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = BitSet::new();
        for i in iter {
            s.toggle(i);
        }
        s
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_and_iterate() {
        let mut a: BitSet = [1, 70, 3].into_iter().collect();
        let b: BitSet = [70, 5].into_iter().collect();
        a.xor_with(&b);
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![1, 3, 5]);
        assert_eq!(a.words().len(), 1);
        assert_eq!(a.first(), Some(1));
        assert!(BitSet::singleton(200).get(200));
        let mut c = BitSet::singleton(9);
        c.toggle(9);
        assert!(c.is_empty());
        assert_eq!(c, BitSet::new());
    }
}
