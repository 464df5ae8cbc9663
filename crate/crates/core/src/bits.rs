//! Packed fixed-length bit strings.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// A point of `{0,1}^len`, stored little-endian in 64-bit words.
///
/// Position 0 is the leftmost character of the textual form. Bits beyond
/// `len` in the last word are kept at zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = BitString {
            words: vec![u64::MAX; len.div_ceil(64)],
            len,
        };
        b.clear_padding();
        b
    }

    fn clear_padding(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_all_ones(&self) -> bool {
        self.count_ones() == self.len
    }

    /// Exchanges positions `cut..len` between `self` and `other`.
    pub fn swap_suffix(&mut self, other: &mut BitString, cut: usize) {
        assert_eq!(self.len, other.len);
        assert!(cut <= self.len);
        let first = cut / 64;
        let offset = cut % 64;
        if first < self.words.len() {
            let mask = u64::MAX << offset;
            let (a, b) = (self.words[first], other.words[first]);
            self.words[first] = (a & !mask) | (b & mask);
            other.words[first] = (b & !mask) | (a & mask);
            for w in first + 1..self.words.len() {
                std::mem::swap(&mut self.words[w], &mut other.words[w]);
            }
        }
    }

    /// Genotype index reading the textual form as a binary numeral, position 0
    /// being the most significant digit.
    pub fn to_index(&self) -> u64 {
        assert!(self.len <= 64);
        (0..self.len).fold(0u64, |acc, i| (acc << 1) | self.get(i) as u64)
    }

    pub fn from_index(index: u64, len: usize) -> Self {
        assert!(len <= 64);
        let mut b = BitString::zeros(len);
        for i in 0..len {
            if (index >> (len - 1 - i)) & 1 == 1 {
                b.set(i, true);
            }
        }
        b
    }

    /// Number of positions where the two strings differ.
    pub fn hamming(&self, other: &BitString) -> usize {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut b = BitString::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => b.set(i, true),
                other => {
                    return Err(Error::Parse(format!(
                        "invalid character {other:?} in bit string {s:?}"
                    )))
                }
            }
        }
        Ok(b)
    }
}
