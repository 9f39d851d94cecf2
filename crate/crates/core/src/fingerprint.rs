//! Bit strings, the directory encoding, and random parity fingerprints.
//!
//! A directory is encoded as its triples sorted by node id, each as a
//! 64-bit node id, a 64-bit landmark id and a 32-bit port, all big-endian,
//! concatenated most significant bit first. A fingerprint function is an
//! `r`-bit vector `f`; its value on an encoding `D` of at most `r` bits is
//! the parity of `f AND D` (`D` zero-padded to `r` bits).

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ni::DirTriple;

/// Bits per encoded directory triple.
pub const TRIPLE_BITS: usize = 64 + 64 + 32;

/// A bit sequence; bit `i` is bit `63 - i % 64` of word `i / 64`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        BitString::default()
    }

    pub fn zeros(len: usize) -> Self {
        BitString { words: alloc::vec![0; len.div_ceil(64)], len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index out of range");
        (self.words[i / 64] >> (63 - i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index out of range");
        let mask = 1u64 << (63 - i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, width: u32) {
        for k in (0..width).rev() {
            let bit = (value >> k) & 1 == 1;
            if self.len % 64 == 0 {
                self.words.push(0);
            }
            self.len += 1;
            if bit {
                self.set(self.len - 1, true);
            }
        }
    }

    /// Bytes in bit order, the last byte zero-padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8);
        self.words
            .iter()
            .flat_map(|w| w.to_be_bytes())
            .take(nbytes)
            .collect()
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Option<Self> {
        if len > bytes.len() * 8 {
            return None;
        }
        let mut s = BitString::zeros(len);
        for i in 0..len {
            if (bytes[i / 8] >> (7 - i % 8)) & 1 == 1 {
                s.set(i, true);
            }
        }
        Some(s)
    }

    /// Parity of the bitwise AND over the common prefix.
    pub fn and_parity(&self, other: &BitString) -> bool {
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }
}

/// Canonical encoding of a directory: triples sorted by node id.
pub fn encode_directory(triples: &[DirTriple]) -> BitString {
    let mut sorted: Vec<&DirTriple> = triples.iter().collect();
    sorted.sort_by_key(|t| t.node);
    let mut out = BitString::new();
    for t in sorted {
        out.push_bits(t.node.0, 64);
        out.push_bits(t.landmark.0, 64);
        out.push_bits(t.port.0 as u64, 32);
    }
    out
}

/// `k` functions over sequences of at most `r` bits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HashFamily {
    pub r: usize,
    pub functions: Vec<BitString>,
}

impl HashFamily {
    /// Draws every bit independently and uniformly from `seed`.
    pub fn draw(k: usize, r: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let functions = (0..k)
            .map(|_| {
                let mut f = BitString::zeros(r);
                for w in f.words.iter_mut() {
                    *w = rng.gen();
                }
                if r % 64 != 0 {
                    if let Some(last) = f.words.last_mut() {
                        *last &= !0u64 << (64 - r % 64);
                    }
                }
                f
            })
            .collect();
        HashFamily { r, functions }
    }

    pub fn k(&self) -> usize {
        self.functions.len()
    }

    /// `f_i(d)`, or `None` when `d` is longer than `r` bits.
    pub fn eval(&self, i: usize, d: &BitString) -> Option<bool> {
        if d.len() > self.r {
            return None;
        }
        Some(self.functions[i].and_parity(d))
    }

    pub fn eval_all(&self, d: &BitString) -> Option<Vec<bool>> {
        (0..self.k()).map(|i| self.eval(i, d)).collect()
    }

    /// Well-formed: every function has exactly `r` bits.
    pub fn is_well_formed(&self) -> bool {
        self.functions.iter().all(|f| f.len() == self.r)
    }

    pub fn bits(&self) -> usize {
        self.k() * self.r
    }
}

/// `F[i][c] = f_i(Dir_c)` for functions `i` and colors `c = 1..=colors`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FMatrix {
    pub k: usize,
    pub colors: u32,
    /// Row-major, `k * colors` entries.
    pub values: Vec<bool>,
}

impl FMatrix {
    /// # Panics
    /// If an encoding is longer than the family accepts.
    pub fn compute(family: &HashFamily, encodings: &[BitString]) -> Self {
        let colors = encodings.len() as u32;
        let mut values = Vec::with_capacity(family.k() * encodings.len());
        for i in 0..family.k() {
            for d in encodings {
                values.push(family.eval(i, d).expect("encoding fits the family"));
            }
        }
        FMatrix { k: family.k(), colors, values }
    }

    /// Entry for function `i` (0-based) and color `c` (1-based).
    pub fn get(&self, i: usize, c: u32) -> Option<bool> {
        if i >= self.k || c == 0 || c > self.colors {
            return None;
        }
        self.values.get(i * self.colors as usize + (c as usize - 1)).copied()
    }

    pub fn is_well_formed(&self) -> bool {
        self.values.len() == self.k * self.colors as usize
    }

    pub fn bits(&self) -> usize {
        self.values.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{NodeId, Port};

    #[test]
    fn push_and_read_back() {
        let mut s = BitString::new();
        s.push_bits(0b101, 3);
        s.push_bits(u64::MAX, 64);
        assert_eq!(s.len(), 67);
        assert!(s.get(0) && !s.get(1) && s.get(2) && s.get(66));
        assert_eq!(BitString::from_bytes(&s.to_bytes(), 67).unwrap(), s);
    }

    #[test]
    fn triple_layout_is_big_endian() {
        let d = encode_directory(&[DirTriple { node: NodeId(1), landmark: NodeId(2), port: Port(3) }]);
        assert_eq!(d.len(), TRIPLE_BITS);
        let bytes = d.to_bytes();
        assert_eq!(bytes.len(), 20);
        assert_eq!(&bytes[..8], &1u64.to_be_bytes());
        assert_eq!(&bytes[8..16], &2u64.to_be_bytes());
        assert_eq!(&bytes[16..], &3u32.to_be_bytes());
    }

    #[test]
    fn empty_directory_hashes_to_zero() {
        let fam = HashFamily::draw(6, 320, 9);
        assert_eq!(fam.eval_all(&BitString::new()), Some(alloc::vec![false; 6]));
    }

    #[test]
    fn overlong_input_is_refused() {
        let fam = HashFamily::draw(2, 100, 1);
        assert_eq!(fam.eval(0, &BitString::zeros(101)), None);
        assert!(fam.is_well_formed());
        assert_eq!(fam.functions[0].words().len(), 2);
    }

    #[test]
    fn matrix_layout() {
        let fam = HashFamily::draw(3, 160, 4);
        let encs = [BitString::new(), BitString::zeros(160)];
        let m = FMatrix::compute(&fam, &encs);
        assert_eq!(m.values.len(), 6);
        assert_eq!(m.get(2, 2), Some(false));
        assert_eq!(m.get(0, 3), None);
    }
}
