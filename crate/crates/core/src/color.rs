//! Multiply-shift hashing of identities onto colors `1..=colors`.

use rand::Rng;

use crate::graph::NodeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ColorHash {
    /// Odd multiplier.
    pub a: u64,
    pub b: u64,
    pub colors: u32,
}

impl ColorHash {
    pub fn new(a: u64, b: u64, colors: u32) -> Self {
        ColorHash { a: a | 1, b, colors: colors.max(1) }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, colors: u32) -> Self {
        let a = rng.gen::<u64>();
        let b = rng.gen::<u64>();
        ColorHash::new(a, b, colors)
    }

    /// `floor(((a*id + b) mod 2^64) * colors / 2^64) + 1`.
    pub fn color(&self, id: NodeId) -> u32 {
        let h = self.a.wrapping_mul(id.0).wrapping_add(self.b);
        (((h as u128) * (self.colors as u128)) >> 64) as u32 + 1
    }

    pub const BITS: usize = 64 + 64 + 32;
}
