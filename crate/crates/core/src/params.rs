//! Size constants shared by builders, provers and verifiers.
//!
//! Logarithms are base 2 and rounded up; square roots are rounded up unless
//! a comparison is stated exactly (the cluster bound `|C| < 4 sqrt(n)` is
//! evaluated as `|C|^2 < 16 n`).

/// `ceil(log2(n))`, with `log2_ceil(1) == 0`.
pub fn log2_ceil(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// Smallest `r` with `r^k >= n`.
pub fn root_ceil(n: usize, k: u32) -> usize {
    let target = n as u128;
    let mut r: usize = libm::pow(n as f64, 1.0 / k as f64) as usize;
    r = r.saturating_sub(1);
    while (r as u128).pow(k) < target {
        r += 1;
    }
    r.max(1)
}

pub fn sqrt_ceil(n: usize) -> usize {
    root_ceil(n, 2)
}

/// Strict cluster bound of the stretch-3 scheme: `size < 4 sqrt(n)`.
pub fn cluster_within_bound(size: usize, n: usize) -> bool {
    (size as u128) * (size as u128) < 16 * n as u128
}

/// Landmark bound `2 * ceil(log2 n) * ceil(sqrt n)`, at least 1.
pub fn landmark_bound(n: usize) -> usize {
    (2 * log2_ceil(n) as usize * sqrt_ceil(n)).max(1)
}

/// Per-node inclusion probability of one landmark sampling round:
/// `min(1, sqrt(n) ln(n) / n)`, and 1 for a single node.
pub fn landmark_probability(n: usize) -> f64 {
    if n <= 1 {
        return 1.0;
    }
    let nf = n as f64;
    (libm::sqrt(nf) * libm::log(nf) / nf).min(1.0)
}

pub const LANDMARK_ROUNDS: u32 = 64;

/// Vicinity ball size `min(n, ceil(factor * ln(n) * sqrt(n)))`, at least 1.
pub fn ball_size(n: usize, factor: f64) -> usize {
    let nf = n as f64;
    let b = libm::ceil(factor * libm::log(nf) * libm::sqrt(nf)) as usize;
    b.clamp(1, n.max(1))
}

pub const DEFAULT_BALL_FACTOR: f64 = 4.0;

/// Number of colors, `ceil(sqrt n)`.
pub fn color_count(n: usize) -> u32 {
    sqrt_ceil(n) as u32
}

/// Balance bound on a color class: `c1 * ceil(log2 n) * ceil(sqrt n)`, at least 1.
pub fn color_class_bound(n: usize, c1: usize) -> usize {
    (c1 * log2_ceil(n) as usize * sqrt_ceil(n)).max(1)
}

pub const DEFAULT_COLOR_BALANCE: usize = 4;

/// Number of fingerprint functions `beta * ceil(log2 n)`, at least `beta`.
pub fn hash_count(n: usize, beta: u32) -> usize {
    beta as usize * log2_ceil(n).max(1) as usize
}

pub const DEFAULT_BETA: u32 = 2;

/// Hierarchical cluster bound on the non-top levels: `size < 4 n^(1/k)`,
/// i.e. `size^k < 4^k n`. Equals [`cluster_within_bound`] for `k = 2`.
pub fn hk_cluster_within_bound(size: usize, n: usize, k: u32) -> bool {
    let lhs = (size as u128).checked_pow(k);
    match lhs {
        Some(l) => l < 4u128.pow(k) * n as u128,
        None => false,
    }
}

/// Bound on the top level `L_{k-1}`: `2 * ceil(log2 n) * ceil(n^(1/k))`.
pub fn hk_top_bound(n: usize, k: u32) -> usize {
    (2 * log2_ceil(n) as usize * root_ceil(n, k)).max(1)
}

/// Bound on the non-top part of a hierarchical bunch:
/// `4 * k * ceil(log2 n) * ceil(n^(1/k))`.
pub fn hk_bunch_bound(n: usize, k: u32) -> usize {
    (4 * k as usize * log2_ceil(n).max(1) as usize * root_ceil(n, k)).max(1)
}
