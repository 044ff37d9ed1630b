//! Exact binomials and the combinatorial number system for ranking subsets.

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `ceil(log2 x)` for `x >= 1`.
pub fn ceil_log2_big(x: &BigUint) -> u64 {
    assert!(!x.is_zero(), "ceil_log2 of zero");
    if x.is_one() {
        0
    } else {
        (x - 1u32).bits()
    }
}

/// Bits needed to name one `k`-subset of `[n]`: `ceil(log2 C(n, k))`.
pub fn subset_code_bits(n: u64, k: u64) -> u64 {
    let c = binomial(n, k);
    if c.is_zero() {
        0
    } else {
        ceil_log2_big(&c)
    }
}

/// Lexicographic rank of a strictly increasing subset of `[n]` among all
/// subsets of the same size.
pub fn rank_subset(n: u64, subset: &[u64]) -> BigUint {
    let k = subset.len() as u64;
    debug_assert!(subset.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(subset.last().is_none_or(|&x| x < n));
    let mut rank = BigUint::zero();
    let mut start = 0;
    for (i, &c) in subset.iter().enumerate() {
        let remaining = k - i as u64 - 1;
        for skipped in start..c {
            rank += binomial(n - skipped - 1, remaining);
        }
        start = c + 1;
    }
    rank
}

/// Inverse of [`rank_subset`].
pub fn unrank_subset(n: u64, k: u64, rank: &BigUint) -> Vec<u64> {
    let mut rank = rank.clone();
    let mut out = Vec::with_capacity(k as usize);
    let mut c = 0;
    for i in 0..k {
        let remaining = k - i - 1;
        loop {
            let block = binomial(n - c - 1, remaining);
            if rank < block {
                out.push(c);
                c += 1;
                break;
            }
            rank -= block;
            c += 1;
        }
    }
    out
}
