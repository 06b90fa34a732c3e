//! Segmented sieve of Eratosthenes with an odd-only bitmap.
//!
//! Segments are independent once the base primes (everything up to √limit)
//! are known, so arbitrary ranges can be sieved in parallel. A trial-division
//! predicate is kept alongside as the test oracle.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Deterministic primality by trial division. The test oracle for the whole
/// crate; never used on the hot path.
pub fn trial_division_is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 || n % 3 == 0 {
        return false;
    }
    let mut d = 5u64;
    while d * d <= n {
        if n % d == 0 || n % (d + 2) == 0 {
            return false;
        }
        d += 6;
    }
    true
}

/// Integer square root, exact for all u64.
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).map_or(true, |v| v > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).map_or(false, |v| v <= n) {
        x += 1;
    }
    x
}

/// All primes ≤ `limit` by a plain (non-segmented) sieve. Intended for the
/// base primes up to √limit, which fit comfortably in memory.
pub fn base_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = vec![2u64];
    let mut i = 3usize;
    while i * i <= limit {
        if !composite[i] {
            let mut m = i * i;
            while m <= limit {
                composite[m] = true;
                m += 2 * i;
            }
        }
        i += 2;
    }
    let mut p = 3usize;
    while p <= limit {
        if !composite[p] {
            primes.push(p as u64);
        }
        p += 2;
    }
    primes
}

/// Primality indicators for the half-open range `[lo, hi)`.
///
/// Only odd numbers are stored; 2 is special-cased. Bit `j` of the bitmap
/// covers the number `first_odd + 2j`.
#[derive(Debug, Clone)]
pub struct PrimalitySegment {
    pub lo: u64,
    pub hi: u64,
    pub prime_count: u64,
    first_odd: u64,
    bits: Vec<u64>,
}

impl PrimalitySegment {
    /// True iff `n` is prime. `n` must lie in `[lo, hi)`.
    pub fn is_prime(&self, n: u64) -> bool {
        debug_assert!(n >= self.lo && n < self.hi);
        if n == 2 {
            return true;
        }
        if n % 2 == 0 {
            return false;
        }
        let j = ((n - self.first_odd) / 2) as usize;
        (self.bits[j >> 6] >> (j & 63)) & 1 == 1
    }

    pub(crate) fn first_odd(&self) -> u64 {
        self.first_odd
    }

    pub(crate) fn bit(&self, odd_index: usize) -> bool {
        (self.bits[odd_index >> 6] >> (odd_index & 63)) & 1 == 1
    }

    /// Iterate the primes of the segment in ascending order.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        let two = if self.lo <= 2 && self.hi > 2 {
            Some(2u64)
        } else {
            None
        };
        let slots = self.odd_slots();
        two.into_iter()
            .chain((0..slots).filter(|&j| self.bit(j)).map(move |j| self.first_odd + 2 * j as u64))
    }

    fn odd_slots(&self) -> usize {
        if self.first_odd >= self.hi {
            0
        } else {
            ((self.hi - self.first_odd + 1) / 2) as usize
        }
    }
}

/// Sieve the half-open range `[lo, hi)` given every base prime ≤ √(hi−1).
///
/// Errors with a contract violation when the base primes do not reach far
/// enough to certify the range.
pub fn sieve_segment(lo: u64, hi: u64, base_primes: &[u64]) -> Result<PrimalitySegment> {
    if lo < 2 || lo >= hi {
        return Err(Error::Contract(format!(
            "sieve_segment requires 2 <= lo < hi, got [{lo}, {hi})"
        )));
    }
    let need = isqrt(hi - 1);
    let covered = base_primes.last().copied().unwrap_or(1);
    if covered < need && has_prime_in(covered + 1, need) {
        return Err(Error::Contract(format!(
            "base primes reach {covered} but a prime <= {need} is required for [{lo}, {hi})"
        )));
    }

    let first_odd = lo | 1;
    let slots = if first_odd >= hi {
        0
    } else {
        ((hi - first_odd + 1) / 2) as usize
    };
    let mut bits = vec![u64::MAX; slots.div_ceil(64)];
    // Mask off the tail bits so popcounts stay exact.
    if slots % 64 != 0 {
        if let Some(last) = bits.last_mut() {
            *last = (1u64 << (slots % 64)) - 1;
        }
    }

    for &p in base_primes {
        if p == 2 {
            continue;
        }
        if p.saturating_mul(p) >= hi {
            break;
        }
        // First odd multiple of p in the range, not below p².
        let mut m = p * p;
        if m < first_odd {
            m = first_odd.div_ceil(p) * p;
            if m % 2 == 0 {
                m += p;
            }
        }
        while m < hi {
            let j = ((m - first_odd) / 2) as usize;
            bits[j >> 6] &= !(1u64 << (j & 63));
            m += 2 * p;
        }
    }

    let mut prime_count: u64 = bits.iter().map(|w| w.count_ones() as u64).sum();
    if lo <= 2 && hi > 2 {
        prime_count += 1;
    }
    Ok(PrimalitySegment {
        lo,
        hi,
        prime_count,
        first_odd,
        bits,
    })
}

fn has_prime_in(a: u64, b: u64) -> bool {
    (a..=b).any(trial_division_is_prime)
}

/// How a sieve run over `[2, limit]` is split into segments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SievePlan {
    pub limit: u64,
    pub segment_size: u64,
    pub segments: Vec<(u64, u64)>,
}

impl SievePlan {
    /// Contiguous segments covering `[2, limit]`; the last one may be short.
    pub fn new(limit: u64, segment_size: u64) -> Result<Self> {
        if segment_size == 0 {
            return Err(Error::Contract("segment_size must be > 0".into()));
        }
        let mut segments = Vec::new();
        let mut lo = 2u64;
        while lo <= limit {
            let hi = (lo + segment_size).min(limit + 1);
            segments.push((lo, hi));
            lo = hi;
        }
        Ok(SievePlan {
            limit,
            segment_size,
            segments,
        })
    }
}

/// π(limit), computed by summing per-segment prime counts in parallel.
pub fn prime_count(limit: u64) -> u64 {
    prime_count_with_segment_size(limit, 1 << 22)
}

pub fn prime_count_with_segment_size(limit: u64, segment_size: u64) -> u64 {
    if limit < 2 {
        return 0;
    }
    let base = base_primes(isqrt(limit));
    let plan = SievePlan::new(limit, segment_size).expect("segment_size > 0");
    plan.segments
        .par_iter()
        .map(|&(lo, hi)| {
            sieve_segment(lo, hi, &base)
                .expect("base primes cover the plan")
                .prime_count
        })
        .sum()
}

/// Parity of π at each segment entry: entry `k` is the parity of the total
/// prime count of segments `0..k`, i.e. π(lo_k − 1) mod 2. Entry 0 is 0.
pub fn segment_parity_prefix(plan: &SievePlan, per_segment_counts: &[u64]) -> Result<Vec<u8>> {
    if plan.segments.len() != per_segment_counts.len() {
        return Err(Error::Contract(format!(
            "{} segments but {} counts",
            plan.segments.len(),
            per_segment_counts.len()
        )));
    }
    let mut parities = Vec::with_capacity(per_segment_counts.len());
    let mut parity = 0u8;
    for &c in per_segment_counts {
        parities.push(parity);
        parity ^= (c & 1) as u8;
    }
    Ok(parities)
}
