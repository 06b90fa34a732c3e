//! The prime-driven ladder walk.
//!
//! Heights start at (1, 0) and move by ±1; the direction flips immediately
//! after every prime, so y(n+1) − y(n) = (−1)^π(n). Zeroes (and crossings of
//! any tracked level) are enumerated either by a sequential segment-by-segment
//! walk or by a two-phase parallel walk whose output is bit-identical.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sieve::{
    base_primes, isqrt, sieve_segment, trial_division_is_prime, PrimalitySegment, SievePlan,
};
use crate::stats::BalanceAccumulator;

/// Default numbers per sieve segment (~6 MiB of odd-only bitmap).
pub const DEFAULT_SEGMENT_SIZE: u64 = 100_000_000;

/// Resumable walk cursor.
///
/// `parity` is π(n − 1) mod 2 for the current position n: the primality of
/// the current position has not yet been consumed. Stepping XORs it in, so
/// the move from n to n + 1 has direction (−1)^π(n).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkerState {
    pub n: u64,
    pub y: i64,
    pub parity: u8,
    /// Tracked level → crossings seen so far. Only levels present as keys
    /// are counted by `step`.
    pub crossing_counts: BTreeMap<i64, u64>,
}

/// The walk's origin: (1, 0) with no primes consumed and no tracked levels.
pub fn initial_state() -> WalkerState {
    WalkerState {
        n: 1,
        y: 0,
        parity: 0,
        crossing_counts: BTreeMap::new(),
    }
}

impl WalkerState {
    /// Origin state tracking the given levels. The starting point (1, 0)
    /// counts as a crossing of level 0.
    pub fn with_levels(levels: &[i64]) -> WalkerState {
        let mut state = initial_state();
        for &l in levels {
            state.crossing_counts.insert(l, 0);
        }
        if let Some(c) = state.crossing_counts.get_mut(&0) {
            *c = 1;
        }
        state
    }

    /// Advance one position. `current_is_prime` must be the primality of the
    /// current position `n`.
    pub fn step(&mut self, current_is_prime: bool) {
        self.parity ^= current_is_prime as u8;
        self.y += if self.parity == 0 { 1 } else { -1 };
        self.n += 1;
        if let Some(c) = self.crossing_counts.get_mut(&self.y) {
            *c += 1;
        }
    }
}

/// All positions where the walk attains a fixed level, in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingRecord {
    pub level: i64,
    pub positions: Vec<u64>,
}

/// What a segment does to the walk, relative to an entry with parity 0 and
/// height 0. Flipping the entry parity negates the displacement and
/// swap-negates the extrema.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentSummary {
    pub lo: u64,
    pub hi: u64,
    pub prime_count: u64,
    pub displacement: i64,
    pub min_rel: i64,
    pub max_rel: i64,
}

impl SegmentSummary {
    /// (displacement, min_rel, max_rel) for the given entry parity.
    pub fn adjusted(&self, entry_parity: u8) -> (i64, i64, i64) {
        if entry_parity == 0 {
            (self.displacement, self.min_rel, self.max_rel)
        } else {
            (-self.displacement, -self.max_rel, -self.min_rel)
        }
    }
}

/// Walk a sieved segment from its entry state.
///
/// Applies `step` for every n in `[lo, hi)`; returns the exit state, the
/// crossings of each tracked level at positions in `(lo, hi]`, and the
/// segment summary normalized to entry parity 0.
pub fn walk_segment(
    entry: &WalkerState,
    seg: &PrimalitySegment,
    tracked_levels: &[i64],
) -> Result<(WalkerState, Vec<Vec<u64>>, SegmentSummary)> {
    walk_segment_with(entry, seg, tracked_levels, None)
}

pub(crate) fn walk_segment_with(
    entry: &WalkerState,
    seg: &PrimalitySegment,
    tracked_levels: &[i64],
    mut balance: Option<&mut BalanceAccumulator>,
) -> Result<(WalkerState, Vec<Vec<u64>>, SegmentSummary)> {
    if entry.n != seg.lo {
        return Err(Error::Contract(format!(
            "entry position {} does not match segment start {}",
            entry.n, seg.lo
        )));
    }
    let mut y = entry.y;
    let mut parity = entry.parity;
    let mut crossings: Vec<Vec<u64>> = vec![Vec::new(); tracked_levels.len()];
    let mut min_y = i64::MAX;
    let mut max_y = i64::MIN;

    let first_odd = seg.first_odd();
    let mut odd_index = 0usize;
    let mut is_odd = seg.lo & 1 == 1;
    debug_assert!(seg.lo % 2 == 1 || first_odd == seg.lo + 1 || seg.lo == 2);
    for n in seg.lo..seg.hi {
        let is_prime = if is_odd {
            let b = seg.bit(odd_index);
            odd_index += 1;
            b
        } else {
            n == 2
        };
        is_odd = !is_odd;
        parity ^= is_prime as u8;
        y += if parity == 0 { 1 } else { -1 };
        min_y = min_y.min(y);
        max_y = max_y.max(y);
        let pos = n + 1;
        for (slot, &level) in tracked_levels.iter().enumerate() {
            if y == level {
                crossings[slot].push(pos);
            }
        }
        if let Some(acc) = balance.as_deref_mut() {
            acc.push(pos, y)?;
        }
    }

    let mut exit = WalkerState {
        n: seg.hi,
        y,
        parity,
        crossing_counts: entry.crossing_counts.clone(),
    };
    for (slot, &level) in tracked_levels.iter().enumerate() {
        if let Some(c) = exit.crossing_counts.get_mut(&level) {
            *c += crossings[slot].len() as u64;
        }
    }

    // Normalize the summary to an assumed entry of (height 0, parity 0).
    let displacement = y - entry.y;
    let (min_rel, max_rel) = (min_y - entry.y, max_y - entry.y);
    let summary = if entry.parity == 0 {
        SegmentSummary {
            lo: seg.lo,
            hi: seg.hi,
            prime_count: seg.prime_count,
            displacement,
            min_rel,
            max_rel,
        }
    } else {
        SegmentSummary {
            lo: seg.lo,
            hi: seg.hi,
            prime_count: seg.prime_count,
            displacement: -displacement,
            min_rel: -max_rel,
            max_rel: -min_rel,
        }
    };
    Ok((exit, crossings, summary))
}

/// Relative walk of a segment under an assumed entry of parity 0, height 0.
/// Phase 1 of the parallel walk.
pub(crate) fn segment_summary(seg: &PrimalitySegment) -> SegmentSummary {
    let mut y = 0i64;
    let mut parity = 0u8;
    let mut min_y = i64::MAX;
    let mut max_y = i64::MIN;
    let mut odd_index = 0usize;
    let mut is_odd = seg.lo & 1 == 1;
    for n in seg.lo..seg.hi {
        let is_prime = if is_odd {
            let b = seg.bit(odd_index);
            odd_index += 1;
            b
        } else {
            n == 2
        };
        is_odd = !is_odd;
        parity ^= is_prime as u8;
        y += if parity == 0 { 1 } else { -1 };
        min_y = min_y.min(y);
        max_y = max_y.max(y);
    }
    SegmentSummary {
        lo: seg.lo,
        hi: seg.hi,
        prime_count: seg.prime_count,
        displacement: y,
        min_rel: min_y,
        max_rel: max_y,
    }
}

/// Configuration shared by the sequential and parallel walk drivers.
#[derive(Debug, Clone)]
pub struct WalkConfig {
    pub limit: u64,
    pub levels: Vec<i64>,
    pub segment_size: u64,
    pub workers: usize,
    pub collect_balance: bool,
    /// Only x ≡ 0 (mod decimation) enter the slope regression sums.
    pub slope_decimation: u64,
}

impl WalkConfig {
    pub fn new(limit: u64) -> Self {
        WalkConfig {
            limit,
            levels: vec![0],
            segment_size: DEFAULT_SEGMENT_SIZE,
            workers: 1,
            collect_balance: false,
            slope_decimation: 1,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.limit < 1 {
            return Err(Error::Contract("limit must be >= 1".into()));
        }
        if self.levels.is_empty() {
            return Err(Error::Contract("at least one tracked level is required".into()));
        }
        if self.segment_size == 0 {
            return Err(Error::Contract("segment_size must be > 0".into()));
        }
        if self.workers == 0 {
            return Err(Error::Contract("workers must be >= 1".into()));
        }
        Ok(())
    }
}

/// Result of walking `[1, limit]`.
#[derive(Debug, Clone)]
pub struct WalkOutput {
    pub records: Vec<CrossingRecord>,
    pub final_state: WalkerState,
    /// π(limit).
    pub pi_limit: u64,
    pub balance: Option<BalanceAccumulator>,
}

/// Set up the origin and the synthetic prefix over positions 1 and 2, which
/// precede the sieved segments. Returns the state at n = min(2, limit).
pub(crate) fn walk_prefix(
    cfg: &WalkConfig,
    records: &mut [Vec<u64>],
    balance: Option<&mut BalanceAccumulator>,
) -> WalkerState {
    let mut state = WalkerState::with_levels(&cfg.levels);
    for (slot, &level) in cfg.levels.iter().enumerate() {
        if level == 0 {
            records[slot].push(1);
        }
    }
    if let Some(acc) = balance {
        acc.push(1, 0).expect("fresh accumulator");
        if cfg.limit >= 2 {
            acc.push(2, 1).expect("unit step");
        }
    }
    if cfg.limit >= 2 {
        state.step(false); // 1 is not prime
        for (slot, &level) in cfg.levels.iter().enumerate() {
            if level == 1 {
                records[slot].push(2);
            }
        }
    }
    state
}

/// The sieve plan for a walk to `limit`: stepping from position n needs the
/// primality of n, so segments cover [2, limit − 1].
pub(crate) fn walk_plan(cfg: &WalkConfig) -> Result<SievePlan> {
    SievePlan::new(cfg.limit.saturating_sub(1), cfg.segment_size)
}

fn finish_output(
    cfg: &WalkConfig,
    records: Vec<Vec<u64>>,
    final_state: WalkerState,
    primes_below_limit: u64,
    balance: Option<BalanceAccumulator>,
) -> WalkOutput {
    let pi_limit = primes_below_limit + trial_division_is_prime(cfg.limit) as u64;
    WalkOutput {
        records: cfg
            .levels
            .iter()
            .zip(records)
            .map(|(&level, positions)| CrossingRecord { level, positions })
            .collect(),
        final_state,
        pi_limit,
        balance,
    }
}

/// Sequential reference walk over sieved segments.
pub fn walk(cfg: &WalkConfig) -> Result<WalkOutput> {
    cfg.validate()?;
    let mut records: Vec<Vec<u64>> = vec![Vec::new(); cfg.levels.len()];
    let mut balance = cfg
        .collect_balance
        .then(|| BalanceAccumulator::with_decimation(cfg.slope_decimation));
    let mut state = walk_prefix(cfg, &mut records, balance.as_mut());

    let plan = walk_plan(cfg)?;
    let base = base_primes(isqrt(cfg.limit.saturating_sub(1)));
    let mut primes_below = 0u64;
    for &(lo, hi) in &plan.segments {
        let seg = sieve_segment(lo, hi, &base)?;
        primes_below += seg.prime_count;
        let (exit, crossings, _) = walk_segment_with(&state, &seg, &cfg.levels, balance.as_mut())?;
        for (slot, mut found) in crossings.into_iter().enumerate() {
            records[slot].append(&mut found);
        }
        state = exit;
    }
    Ok(finish_output(cfg, records, state, primes_below, balance))
}

/// Per-segment phase-2 result, kept in segment order.
struct SegmentResult {
    crossings: Vec<Vec<u64>>,
    balance: Option<BalanceAccumulator>,
}

/// Two-phase parallel walk with output bit-identical to [`walk`].
///
/// Phase 1 sieves every segment in parallel and records its summary under an
/// assumed entry parity of 0. A sequential prefix pass then assigns true
/// entry heights and parities, and phase 2 re-walks — again in parallel —
/// only the segments whose adjusted height interval touches a tracked level
/// (all segments when the balance accumulator is requested, since it needs
/// every point).
pub fn parallel_walk(cfg: &WalkConfig) -> Result<WalkOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Contract(format!("thread pool: {e}")))?;

    let mut records: Vec<Vec<u64>> = vec![Vec::new(); cfg.levels.len()];
    let mut balance = cfg
        .collect_balance
        .then(|| BalanceAccumulator::with_decimation(cfg.slope_decimation));
    let entry = walk_prefix(cfg, &mut records, balance.as_mut());

    let plan = walk_plan(cfg)?;
    let base = base_primes(isqrt(cfg.limit.saturating_sub(1)));

    let (exit, per_segment, primes_below) =
        pool.install(|| parallel_segments(cfg, &entry, &plan.segments, &base))?;

    let mut state = exit;
    for result in per_segment {
        for (slot, mut found) in result.crossings.into_iter().enumerate() {
            records[slot].append(&mut found);
        }
        if let (Some(total), Some(part)) = (balance.as_mut(), result.balance) {
            total.merge(&part)?;
        }
    }
    // step() never saw the per-segment crossings; rebuild the counters.
    for (slot, &level) in cfg.levels.iter().enumerate() {
        state
            .crossing_counts
            .insert(level, records[slot].len() as u64);
    }
    Ok(finish_output(cfg, records, state, primes_below, balance))
}

/// Walk a run of consecutive segments with the two-phase scheme. Must be
/// called inside the worker pool. Returns the exit state (crossing counts
/// NOT updated), per-segment results in order, and the total prime count.
fn parallel_segments(
    cfg: &WalkConfig,
    entry: &WalkerState,
    segments: &[(u64, u64)],
    base: &[u64],
) -> Result<(WalkerState, Vec<SegmentResult>, u64)> {
    if segments.is_empty() {
        return Ok((entry.clone(), Vec::new(), 0));
    }
    debug_assert_eq!(entry.n, segments[0].0);

    // Phase 1: independent sieve + relative summary per segment.
    let summaries: Vec<SegmentSummary> = segments
        .par_iter()
        .map(|&(lo, hi)| sieve_segment(lo, hi, base).map(|seg| segment_summary(&seg)))
        .collect::<Result<_>>()?;

    // Sequential prefix pass: true entry height and parity per segment.
    let mut entries = Vec::with_capacity(summaries.len());
    let mut y = entry.y;
    let mut parity = entry.parity;
    let mut primes_below = 0u64;
    for s in &summaries {
        entries.push((y, parity));
        let (disp, _, _) = s.adjusted(parity);
        y += disp;
        parity ^= (s.prime_count & 1) as u8;
        primes_below += s.prime_count;
    }
    let exit = WalkerState {
        n: segments.last().unwrap().1,
        y,
        parity,
        crossing_counts: entry.crossing_counts.clone(),
    };

    // Phase 2: re-walk only segments that can touch a tracked level. A ±1
    // walk visits every height between its extrema, so the interval test is
    // exact, not conservative.
    let selected: Vec<usize> = (0..summaries.len())
        .filter(|&i| {
            if cfg.collect_balance {
                return true;
            }
            let (entry_y, entry_parity) = entries[i];
            let (_, min_rel, max_rel) = summaries[i].adjusted(entry_parity);
            let (lo_y, hi_y) = (entry_y + min_rel, entry_y + max_rel);
            cfg.levels.iter().any(|&l| l >= lo_y && l <= hi_y)
        })
        .collect();

    let mut walked: Vec<(usize, SegmentResult)> = selected
        .par_iter()
        .map(|&i| {
            let (lo, hi) = segments[i];
            let seg = sieve_segment(lo, hi, base)?;
            let (entry_y, entry_parity) = entries[i];
            let seg_entry = WalkerState {
                n: lo,
                y: entry_y,
                parity: entry_parity,
                crossing_counts: BTreeMap::new(),
            };
            let mut acc = cfg.collect_balance.then(|| {
                let mut acc = BalanceAccumulator::with_decimation(cfg.slope_decimation);
                acc.seed(lo, entry_y);
                acc
            });
            let (_, crossings, _) = walk_segment_with(&seg_entry, &seg, &cfg.levels, acc.as_mut())?;
            Ok((
                i,
                SegmentResult {
                    crossings,
                    balance: acc,
                },
            ))
        })
        .collect::<Result<_>>()?;
    walked.sort_by_key(|&(i, _)| i);

    Ok((exit, walked.into_iter().map(|(_, r)| r).collect(), primes_below))
}

/// Same two-phase machinery exposed for chunked (checkpointed) runs.
pub(crate) fn walk_chunk(
    cfg: &WalkConfig,
    entry: &WalkerState,
    segments: &[(u64, u64)],
    base: &[u64],
    pool: Option<&rayon::ThreadPool>,
    records: &mut [Vec<u64>],
    balance: Option<&mut BalanceAccumulator>,
) -> Result<(WalkerState, u64)> {
    let (mut exit, per_segment, primes) = match pool {
        Some(pool) => pool.install(|| parallel_segments(cfg, entry, segments, base))?,
        None => parallel_segments(cfg, entry, segments, base)?,
    };
    let mut total_balance = balance;
    for result in per_segment {
        for (slot, mut found) in result.crossings.into_iter().enumerate() {
            records[slot].append(&mut found);
        }
        if let (Some(total), Some(part)) = (total_balance.as_deref_mut(), result.balance) {
            total.merge(&part)?;
        }
    }
    for (slot, &level) in cfg.levels.iter().enumerate() {
        exit.crossing_counts
            .insert(level, records[slot].len() as u64);
    }
    Ok((exit, primes))
}

/// Naive reference walk driven by trial division. The oracle the segmented
/// paths are tested against; do not use beyond ~10^6.
pub fn naive_walk(limit: u64, tracked_levels: &[i64]) -> Result<WalkOutput> {
    if limit < 1 {
        return Err(Error::Contract("limit must be >= 1".into()));
    }
    let mut state = WalkerState::with_levels(tracked_levels);
    let mut records: Vec<Vec<u64>> = vec![Vec::new(); tracked_levels.len()];
    for (slot, &level) in tracked_levels.iter().enumerate() {
        if level == 0 {
            records[slot].push(1);
        }
    }
    let mut pi = 0u64;
    for n in 1..limit {
        let p = trial_division_is_prime(n);
        pi += p as u64;
        state.step(p);
        for (slot, &level) in tracked_levels.iter().enumerate() {
            if state.y == level {
                records[slot].push(state.n);
            }
        }
    }
    pi += trial_division_is_prime(limit) as u64;
    Ok(WalkOutput {
        records: tracked_levels
            .iter()
            .zip(records)
            .map(|(&level, positions)| CrossingRecord { level, positions })
            .collect(),
        final_state: state,
        pi_limit: pi,
        balance: None,
    })
}

/// Heights y(p) for ascending positions `p`, by one segmented pass.
pub fn heights_at(positions: &[u64]) -> Result<Vec<i64>> {
    if positions.is_empty() {
        return Ok(Vec::new());
    }
    if positions[0] < 1 {
        return Err(Error::Range("positions start at 1".into()));
    }
    if positions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Contract("positions must be strictly ascending".into()));
    }
    let max = *positions.last().unwrap();
    let mut out = Vec::with_capacity(positions.len());
    let mut next = positions.iter().copied().peekable();
    let mut parity = 0u8;
    while next.peek() == Some(&1) {
        out.push(0);
        next.next();
    }
    if max >= 2 {
        // Synthetic prefix step from position 1.
        let mut y = 1i64;
        while next.peek() == Some(&2) {
            out.push(y);
            next.next();
        }
        let base = base_primes(isqrt(max - 1));
        let plan = SievePlan::new(max - 1, DEFAULT_SEGMENT_SIZE)?;
        for &(lo, hi) in &plan.segments {
            let seg = sieve_segment(lo, hi, &base)?;
            let mut odd_index = 0usize;
            let mut is_odd = lo & 1 == 1;
            for n in lo..hi {
                let is_prime = if is_odd {
                    let b = seg.bit(odd_index);
                    odd_index += 1;
                    b
                } else {
                    n == 2
                };
                is_odd = !is_odd;
                parity ^= is_prime as u8;
                y += if parity == 0 { 1 } else { -1 };
                let pos = n + 1;
                while next.peek() == Some(&pos) {
                    out.push(y);
                    next.next();
                }
            }
        }
    }
    debug_assert_eq!(out.len(), positions.len());
    Ok(out)
}

/// Σ(I[↑] − I[↓]) over [x, y], which telescopes to y(Y) − y(X).
pub fn interval_imbalance(x: u64, y: u64, walked_limit: u64) -> Result<i64> {
    if x < 1 || x > y {
        return Err(Error::Contract(format!("need 1 <= x <= y, got ({x}, {y})")));
    }
    if y > walked_limit {
        return Err(Error::Range(format!(
            "interval end {y} is beyond the walked limit {walked_limit}"
        )));
    }
    if x == y {
        return Ok(0);
    }
    let h = heights_at(&[x, y])?;
    Ok(h[1] - h[0])
}

/// A ladder of `k` stacked triangles, peak j reaching height 3^j. The
/// counterexample fixture: infinitely many zeroes but a slope bounded away
/// from zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleLadder {
    pub points: Vec<(u64, i64)>,
}

impl TriangleLadder {
    pub fn zeroes(&self) -> Vec<u64> {
        self.points
            .iter()
            .filter(|&&(_, y)| y == 0)
            .map(|&(x, _)| x)
            .collect()
    }
}

pub fn triangle_ladder(k: u32) -> Result<TriangleLadder> {
    if k < 1 {
        return Err(Error::Contract("triangle ladder needs k >= 1".into()));
    }
    if k > 36 {
        return Err(Error::Contract("triangle ladder of 3^k points does not fit memory".into()));
    }
    let mut points = vec![(0u64, 0i64)];
    let mut x = 0u64;
    for j in 0..k {
        let h = 3i64.pow(j);
        for y in 1..=h {
            x += 1;
            points.push((x, y));
        }
        for y in (0..h).rev() {
            x += 1;
            points.push((x, y));
        }
    }
    Ok(TriangleLadder { points })
}
