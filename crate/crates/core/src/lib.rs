//! Jacob's Ladder: the walk on the integers whose step direction flips at
//! every prime, y(n+1) − y(n) = (−1)^π(n). This crate builds the ladder to
//! large limits with a segmented sieve, enumerates its level crossings, and
//! computes the statistics of the zero set (gap spectrum, digit
//! distributions, balance and slope diagnostics), with resumable
//! checkpointed runs.

pub mod error;
pub mod runner;
pub mod sieve;
pub mod stats;
pub mod store;
pub mod verify;
pub mod walker;

pub use error::{Error, Result};
pub use runner::{run, zero_list_path, RunReport, RunnerConfig};
pub use sieve::{
    base_primes, prime_count, sieve_segment, trial_division_is_prime, PrimalitySegment, SievePlan,
};
pub use stats::{
    average_gap, benford_expected, benford_histogram, exp_decay_fit, gap_histogram,
    gap_percentage_report, gap_percentage_series, jumping_champions, last_digit_histogram,
    primes_in_zeroes, slope_fit, slope_models, zero_growth_report, AverageGap,
    BalanceAccumulator, BenfordReport, ExpDecayFit, GapHistogram, GapPercentages,
    LastDigitReport, PrimesInZeroes, SlopeModels, ZeroGrowthRow, LAST_DIGITS,
};
pub use store::{
    plan_hash, read_checkpoint, read_zero_list, write_checkpoint, write_zero_list, Checkpoint,
    LevelCount, ZeroListFile,
};
pub use verify::{run_suite, run_suite_with, SuiteReport};
pub use walker::{
    heights_at, initial_state, interval_imbalance, naive_walk, parallel_walk, triangle_ladder,
    walk, walk_segment, CrossingRecord, SegmentSummary, TriangleLadder, WalkConfig, WalkOutput,
    WalkerState,
};
