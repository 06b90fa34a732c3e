//! Checkpointed walk driver: runs the segmented walk in chunks, persisting a
//! resumable snapshot plus the zero lists found so far at segment boundaries.
//! Resuming from any checkpoint — even toward a larger limit — reproduces an
//! uninterrupted run byte for byte.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::sieve::{base_primes, isqrt, trial_division_is_prime};
use crate::stats::BalanceAccumulator;
use crate::store::{
    plan_hash, read_checkpoint, read_zero_list, unix_now, write_checkpoint, write_zero_list,
    Checkpoint, LevelCount, CHECKPOINT_VERSION,
};
use crate::walker::{
    walk_chunk, walk_plan, walk_prefix, CrossingRecord, WalkConfig, WalkerState,
};

#[derive(Debug, Clone)]
pub struct RunnerConfig {
    pub walk: WalkConfig,
    pub checkpoint_path: PathBuf,
    /// Directory receiving one zero-list file per tracked level.
    pub zero_list_dir: PathBuf,
    /// Segments walked between checkpoint writes.
    pub checkpoint_every_segments: usize,
    /// Pick up from `checkpoint_path` if it exists; otherwise start fresh.
    pub resume: bool,
    /// Fault injection for tests: stop (reporting `completed = false`) after
    /// writing this many checkpoints in the current process.
    pub stop_after_checkpoints: Option<u64>,
}

impl RunnerConfig {
    pub fn new(walk: WalkConfig, dir: &Path) -> Self {
        RunnerConfig {
            walk,
            checkpoint_path: dir.join("checkpoint.json"),
            zero_list_dir: dir.to_path_buf(),
            checkpoint_every_segments: 8,
            resume: true,
            stop_after_checkpoints: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub records: Vec<CrossingRecord>,
    pub final_state: WalkerState,
    /// π(limit); only known for runs that started fresh and completed.
    pub pi_limit: Option<u64>,
    pub balance: Option<BalanceAccumulator>,
    pub checkpoints_written: u64,
    /// Position the run was resumed from, if it did not start fresh.
    pub resumed_from: Option<u64>,
    pub completed: bool,
}

pub fn zero_list_path(dir: &Path, level: i64) -> PathBuf {
    dir.join(format!("level_{level}.txt"))
}

/// State rebuilt either from scratch or from a checkpoint plus its zero lists.
struct ResumePoint {
    state: WalkerState,
    records: Vec<Vec<u64>>,
    balance: Option<BalanceAccumulator>,
    resumed_from: Option<u64>,
}

fn fresh_start(cfg: &RunnerConfig) -> ResumePoint {
    let mut records: Vec<Vec<u64>> = vec![Vec::new(); cfg.walk.levels.len()];
    let mut balance = cfg
        .walk
        .collect_balance
        .then(|| BalanceAccumulator::with_decimation(cfg.walk.slope_decimation));
    let state = walk_prefix(&cfg.walk, &mut records, balance.as_mut());
    ResumePoint {
        state,
        records,
        balance,
        resumed_from: None,
    }
}

fn resume_from_checkpoint(cfg: &RunnerConfig) -> Result<ResumePoint> {
    let cp = read_checkpoint(&cfg.checkpoint_path, &plan_hash(cfg.walk.segment_size))?;
    if cp.n < 2 || cp.n > cfg.walk.limit {
        return Err(Error::IncompatibleCheckpoint(format!(
            "checkpoint at n = {} is outside [2, {}]",
            cp.n, cfg.walk.limit
        )));
    }
    let cp_levels: Vec<i64> = cp.levels.iter().map(|l| l.level).collect();
    if cp_levels != cfg.walk.levels {
        return Err(Error::IncompatibleCheckpoint(format!(
            "checkpoint tracks levels {cp_levels:?}, run wants {:?}",
            cfg.walk.levels
        )));
    }

    let mut records = Vec::with_capacity(cp.levels.len());
    let mut crossing_counts = BTreeMap::new();
    for lc in &cp.levels {
        let path = zero_list_path(&cfg.zero_list_dir, lc.level);
        let file = read_zero_list(&path)?;
        if file.record.positions.len() as u64 != lc.count {
            return Err(Error::Inconsistency(format!(
                "zero list {} has {} positions, checkpoint expects {}",
                path.display(),
                file.record.positions.len(),
                lc.count
            )));
        }
        crossing_counts.insert(lc.level, lc.count);
        records.push(file.record.positions);
    }

    let balance = if cfg.walk.collect_balance {
        if cp.balance.decimation != cfg.walk.slope_decimation.max(1) {
            return Err(Error::IncompatibleCheckpoint(format!(
                "checkpoint balance decimation {} != requested {}",
                cp.balance.decimation, cfg.walk.slope_decimation
            )));
        }
        let mut acc = cp.balance.clone();
        acc.seed(cp.n, cp.y);
        Some(acc)
    } else {
        None
    };

    Ok(ResumePoint {
        state: WalkerState {
            n: cp.n,
            y: cp.y,
            parity: cp.parity,
            crossing_counts,
        },
        records,
        balance,
        resumed_from: Some(cp.n),
    })
}

/// Segments still to walk from position `from`. A checkpoint taken at the end
/// of a shorter run may sit mid-segment in the current plan; the first
/// remaining segment is then the partial `[from, boundary)`.
fn remaining_segments(segments: &[(u64, u64)], from: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for &(lo, hi) in segments {
        if hi <= from {
            continue;
        }
        out.push((lo.max(from), hi));
    }
    out
}

fn persist(
    cfg: &RunnerConfig,
    state: &WalkerState,
    records: &[Vec<u64>],
    balance: Option<&BalanceAccumulator>,
) -> Result<()> {
    // Zero lists first: a crash between the two writes leaves lists that are
    // at least as long as the checkpoint expects, which resume verifies.
    for (slot, &level) in cfg.walk.levels.iter().enumerate() {
        let rec = CrossingRecord {
            level,
            positions: records[slot].clone(),
        };
        write_zero_list(&rec, state.n, &zero_list_path(&cfg.zero_list_dir, level))?;
    }
    let cp = Checkpoint {
        version: CHECKPOINT_VERSION,
        n: state.n,
        y: state.y,
        parity: state.parity,
        levels: cfg
            .walk
            .levels
            .iter()
            .zip(records)
            .map(|(&level, positions)| LevelCount {
                level,
                count: positions.len() as u64,
            })
            .collect(),
        balance: balance.cloned().unwrap_or_default(),
        plan_hash: plan_hash(cfg.walk.segment_size),
        written_at: unix_now(),
    };
    write_checkpoint(&cp, &cfg.checkpoint_path)
}

/// Run the walk with periodic checkpoints. The zero lists on disk after a
/// completed run are identical to [`crate::walker::walk`]'s records, however
/// many times the process was killed and resumed along the way.
pub fn run(cfg: &RunnerConfig) -> Result<RunReport> {
    cfg.walk.validate()?;
    if cfg.checkpoint_every_segments == 0 {
        return Err(Error::Contract(
            "checkpoint_every_segments must be > 0".into(),
        ));
    }

    let start = if cfg.resume && cfg.checkpoint_path.exists() {
        resume_from_checkpoint(cfg)?
    } else {
        fresh_start(cfg)
    };
    let ResumePoint {
        mut state,
        mut records,
        mut balance,
        resumed_from,
    } = start;

    let plan = walk_plan(&cfg.walk)?;
    let todo = remaining_segments(&plan.segments, state.n);
    let base = base_primes(isqrt(cfg.walk.limit.saturating_sub(1)));
    let pool = if cfg.walk.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.walk.workers)
                .build()
                .map_err(|e| Error::Contract(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };

    let mut primes_walked = 0u64;
    let mut checkpoints_written = 0u64;
    for chunk in todo.chunks(cfg.checkpoint_every_segments) {
        let (exit, primes) = walk_chunk(
            &cfg.walk,
            &state,
            chunk,
            &base,
            pool.as_ref(),
            &mut records,
            balance.as_mut(),
        )?;
        state = exit;
        primes_walked += primes;
        persist(cfg, &state, &records, balance.as_ref())?;
        checkpoints_written += 1;
        if cfg.stop_after_checkpoints == Some(checkpoints_written) && state.n < cfg.walk.limit {
            return Ok(RunReport {
                records: assemble(cfg, records),
                final_state: state,
                pi_limit: None,
                balance,
                checkpoints_written,
                resumed_from,
                completed: false,
            });
        }
    }
    if todo.is_empty() {
        // Nothing left to walk (tiny limit, or a checkpoint already at the
        // target); still leave fresh files behind.
        persist(cfg, &state, &records, balance.as_ref())?;
        checkpoints_written += 1;
    }

    let pi_limit = resumed_from
        .is_none()
        .then(|| primes_walked + trial_division_is_prime(cfg.walk.limit) as u64);
    Ok(RunReport {
        records: assemble(cfg, records),
        final_state: state,
        pi_limit,
        balance,
        checkpoints_written,
        resumed_from,
        completed: true,
    })
}

fn assemble(cfg: &RunnerConfig, records: Vec<Vec<u64>>) -> Vec<CrossingRecord> {
    cfg.walk
        .levels
        .iter()
        .zip(records)
        .map(|(&level, positions)| CrossingRecord { level, positions })
        .collect()
}
