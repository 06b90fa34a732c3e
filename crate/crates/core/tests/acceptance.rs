//! The acceptance gate: one test per criterion, each ending in a single
//! PASS line. The 10^9 walk is shared across criteria through a OnceLock.

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use jladder_core::stats::{
    benford_expected, exp_decay_fit, jumping_champions, slope_fit, GapHistogram,
};
use jladder_core::walker::{
    heights_at, naive_walk, parallel_walk, triangle_ladder, walk, WalkConfig, WalkerState,
};
use jladder_core::{
    base_primes, gap_histogram, runner, sieve_segment, trial_division_is_prime, CrossingRecord,
    SievePlan,
};

const BILLION: u64 = 1_000_000_000;

struct BigRun {
    zeroes: Vec<u64>,
    elapsed: Duration,
}

fn big_run() -> &'static BigRun {
    static RUN: OnceLock<BigRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let mut cfg = WalkConfig::new(BILLION);
        cfg.workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        let t0 = Instant::now();
        let out = parallel_walk(&cfg).expect("walk to 10^9");
        let elapsed = t0.elapsed();
        BigRun {
            zeroes: out.records.into_iter().next().unwrap().positions,
            elapsed,
        }
    })
}

/// Count of zeroes <= n, including the one at n = 1.
fn count_with_one(zeroes: &[u64], n: u64) -> u64 {
    zeroes.partition_point(|&p| p <= n) as u64
}

fn primes_among(zeroes: &[u64], n: u64) -> u64 {
    zeroes
        .iter()
        .take_while(|&&p| p <= n)
        .filter(|&&p| trial_division_is_prime(p))
        .count() as u64
}

/// The published value must equal the count under one of the two
/// counting conventions (n = 1 in or out of the zero list).
fn bracket(with_one: u64, published: u64) -> bool {
    published == with_one || published == with_one - 1
}

#[test]
fn criterion_1_zero_counts() {
    let mut cfg = WalkConfig::new(100_000_000);
    cfg.workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let t0 = Instant::now();
    let out = parallel_walk(&cfg).expect("walk to 10^8");
    let elapsed = t0.elapsed();
    let zeroes = &out.records[0].positions;

    let published = [
        (100u64, 10u64),
        (1_000, 16),
        (10_000, 59),
        (100_000, 139),
        (1_000_000, 151),
        (10_000_000, 151),
        (100_000_000, 2_415),
    ];
    for (n, expect) in published {
        let with_one = count_with_one(zeroes, n);
        assert!(
            bracket(with_one, expect),
            "Z({n}): published {expect} not in {{{with_one}, {}}}",
            with_one - 1
        );
    }
    assert!(
        elapsed <= Duration::from_secs(60),
        "10^8 walk took {elapsed:?}, budget 60s"
    );
    println!("PASS 1: zero counts 10/16/59/139/151/151/2415 matched through 10^8 in {elapsed:?}");
}

#[test]
fn criterion_2_primes_in_zeroes() {
    let run = big_run();
    let published = [
        (100u64, 5u64, 4.342f64),
        (1_000, 6, 5.770),
        (10_000, 21, 14.469),
        (100_000, 36, 28.169),
        (1_000_000, 37, 30.096),
        (10_000_000, 37, 30.096),
        (100_000_000, 313, 310.034),
    ];
    for (n, expect_primes, expect_ratio) in published {
        let primes = primes_among(&run.zeroes, n);
        // The published census for the two smallest ranges evidently counts
        // the zero at n = 1 as prime; accept either reading.
        assert!(
            primes == expect_primes || primes + 1 == expect_primes,
            "primes in zeroes <= {n}: got {primes}, published {expect_primes}"
        );
        let ratio = |x: f64| x / x.ln();
        let with_one = count_with_one(&run.zeroes, n) as f64;
        let candidates = [ratio(with_one), ratio(with_one - 1.0)];
        let best = candidates
            .iter()
            .map(|c| (c - expect_ratio).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(
            best <= 0.01,
            "X/ln X for n = {n}: {candidates:?} vs published {expect_ratio}"
        );
    }
    println!("PASS 2: prime censuses 5/6/21/36/37/37/313 and X/ln X column matched through 10^8");
}

#[test]
fn criterion_3_billion_scale() {
    let run = big_run();
    let z = count_with_one(&run.zeroes, BILLION);
    assert!(bracket(z, 7_730), "Z(10^9): got {{{z}, {}}}", z - 1);

    let primes = primes_among(&run.zeroes, BILLION);
    assert!(
        primes == 846 || primes + 1 == 846,
        "primes in zeroes at 10^9: got {primes}, published 846"
    );

    let first_after = run
        .zeroes
        .iter()
        .copied()
        .find(|&p| p > 100_000_000)
        .expect("a crossing above 10^8 exists");
    assert_eq!(first_after, 202_640_007);

    assert!(
        run.elapsed <= Duration::from_secs(600),
        "10^9 walk took {:?}, budget 600s",
        run.elapsed
    );
    println!(
        "PASS 3: Z(10^9)=7730, 846 primes, first crossing past 10^8 at 202640007, walk in {:?}",
        run.elapsed
    );
}

#[test]
fn criterion_4_structural_invariants() {
    let run = big_run();

    // (a) every zero past the origin is 3 mod 4.
    for &z in &run.zeroes[1..] {
        assert_eq!(z % 4, 3, "zero at {z}");
    }

    // (b) gaps are multiples of 4 except a single gap of 2.
    let mut twos = 0;
    for w in run.zeroes.windows(2) {
        let gap = w[1] - w[0];
        if gap == 2 {
            twos += 1;
        } else {
            assert_eq!(gap % 4, 0, "gap {gap} at {}", w[0]);
        }
    }
    assert_eq!(twos, 1, "exactly one gap of 2");

    // (c) dy = (-1)^pi(n) at 10^5 random positions. Heights come from the
    // production path; pi(n) parities from a separate raw-sieve pass.
    let mut rng = ChaCha8Rng::seed_from_u64(0x1adde5);
    let mut samples: Vec<u64> = (0..100_000).map(|_| rng.gen_range(1..BILLION)).collect();
    samples.sort_unstable();
    samples.dedup();
    let parities = pi_parities_at(&samples);
    let mut query: Vec<u64> = samples.iter().flat_map(|&n| [n, n + 1]).collect();
    query.sort_unstable();
    query.dedup();
    let heights = heights_at(&query).unwrap();
    let height_of = |n: u64| heights[query.binary_search(&n).unwrap()];
    for (&n, &parity) in samples.iter().zip(&parities) {
        let dy = height_of(n + 1) - height_of(n);
        let want = if parity == 0 { 1 } else { -1 };
        assert_eq!(dy, want, "dy at n = {n}, pi parity {parity}");
    }

    // (d) parallel output bit-identical to sequential.
    for limit in [100_000u64, 1_000_000, 10_000_000] {
        let mut cfg = WalkConfig::new(limit);
        cfg.segment_size = 1 << 20;
        let seq = walk(&cfg).unwrap();
        for workers in [1usize, 2, 8] {
            let mut pcfg = cfg.clone();
            pcfg.workers = workers;
            let par = parallel_walk(&pcfg).unwrap();
            assert_eq!(par.records, seq.records, "limit {limit}, workers {workers}");
            assert_eq!(par.final_state, seq.final_state);
            assert_eq!(par.pi_limit, seq.pi_limit);
        }
    }

    println!("PASS 4: 4n+3 zeroes, mod-4 gaps, sampled step law, parallel == sequential");
}

/// pi(n) mod 2 for ascending positions, from segment prime counts plus an
/// in-segment scan; independent of the walker's own parity bookkeeping.
fn pi_parities_at(positions: &[u64]) -> Vec<u8> {
    let max = *positions.last().unwrap();
    let plan = SievePlan::new(max, 1 << 22).unwrap();
    let base = base_primes((max as f64).sqrt() as u64 + 1);
    let mut out = Vec::with_capacity(positions.len());
    let mut it = positions.iter().copied().peekable();
    while it.peek() == Some(&1) {
        out.push(0); // pi(1) = 0
        it.next();
    }
    let mut prefix = 0u64;
    for &(lo, hi) in &plan.segments {
        if it.peek().is_none() {
            break;
        }
        if *it.peek().unwrap() >= hi {
            let seg = sieve_segment(lo, hi, &base).unwrap();
            prefix += seg.prime_count;
            continue;
        }
        let seg = sieve_segment(lo, hi, &base).unwrap();
        let mut count = 0u64;
        let mut primes = seg.primes().peekable();
        while let Some(&n) = it.peek() {
            if n >= hi {
                break;
            }
            while primes.peek().is_some_and(|&p| p <= n) {
                primes.next();
                count += 1;
            }
            out.push(((prefix + count) & 1) as u8);
            it.next();
        }
        prefix += seg.prime_count;
    }
    assert_eq!(out.len(), positions.len());
    out
}

#[test]
fn criterion_5_oracle_equivalence() {
    let t0 = Instant::now();
    let limit = 100_000u64;

    // Naive walk, keeping every height.
    let mut state = WalkerState::with_levels(&[0]);
    let mut naive_heights = vec![0i64];
    for n in 1..limit {
        state.step(trial_division_is_prime(n));
        naive_heights.push(state.y);
    }
    let naive = naive_walk(limit, &[0]).unwrap();

    let mut cfg = WalkConfig::new(limit);
    cfg.segment_size = 10_000;
    let seg = walk(&cfg).unwrap();
    assert_eq!(seg.records, naive.records, "zero positions");
    assert_eq!(seg.final_state, naive.final_state);
    assert_eq!(seg.pi_limit, naive.pi_limit);

    let all: Vec<u64> = (1..=limit).collect();
    let heights = heights_at(&all).unwrap();
    assert_eq!(heights, naive_heights, "heights over the full range");

    let elapsed = t0.elapsed();
    assert!(elapsed <= Duration::from_secs(10), "took {elapsed:?}");
    println!("PASS 5: segmented walk == trial-division walk on positions, heights, zeroes to 10^5");
}

#[test]
fn criterion_6_gap_structure() {
    let run = big_run();
    let rec = CrossingRecord {
        level: 0,
        positions: run.zeroes.clone(),
    };
    let hist = gap_histogram(&rec).unwrap();
    let champs = jumping_champions(&hist, 3);
    let ranking: Vec<u64> = champs.iter().map(|&(g, _)| g).collect();
    assert_eq!(ranking, vec![4, 8, 12], "jumping champions at 10^9");

    let fit = exp_decay_fit(&hist, 1_000).unwrap();
    assert!(fit.rate > 0.0, "decay rate {}", fit.rate);
    if fit.r_squared < 0.8 {
        println!(
            "FAIL 6: champions 4/8/12 and rate {:.5} > 0 hold, but the unweighted \
             per-gap-size fit gives r^2 {:.3} < 0.8 at 10^9 (the published decay \
             plot is at 8*10^11, where per-size counts are ~25x denser; at 10^9 \
             the singleton tail dominates and no unbinned reading reaches 0.8)",
            fit.rate, fit.r_squared
        );
        panic!("criterion 6: r^2 {:.3} < 0.8", fit.r_squared);
    }
    println!(
        "PASS 6: champions 4/8/12 at 10^9; decay fit rate {:.5} with r^2 {:.3}",
        fit.rate, fit.r_squared
    );
}

#[test]
fn criterion_7_synthetic_exactness() {
    // Planted decay: counts 2^30, 2^20, 2^10 at gaps 4, 8, 12 give an exact
    // log-linear line with slope -10 ln2 / 4.
    let mut counts = BTreeMap::new();
    counts.insert(4u64, 1u64 << 30);
    counts.insert(8, 1 << 20);
    counts.insert(12, 1 << 10);
    let hist = GapHistogram {
        counts,
        total_gaps: (1 << 30) + (1 << 20) + (1 << 10),
        max_gap: 12,
    };
    let fit = exp_decay_fit(&hist, 1_000).unwrap();
    let planted = 10.0 * std::f64::consts::LN_2 / 4.0;
    assert!(
        (fit.rate - planted).abs() <= 1e-9,
        "rate {} vs planted {planted}",
        fit.rate
    );

    for s in [1i64, -1] {
        let points = (0..1_000u64).map(|x| (x, s * x as i64));
        assert_eq!(slope_fit(points, 1).unwrap(), s as f64);
    }

    for k in 1..=8u32 {
        let ladder = triangle_ladder(k).unwrap();
        let eps = slope_fit(ladder.points.iter().copied(), 1).unwrap();
        assert!(eps.abs() > 0.1, "k = {k}: epsilon {eps}");
    }
    println!("PASS 7: planted decay rate to 1e-9, exact +/-1 slopes, triangle epsilon > 0.1 for k <= 8");
}

#[test]
fn criterion_8_benford_machinery() {
    let expected = benford_expected();
    let mut sum = 0.0;
    for (i, &e) in expected.iter().enumerate() {
        let d = (i + 1) as f64;
        assert!((e - (1.0 + 1.0 / d).log10()).abs() <= 1e-12);
        sum += e;
    }
    assert!((sum - 1.0).abs() <= 1e-12, "sum {sum}");

    let run = big_run();
    for &z in &run.zeroes {
        assert!(
            matches!(z % 10, 1 | 3 | 5 | 7 | 9),
            "even-ending zero {z}"
        );
    }
    println!("PASS 8: Benford vector exact and normalized; all zero last digits in {{1,3,5,7,9}}");
}

#[test]
fn criterion_9_checkpoint_determinism() {
    let limit = 1_000_000u64;
    let segment_size = 65_536u64;

    let straight_dir = tempfile::tempdir().unwrap();
    let mut cfg = WalkConfig::new(limit);
    cfg.segment_size = segment_size;
    let mut rc = runner::RunnerConfig::new(cfg.clone(), straight_dir.path());
    rc.checkpoint_every_segments = 1;
    runner::run(&rc).unwrap();
    let expected = std::fs::read(runner::zero_list_path(straight_dir.path(), 0)).unwrap();

    // Kill at every segment boundary: each round writes exactly one
    // checkpoint and stops, the next resumes from it.
    let dir = tempfile::tempdir().unwrap();
    let mut rc = runner::RunnerConfig::new(cfg, dir.path());
    rc.checkpoint_every_segments = 1;
    rc.stop_after_checkpoints = Some(1);
    let mut kills = 0;
    loop {
        let report = runner::run(&rc).unwrap();
        if report.completed {
            break;
        }
        kills += 1;
        assert!(kills < 100, "resume loop did not terminate");
    }
    let n_boundaries = (limit - 2) / segment_size; // interior boundaries
    assert_eq!(kills as u64, n_boundaries, "killed at every boundary");

    let resumed = std::fs::read(runner::zero_list_path(dir.path(), 0)).unwrap();
    assert_eq!(resumed, expected, "zero lists differ after kill-and-resume");
    println!("PASS 9: {kills} kill-and-resume rounds to 10^6 reproduce the zero list byte-for-byte");
}
