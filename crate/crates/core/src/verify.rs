//! Self-check suite: walks a range twice — once with an independent
//! primality oracle, once with the segmented machinery — and asserts the
//! structural invariants of the ladder. Small limits only; the oracle is
//! trial division.

use crate::error::{Error, Result};
use crate::sieve::trial_division_is_prime;
use crate::walker::{walk, WalkConfig, WalkerState};

/// One passed check, with a short human-readable note.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub limit: u64,
    pub zero_count: u64,
    pub checks: Vec<CheckResult>,
}

fn violation(name: &str, detail: String) -> Error {
    Error::Inconsistency(format!("invariant '{name}' violated: {detail}"))
}

/// Run every invariant check up to `limit` with trial division as the
/// independent oracle.
pub fn run_suite(limit: u64) -> Result<SuiteReport> {
    run_suite_with(limit, trial_division_is_prime)
}

/// Same suite with an injectable primality oracle, so tests can prove the
/// suite actually catches a corrupted oracle.
pub fn run_suite_with(limit: u64, oracle: impl Fn(u64) -> bool) -> Result<SuiteReport> {
    if limit < 1 {
        return Err(Error::Contract("limit must be >= 1".into()));
    }
    let mut checks = Vec::new();

    // Oracle walk, recording zeroes and checking the pointwise step laws.
    let mut state = WalkerState::with_levels(&[0]);
    let mut oracle_zeroes: Vec<u64> = vec![1];
    let mut pi = 0u64;
    let mut steps = 0u64;
    for n in 1..limit {
        let p = oracle(n);
        pi += p as u64;
        let before = state.y;
        state.step(p);
        let dy = state.y - before;
        let want = if pi % 2 == 0 { 1 } else { -1 };
        if dy != want {
            return Err(violation(
                "step-direction",
                format!("dy = {dy} from position {n}, pi({n}) = {pi} demands {want}"),
            ));
        }
        if state.y.rem_euclid(2) != ((state.n - 1) % 2) as i64 {
            return Err(violation(
                "height-parity",
                format!("y({}) = {} has the wrong parity", state.n, state.y),
            ));
        }
        if state.y == 0 {
            oracle_zeroes.push(state.n);
        }
        steps += 1;
    }
    checks.push(CheckResult {
        name: "step-direction",
        detail: format!("dy = (-1)^pi(n) over {steps} steps"),
    });
    checks.push(CheckResult {
        name: "height-parity",
        detail: format!("y(n) = n - 1 (mod 2) over {steps} steps"),
    });

    // Segmented walk must agree with the oracle walk exactly.
    let mut cfg = WalkConfig::new(limit);
    cfg.segment_size = (limit / 7).clamp(16, 1 << 22);
    let segmented = walk(&cfg)?;
    let seg_zeroes = &segmented.records[0].positions;
    if *seg_zeroes != oracle_zeroes {
        let i = seg_zeroes
            .iter()
            .zip(&oracle_zeroes)
            .position(|(a, b)| a != b)
            .unwrap_or_else(|| seg_zeroes.len().min(oracle_zeroes.len()));
        return Err(violation(
            "oracle-equality",
            format!(
                "zero lists diverge at index {i}: segmented {:?} vs oracle {:?}",
                seg_zeroes.get(i),
                oracle_zeroes.get(i)
            ),
        ));
    }
    if segmented.final_state.y != state.y || segmented.final_state.parity != state.parity {
        return Err(violation(
            "oracle-equality",
            format!(
                "final state ({}, parity {}) vs oracle ({}, parity {})",
                segmented.final_state.y, segmented.final_state.parity, state.y, state.parity
            ),
        ));
    }
    checks.push(CheckResult {
        name: "oracle-equality",
        detail: format!("{} zeroes identical in both walks", seg_zeroes.len()),
    });

    // Every zero after the first is congruent to 3 mod 4.
    for &z in &oracle_zeroes[1..] {
        if z % 4 != 3 {
            return Err(violation("zeroes-4n-plus-3", format!("zero at {z}")));
        }
    }
    checks.push(CheckResult {
        name: "zeroes-4n-plus-3",
        detail: format!("{} zeroes past the origin", oracle_zeroes.len() - 1),
    });

    // Gaps are multiples of 4, except the single gap of 2 between 1 and 3.
    let mut twos = 0u64;
    for w in oracle_zeroes.windows(2) {
        let gap = w[1] - w[0];
        if gap == 2 {
            twos += 1;
        } else if gap % 4 != 0 {
            return Err(violation(
                "gaps-mod-4",
                format!("gap {gap} between {} and {}", w[0], w[1]),
            ));
        }
    }
    let expected_twos = u64::from(limit >= 3);
    if twos != expected_twos {
        return Err(violation(
            "gaps-mod-4",
            format!("{twos} gaps of 2, expected {expected_twos}"),
        ));
    }
    checks.push(CheckResult {
        name: "gaps-mod-4",
        detail: format!("{} gaps, {twos} of size 2", oracle_zeroes.len() - 1),
    });

    Ok(SuiteReport {
        limit,
        zero_count: oracle_zeroes.len() as u64,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_small_limits() {
        for limit in [1, 2, 3, 10, 50, 1_000, 100_000] {
            let report = run_suite(limit).unwrap();
            assert_eq!(report.checks.len(), 5, "limit {limit}");
        }
        assert_eq!(run_suite(10).unwrap().zero_count, 3); // zeroes {1, 3, 7}
    }

    #[test]
    fn corrupted_oracle_is_caught() {
        // Claim 9 is prime: the oracle walk diverges from the sieve.
        let err = run_suite_with(1_000, |n| trial_division_is_prime(n) || n == 9).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("invariant"), "{msg}");
    }
}
