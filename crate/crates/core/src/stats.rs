//! Statistics over crossing records and ladder point streams: gap histograms
//! and fits, leading/last digit analyses, slope estimates and the
//! positive/negative balance accumulator.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::walker::CrossingRecord;

/// Multiset of consecutive-crossing gaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapHistogram {
    pub counts: BTreeMap<u64, u64>,
    pub total_gaps: u64,
    pub max_gap: u64,
}

pub fn gap_histogram(crossings: &CrossingRecord) -> Result<GapHistogram> {
    if crossings.positions.len() < 2 {
        return Err(Error::InsufficientData(
            "gap histogram needs at least 2 crossings".into(),
        ));
    }
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut max_gap = 0;
    for w in crossings.positions.windows(2) {
        let gap = w[1] - w[0];
        *counts.entry(gap).or_insert(0) += 1;
        max_gap = max_gap.max(gap);
    }
    Ok(GapHistogram {
        total_gaps: crossings.positions.len() as u64 - 1,
        counts,
        max_gap,
    })
}

/// Parameters of `count ≈ amplitude · exp(−rate · gap)`.
#[derive(Debug, Clone, Copy)]
pub struct ExpDecayFit {
    pub amplitude: f64,
    pub rate: f64,
    pub r_squared: f64,
    pub fit_range: (u64, u64),
}

/// Unweighted least squares of log(count) against gap size over the keys
/// `<= max_gap_cutoff` with a positive count.
pub fn exp_decay_fit(hist: &GapHistogram, max_gap_cutoff: u64) -> Result<ExpDecayFit> {
    let pts: Vec<(f64, f64)> = hist
        .counts
        .iter()
        .filter(|&(&g, &c)| g <= max_gap_cutoff && c > 0)
        .map(|(&g, &c)| (g as f64, (c as f64).ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "exponential fit needs >= 3 distinct gap sizes within cutoff, got {}",
            pts.len()
        )));
    }
    let fit = linear_fit(&pts)?;
    let lo = pts.first().unwrap().0 as u64;
    let hi = pts.last().unwrap().0 as u64;
    Ok(ExpDecayFit {
        amplitude: fit.intercept.exp(),
        rate: -fit.slope,
        r_squared: fit.r_squared,
        fit_range: (lo, hi),
    })
}

/// Top-`k` gaps by count; ties break toward the smaller gap.
pub fn jumping_champions(hist: &GapHistogram, k: usize) -> Vec<(u64, u64)> {
    let mut entries: Vec<(u64, u64)> = hist.counts.iter().map(|(&g, &c)| (g, c)).collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    entries.truncate(k);
    entries
}

/// Average gap under both divisor conventions.
///
/// `gamma` divides the gap sum by the number of gaps, `xi` divides the
/// interval size by the number of crossings; the `alt` fields swap the
/// divisors so either reading of the published table can be reproduced.
#[derive(Debug, Clone, Copy)]
pub struct AverageGap {
    pub gamma: f64,
    pub xi: f64,
    pub gamma_alt: f64,
    pub xi_alt: f64,
}

pub fn average_gap(crossings: &CrossingRecord, interval_limit: u64) -> Result<AverageGap> {
    let n = crossings.positions.len();
    if n < 2 {
        return Err(Error::InsufficientData(
            "average gap needs at least 2 crossings".into(),
        ));
    }
    let last = *crossings.positions.last().unwrap();
    if interval_limit < last {
        return Err(Error::Range(format!(
            "interval limit {interval_limit} is below the last crossing {last}"
        )));
    }
    let gap_sum = (last - crossings.positions[0]) as f64;
    let n_gaps = (n - 1) as f64;
    let n_crossings = n as f64;
    Ok(AverageGap {
        gamma: gap_sum / n_gaps,
        xi: interval_limit as f64 / n_crossings,
        gamma_alt: gap_sum / n_crossings,
        xi_alt: interval_limit as f64 / n_gaps,
    })
}

/// Leading-digit proportions against the Benford expectation.
#[derive(Debug, Clone)]
pub struct BenfordReport {
    pub counts: [u64; 9],
    pub observed: [f64; 9],
    pub expected: [f64; 9],
    pub l1_distance: f64,
    pub chi_square: f64,
    pub total: u64,
}

/// The analytic Benford vector P(d) = log10(1 + 1/d), d = 1..9.
pub fn benford_expected() -> [f64; 9] {
    let mut e = [0.0; 9];
    for (i, slot) in e.iter_mut().enumerate() {
        let d = (i + 1) as f64;
        *slot = (1.0 + 1.0 / d).log10();
    }
    e
}

fn leading_digit(mut n: u64) -> usize {
    while n >= 10 {
        n /= 10;
    }
    n as usize
}

pub fn benford_histogram(crossings: &CrossingRecord) -> Result<BenfordReport> {
    if crossings.positions.is_empty() {
        return Err(Error::InsufficientData(
            "benford analysis needs at least 1 crossing".into(),
        ));
    }
    let mut counts = [0u64; 9];
    for &p in &crossings.positions {
        counts[leading_digit(p) - 1] += 1;
    }
    let total: u64 = counts.iter().sum();
    let expected = benford_expected();
    let mut observed = [0.0; 9];
    let mut l1 = 0.0;
    let mut chi2 = 0.0;
    for d in 0..9 {
        observed[d] = counts[d] as f64 / total as f64;
        l1 += (observed[d] - expected[d]).abs();
        let exp_count = expected[d] * total as f64;
        chi2 += (counts[d] as f64 - exp_count).powi(2) / exp_count;
    }
    Ok(BenfordReport {
        counts,
        observed,
        expected,
        l1_distance: l1,
        chi_square: chi2,
        total,
    })
}

/// Last-digit counts over {1, 3, 5, 7, 9} with a linear fit on the
/// percentages. The fit abscissa is the digit value itself, which is the
/// convention that reproduces the published coefficients.
#[derive(Debug, Clone)]
pub struct LastDigitReport {
    /// Counts for final digits 1, 3, 5, 7, 9 in that order.
    pub counts: [u64; 5],
    pub percentages: [f64; 5],
    pub intercept: f64,
    pub slope: f64,
    pub intercept_se: f64,
    pub slope_se: f64,
}

pub const LAST_DIGITS: [u64; 5] = [1, 3, 5, 7, 9];

pub fn last_digit_histogram(crossings: &CrossingRecord) -> Result<LastDigitReport> {
    if crossings.positions.is_empty() {
        return Err(Error::InsufficientData(
            "last-digit analysis needs at least 1 crossing".into(),
        ));
    }
    let mut counts = [0u64; 5];
    for &p in &crossings.positions {
        let d = p % 10;
        match LAST_DIGITS.iter().position(|&x| x == d) {
            Some(i) => counts[i] += 1,
            None => {
                return Err(Error::Inconsistency(format!(
                    "even-ending position {p} in a level-0 crossing record"
                )))
            }
        }
    }
    let total: u64 = counts.iter().sum();
    let mut percentages = [0.0; 5];
    for i in 0..5 {
        percentages[i] = 100.0 * counts[i] as f64 / total as f64;
    }
    let pts: Vec<(f64, f64)> = LAST_DIGITS
        .iter()
        .zip(percentages.iter())
        .map(|(&d, &p)| (d as f64, p))
        .collect();
    let fit = linear_fit(&pts)?;
    Ok(LastDigitReport {
        counts,
        percentages,
        intercept: fit.intercept,
        slope: fit.slope,
        intercept_se: fit.intercept_se,
        slope_se: fit.slope_se,
    })
}

/// Through-origin least squares `b = Σxy / Σx²` over every
/// `decimation`-th point of the stream (the first point is always kept).
pub fn slope_fit<I>(points: I, decimation: u64) -> Result<f64>
where
    I: IntoIterator<Item = (u64, i64)>,
{
    if decimation == 0 {
        return Err(Error::Contract("decimation must be >= 1".into()));
    }
    let mut sum_xy = 0i128;
    let mut sum_x2 = 0u128;
    for (i, (x, y)) in points.into_iter().enumerate() {
        if i as u64 % decimation != 0 {
            continue;
        }
        sum_xy += x as i128 * y as i128;
        sum_x2 += (x as u128) * (x as u128);
    }
    if sum_x2 == 0 {
        return Err(Error::InsufficientData(
            "through-origin slope needs at least one point with x != 0".into(),
        ));
    }
    Ok(sum_xy as f64 / sum_x2 as f64)
}

/// The model estimates compared against the fitted slope.
#[derive(Debug, Clone, Copy)]
pub struct SlopeModels {
    pub inv_pi: f64,
    pub inv_sqrt_pi: f64,
    /// (c_pos − c_neg) / n.
    pub diff_over_n: f64,
    /// c_pos / c_neg − 1; undefined when no negative points exist.
    pub ratio_based: Option<f64>,
}

pub fn slope_models(limit: u64, acc: &BalanceAccumulator, pi_n: u64) -> Result<SlopeModels> {
    if pi_n == 0 {
        return Err(Error::Contract("slope models need pi(n) > 0".into()));
    }
    let ratio_based = if acc.c_neg == 0 {
        None
    } else {
        Some(acc.c_pos as f64 / acc.c_neg as f64 - 1.0)
    };
    Ok(SlopeModels {
        inv_pi: 1.0 / pi_n as f64,
        inv_sqrt_pi: 1.0 / (pi_n as f64).sqrt(),
        diff_over_n: (acc.c_pos as f64 - acc.c_neg as f64) / limit as f64,
        ratio_based,
    })
}

/// Streaming sums over a ladder point stream: sign counts, enclosed areas in
/// half-units, and through-origin regression sums.
///
/// Consecutive points must be unit-spaced in x with |Δy| = 1, so no unit
/// trapezoid ever straddles the axis. Accumulators over adjacent ranges merge
/// by plain field addition provided the later one was seeded with the
/// boundary point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceAccumulator {
    pub c_pos: u64,
    pub c_neg: u64,
    pub c_zero: u64,
    pub a_pos_halfunits: u128,
    pub a_neg_halfunits: u128,
    pub sum_x: u128,
    pub sum_x2: u128,
    pub sum_xy: i128,
    /// Only x with x % decimation == 0 enter the regression sums.
    pub decimation: u64,
    #[serde(skip)]
    last: Option<(u64, i64)>,
}

impl Default for BalanceAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl BalanceAccumulator {
    pub fn new() -> Self {
        Self::with_decimation(1)
    }

    pub fn with_decimation(decimation: u64) -> Self {
        BalanceAccumulator {
            c_pos: 0,
            c_neg: 0,
            c_zero: 0,
            a_pos_halfunits: 0,
            a_neg_halfunits: 0,
            sum_x: 0,
            sum_x2: 0,
            sum_xy: 0,
            decimation: decimation.max(1),
            last: None,
        }
    }

    /// Install the boundary point preceding this accumulator's range without
    /// counting it. Used when splitting a stream across workers.
    pub fn seed(&mut self, x: u64, y: i64) {
        self.last = Some((x, y));
    }

    pub fn push(&mut self, x: u64, y: i64) -> Result<()> {
        if let Some((px, py)) = self.last {
            if x != px + 1 {
                return Err(Error::Inconsistency(format!(
                    "non-consecutive x: {px} then {x}"
                )));
            }
            if (y - py).abs() != 1 {
                return Err(Error::Inconsistency(format!(
                    "|dy| != 1 between ({px}, {py}) and ({x}, {y})"
                )));
            }
            let halfunits = (py.unsigned_abs() + y.unsigned_abs()) as u128;
            // The nonzero endpoint decides the side; both endpoints zero is
            // impossible with |dy| = 1.
            if py + y > 0 {
                self.a_pos_halfunits += halfunits;
            } else {
                self.a_neg_halfunits += halfunits;
            }
        }
        match y.cmp(&0) {
            std::cmp::Ordering::Greater => self.c_pos += 1,
            std::cmp::Ordering::Less => self.c_neg += 1,
            std::cmp::Ordering::Equal => self.c_zero += 1,
        }
        if x % self.decimation == 0 {
            self.sum_x += x as u128;
            self.sum_x2 += (x as u128) * (x as u128);
            self.sum_xy += x as i128 * y as i128;
        }
        self.last = Some((x, y));
        Ok(())
    }

    /// Add the sums of an accumulator covering the adjacent following range.
    pub fn merge(&mut self, other: &BalanceAccumulator) -> Result<()> {
        if self.decimation != other.decimation {
            return Err(Error::Contract(
                "cannot merge accumulators with different decimation".into(),
            ));
        }
        self.c_pos += other.c_pos;
        self.c_neg += other.c_neg;
        self.c_zero += other.c_zero;
        self.a_pos_halfunits += other.a_pos_halfunits;
        self.a_neg_halfunits += other.a_neg_halfunits;
        self.sum_x += other.sum_x;
        self.sum_x2 += other.sum_x2;
        self.sum_xy += other.sum_xy;
        if other.last.is_some() {
            self.last = other.last;
        }
        Ok(())
    }

    pub fn points(&self) -> u64 {
        self.c_pos + self.c_neg + self.c_zero
    }

    pub fn a_pos(&self) -> f64 {
        self.a_pos_halfunits as f64 / 2.0
    }

    pub fn a_neg(&self) -> f64 {
        self.a_neg_halfunits as f64 / 2.0
    }

    pub fn count_ratio(&self) -> Option<f64> {
        (self.c_neg != 0).then(|| self.c_pos as f64 / self.c_neg as f64)
    }

    pub fn area_ratio(&self) -> Option<f64> {
        (self.a_neg_halfunits != 0).then(|| self.a_pos_halfunits as f64 / self.a_neg_halfunits as f64)
    }

    /// Through-origin slope from the accumulated regression sums.
    pub fn slope(&self) -> Option<f64> {
        (self.sum_x2 != 0).then(|| self.sum_xy as f64 / self.sum_x2 as f64)
    }
}

/// Accumulate a full point stream.
pub fn balance<I>(points: I) -> Result<BalanceAccumulator>
where
    I: IntoIterator<Item = (u64, i64)>,
{
    let mut acc = BalanceAccumulator::new();
    for (x, y) in points {
        acc.push(x, y)?;
    }
    Ok(acc)
}

/// Prime census of a crossing record against the X/ln X benchmark.
#[derive(Debug, Clone, Copy)]
pub struct PrimesInZeroes {
    pub zero_count: u64,
    pub prime_count: u64,
    /// X / ln X with X the number of crossings (natural log).
    pub n_over_log_n: f64,
    /// (primes − X/ln X) / primes, as a percentage.
    pub diff_percent: f64,
}

pub fn primes_in_zeroes<F>(
    crossings: &CrossingRecord,
    coverage_limit: u64,
    is_prime: F,
) -> Result<PrimesInZeroes>
where
    F: Fn(u64) -> bool,
{
    let max = crossings.positions.last().copied().unwrap_or(0);
    if max > coverage_limit {
        return Err(Error::Range(format!(
            "primality source covers up to {coverage_limit} but the record reaches {max}"
        )));
    }
    let zero_count = crossings.positions.len() as u64;
    let prime_count = crossings.positions.iter().filter(|&&p| is_prime(p)).count() as u64;
    let x = zero_count as f64;
    let n_over_log_n = x / x.ln();
    let diff_percent = 100.0 * (prime_count as f64 - n_over_log_n) / prime_count as f64;
    Ok(PrimesInZeroes {
        zero_count,
        prime_count,
        n_over_log_n,
        diff_percent,
    })
}

/// One checkpoint row of the zero-growth comparison.
#[derive(Debug, Clone, Copy)]
pub struct ZeroGrowthRow {
    pub n: u64,
    pub zeroes: u64,
    pub sqrt_n: f64,
    pub cbrt_n: f64,
    pub pi_n: u64,
    /// Whether Z(n) lies in the [∛n, √n] band (boundaries included).
    pub within_band: bool,
}

/// Build the growth table from `(n, Z(n), π(n))` checkpoints.
pub fn zero_growth_report(checkpoints: &[(u64, u64, u64)]) -> Vec<ZeroGrowthRow> {
    checkpoints
        .iter()
        .map(|&(n, zeroes, pi_n)| {
            let sqrt_n = (n as f64).sqrt();
            let cbrt_n = (n as f64).cbrt();
            let z = zeroes as f64;
            // Tolerate float fuzz on exact boundaries like Z(100) = sqrt(100).
            let eps = 1e-9 * sqrt_n.max(1.0);
            ZeroGrowthRow {
                n,
                zeroes,
                sqrt_n,
                cbrt_n,
                pi_n,
                within_band: z >= cbrt_n - eps && z <= sqrt_n + eps,
            }
        })
        .collect()
}

/// Percentages of selected gaps and of gaps under cumulative thresholds.
#[derive(Debug, Clone)]
pub struct GapPercentages {
    /// Share of each gap in {4, 8, 12, 16}, in percent.
    pub per_gap: Vec<(u64, f64)>,
    /// Combined share of the four smallest multiples of 4.
    pub small_four_total: f64,
    /// Share of gaps `<= threshold` for thresholds {60, 100}.
    pub cumulative: Vec<(u64, f64)>,
}

pub fn gap_percentage_report(hist: &GapHistogram) -> Result<GapPercentages> {
    if hist.total_gaps == 0 {
        return Err(Error::InsufficientData("empty gap histogram".into()));
    }
    let total = hist.total_gaps as f64;
    let pct = |c: u64| 100.0 * c as f64 / total;
    let per_gap: Vec<(u64, f64)> = [4u64, 8, 12, 16]
        .iter()
        .map(|&g| (g, pct(hist.counts.get(&g).copied().unwrap_or(0))))
        .collect();
    let small_four_total = per_gap.iter().map(|&(_, p)| p).sum();
    let cumulative = [60u64, 100]
        .iter()
        .map(|&t| {
            let c: u64 = hist
                .counts
                .iter()
                .filter(|&(&g, _)| g <= t)
                .map(|(_, &c)| c)
                .sum();
            (t, pct(c))
        })
        .collect();
    Ok(GapPercentages {
        per_gap,
        small_four_total,
        cumulative,
    })
}

/// Gap shares recomputed over growing prefixes of the crossing list, the data
/// behind the percentage-decay curves. Prefix sizes are powers of 10 plus the
/// full list.
pub fn gap_percentage_series(
    positions: &[u64],
    tracked_gaps: &[u64],
) -> Vec<(u64, Vec<(u64, f64)>)> {
    let mut sizes: Vec<usize> = Vec::new();
    let mut s = 10usize;
    while s < positions.len() {
        sizes.push(s);
        s *= 10;
    }
    sizes.push(positions.len());
    let mut series = Vec::new();
    for size in sizes {
        if size < 2 {
            continue;
        }
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for w in positions[..size].windows(2) {
            *counts.entry(w[1] - w[0]).or_insert(0) += 1;
        }
        let total = (size - 1) as f64;
        let row = tracked_gaps
            .iter()
            .map(|&g| (g, 100.0 * counts.get(&g).copied().unwrap_or(0) as f64 / total))
            .collect();
        series.push((size as u64, row));
    }
    series
}

struct LinFit {
    intercept: f64,
    slope: f64,
    intercept_se: f64,
    slope_se: f64,
    r_squared: f64,
}

/// Ordinary least squares y = a + b x with standard errors (df = n − 2).
fn linear_fit(pts: &[(f64, f64)]) -> Result<LinFit> {
    let n = pts.len();
    if n < 2 {
        return Err(Error::InsufficientData("linear fit needs >= 2 points".into()));
    }
    let nf = n as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData(
            "linear fit needs at least two distinct x values".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    let (intercept_se, slope_se) = if n > 2 {
        let s2 = ss_res / (nf - 2.0);
        (
            (s2 * (1.0 / nf + mean_x * mean_x / sxx)).sqrt(),
            (s2 / sxx).sqrt(),
        )
    } else {
        (0.0, 0.0)
    };
    Ok(LinFit {
        intercept,
        slope,
        intercept_se,
        slope_se,
        r_squared,
    })
}
