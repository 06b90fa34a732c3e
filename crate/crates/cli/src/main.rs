//! `jladder`: build the prime walk, dump its zero lists, and reproduce the
//! statistical reports from the terminal.
//!
//! Summary output is machine-parseable `key=value` lines on stdout; progress
//! chatter goes to stderr. Exit codes: 0 success, 1 usage/insufficient data,
//! 2 I/O or corrupt input, 3 violated internal invariant.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use jladder_core::error::Error;
use jladder_core::sieve::{prime_count, trial_division_is_prime};
use jladder_core::stats;
use jladder_core::store;
use jladder_core::walker::{self, WalkConfig};
use jladder_core::{runner, verify, CrossingRecord};

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(name = "jladder", version, about = "Prime-walk ladder toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Walk the ladder to a limit, writing zero lists and a checkpoint.
    Walk(WalkArgs),
    /// Statistical reports over zero lists or fresh walks.
    #[command(subcommand)]
    Stats(StatsCmd),
    /// Synthetic ladders for sanity checks.
    #[command(subcommand)]
    Fixture(FixtureCmd),
    /// Run the invariant suite against the trial-division oracle.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct WalkArgs {
    #[arg(long)]
    limit: u64,
    /// Tracked level; repeatable. Defaults to 0.
    #[arg(long = "level")]
    levels: Vec<i64>,
    #[arg(long, default_value_t = 100_000_000)]
    segment_size: u64,
    /// Worker threads; defaults to $JLADDER_WORKERS or 1.
    #[arg(long)]
    workers: Option<usize>,
    /// Directory for zero lists and the checkpoint.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Segments between checkpoint writes.
    #[arg(long, default_value_t = 8)]
    checkpoint_every: usize,
    /// Ignore an existing checkpoint and start over.
    #[arg(long)]
    no_resume: bool,
    /// Also accumulate the balance/slope sums.
    #[arg(long)]
    balance: bool,
    /// Regression decimation for the balance sums.
    #[arg(long, default_value_t = 1)]
    decimation: u64,
}

#[derive(Subcommand)]
enum StatsCmd {
    /// Gap histogram, jumping champions, average gap, optional decay fit.
    Gaps(GapsArgs),
    /// Leading-digit distribution against the Benford expectation.
    Benford(ZeroInput),
    /// Last-digit distribution with its linear fit.
    Digits(ZeroInput),
    /// Through-origin slope of the walk and the model estimates.
    Slope(SlopeArgs),
    /// Sign counts and enclosed areas of the walk.
    Balance(SlopeArgs),
    /// Primes among the zero positions vs the X/ln X benchmark.
    Primes(ZeroInput),
    /// Zero count against the [cbrt(n), sqrt(n)] band.
    Growth(GrowthArgs),
}

#[derive(Args)]
struct ZeroInput {
    /// Zero-list file (native or two-column format).
    #[arg(long)]
    zeroes: PathBuf,
    /// Write the report as CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct GapsArgs {
    #[command(flatten)]
    input: ZeroInput,
    /// Fit an exponential decay to the histogram.
    #[arg(long)]
    fit: bool,
    /// Largest gap entering the fit.
    #[arg(long, default_value_t = 1000)]
    cutoff: u64,
    /// How many jumping champions to print.
    #[arg(long, default_value_t = 3)]
    champions: usize,
}

#[derive(Args)]
struct SlopeArgs {
    #[arg(long)]
    limit: u64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value_t = 100_000_000)]
    segment_size: u64,
    #[arg(long, default_value_t = 1)]
    decimation: u64,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct GrowthArgs {
    #[command(flatten)]
    input: ZeroInput,
    /// Comma-separated n values; defaults to powers of 10 up to the list end.
    #[arg(long, value_delimiter = ',')]
    points: Vec<u64>,
}

#[derive(Subcommand)]
enum FixtureCmd {
    /// The stacked-triangle ladder whose slope never settles to 0.
    Triangles(TrianglesArgs),
}

#[derive(Args)]
struct TrianglesArgs {
    #[arg(long)]
    k: u32,
    /// Write the ladder points as CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    limit: u64,
}

fn default_workers() -> usize {
    std::env::var("JLADDER_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&w| w >= 1)
        .unwrap_or(1)
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::Contract(_) | Error::InsufficientData(_) | Error::Range(_) => EXIT_USAGE,
        Error::Io { .. } | Error::Parse { .. } | Error::IncompatibleCheckpoint(_) => EXIT_IO,
        Error::Inconsistency(_) => EXIT_INVARIANT,
    }
}

fn fail(err: Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(exit_for(&err))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Walk(args) => cmd_walk(args),
        Command::Stats(cmd) => cmd_stats(cmd),
        Command::Fixture(FixtureCmd::Triangles(args)) => cmd_triangles(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn cmd_walk(args: WalkArgs) -> Result<(), Error> {
    if args.limit < 1 {
        return Err(Error::Contract("--limit must be >= 1".into()));
    }
    let mut wc = WalkConfig::new(args.limit);
    if !args.levels.is_empty() {
        wc.levels = args.levels.clone();
    }
    wc.segment_size = args.segment_size;
    wc.workers = args.workers.unwrap_or_else(default_workers);
    wc.collect_balance = args.balance;
    wc.slope_decimation = args.decimation;

    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::Io {
        path: args.out_dir.display().to_string(),
        source: e,
    })?;
    let mut rc = runner::RunnerConfig::new(wc, &args.out_dir);
    rc.checkpoint_every_segments = args.checkpoint_every;
    rc.resume = !args.no_resume;

    eprintln!("walking to {} with {} workers...", args.limit, rc.walk.workers);
    let t0 = Instant::now();
    let report = runner::run(&rc)?;
    let dt = t0.elapsed().as_secs_f64();

    println!("limit={}", args.limit);
    println!("workers={}", rc.walk.workers);
    for rec in &report.records {
        let key = if rec.level == 0 { "zeroes".to_string() } else { format!("crossings_level_{}", rec.level) };
        println!("{key}={}", rec.positions.len());
        if let Some(last) = rec.positions.last() {
            let lkey = if rec.level == 0 { "last_zero".to_string() } else { format!("last_crossing_level_{}", rec.level) };
            println!("{lkey}={last}");
        }
        println!(
            "zero_list_level_{}={}",
            rec.level,
            runner::zero_list_path(&args.out_dir, rec.level).display()
        );
    }
    if let Some(pi) = report.pi_limit {
        println!("pi_limit={pi}");
    }
    if let Some(from) = report.resumed_from {
        println!("resumed_from={from}");
    }
    println!("checkpoint={}", rc.checkpoint_path.display());
    println!("runtime_seconds={dt:.3}");
    Ok(())
}

fn load_zeroes(path: &Path) -> Result<CrossingRecord, Error> {
    Ok(store::read_zero_list(path)?.record)
}

fn cmd_stats(cmd: StatsCmd) -> Result<(), Error> {
    match cmd {
        StatsCmd::Gaps(args) => {
            let rec = load_zeroes(&args.input.zeroes)?;
            let hist = stats::gap_histogram(&rec)?;
            println!("gaps_total={}", hist.total_gaps);
            println!("max_gap={}", hist.max_gap);
            for (rank, (gap, count)) in
                stats::jumping_champions(&hist, args.champions).iter().enumerate()
            {
                println!("champion_{}={gap} count={count}", rank + 1);
            }
            let limit = rec.positions.last().copied().unwrap_or(0);
            let avg = stats::average_gap(&rec, limit)?;
            println!("avg_gap_gamma={:.6}", avg.gamma);
            println!("avg_gap_xi={:.6}", avg.xi);
            if args.fit {
                let fit = stats::exp_decay_fit(&hist, args.cutoff)?;
                println!("fit_amplitude={:.9}", fit.amplitude);
                println!("fit_rate={:.9}", fit.rate);
                println!("fit_r_squared={:.9}", fit.r_squared);
            }
            let pct = stats::gap_percentage_report(&hist)?;
            for (g, p) in &pct.per_gap {
                println!("gap_{g}_percent={p:.4}");
            }
            println!("gaps_le_60_percent={:.4}", pct.cumulative[0].1);
            println!("gaps_le_100_percent={:.4}", pct.cumulative[1].1);
            if let Some(csv) = &args.input.csv {
                store::write_gap_histogram_csv(&hist, csv)?;
                println!("csv={}", csv.display());
            }
            Ok(())
        }
        StatsCmd::Benford(args) => {
            let rec = load_zeroes(&args.zeroes)?;
            let report = stats::benford_histogram(&rec)?;
            for d in 0..9 {
                println!(
                    "digit_{}_observed={:.6} expected={:.6}",
                    d + 1,
                    report.observed[d],
                    report.expected[d]
                );
            }
            println!("l1_distance={:.6}", report.l1_distance);
            println!("chi_square={:.6}", report.chi_square);
            if let Some(csv) = &args.csv {
                store::write_benford_csv(&report, csv)?;
                println!("csv={}", csv.display());
            }
            Ok(())
        }
        StatsCmd::Digits(args) => {
            let rec = load_zeroes(&args.zeroes)?;
            let report = stats::last_digit_histogram(&rec)?;
            for (i, d) in stats::LAST_DIGITS.iter().enumerate() {
                println!(
                    "digit_{d}_count={} percent={:.4}",
                    report.counts[i], report.percentages[i]
                );
            }
            println!("fit_intercept={:.5}", report.intercept);
            println!("fit_slope={:.5}", report.slope);
            println!("fit_intercept_se={:.5}", report.intercept_se);
            println!("fit_slope_se={:.5}", report.slope_se);
            if let Some(csv) = &args.csv {
                store::write_last_digit_csv(&report, csv)?;
                println!("csv={}", csv.display());
            }
            Ok(())
        }
        StatsCmd::Slope(args) => {
            let (out, acc) = balance_walk(&args)?;
            let slope = acc.slope().ok_or_else(|| {
                Error::InsufficientData("no regression points accumulated".into())
            })?;
            let models = stats::slope_models(args.limit, &acc, out.pi_limit)?;
            println!("limit={}", args.limit);
            println!("slope={slope:.9e}");
            println!("model_inv_pi={:.9e}", models.inv_pi);
            println!("model_inv_sqrt_pi={:.9e}", models.inv_sqrt_pi);
            println!("model_diff_over_n={:.9e}", models.diff_over_n);
            if let Some(r) = models.ratio_based {
                println!("model_ratio_based={r:.9e}");
            }
            Ok(())
        }
        StatsCmd::Balance(args) => {
            let (_, acc) = balance_walk(&args)?;
            println!("limit={}", args.limit);
            println!("c_pos={}", acc.c_pos);
            println!("c_neg={}", acc.c_neg);
            println!("c_zero={}", acc.c_zero);
            println!("a_pos={:.1}", acc.a_pos());
            println!("a_neg={:.1}", acc.a_neg());
            if let Some(r) = acc.count_ratio() {
                println!("count_ratio={r:.6}");
            }
            if let Some(r) = acc.area_ratio() {
                println!("area_ratio={r:.6}");
            }
            if let Some(csv) = &args.csv {
                store::write_balance_csv(&acc, csv)?;
                println!("csv={}", csv.display());
            }
            Ok(())
        }
        StatsCmd::Primes(args) => {
            let rec = load_zeroes(&args.zeroes)?;
            let max = rec.positions.last().copied().unwrap_or(0);
            let report = stats::primes_in_zeroes(&rec, max, trial_division_is_prime)?;
            println!("zeroes={}", report.zero_count);
            println!("primes={}", report.prime_count);
            println!("x_over_log_x={:.3}", report.n_over_log_n);
            println!("diff_percent={:.3}", report.diff_percent);
            Ok(())
        }
        StatsCmd::Growth(args) => {
            let rec = load_zeroes(&args.input.zeroes)?;
            let last = rec.positions.last().copied().unwrap_or(0);
            let mut points = args.points.clone();
            if points.is_empty() {
                let mut p = 10u64;
                while p <= last {
                    points.push(p);
                    p = p.saturating_mul(10);
                }
            }
            if points.is_empty() {
                return Err(Error::InsufficientData(
                    "no growth points: the zero list is too short".into(),
                ));
            }
            let checkpoints: Vec<(u64, u64, u64)> = points
                .iter()
                .map(|&n| {
                    let z = rec.positions.partition_point(|&p| p <= n) as u64;
                    (n, z, prime_count(n))
                })
                .collect();
            let rows = stats::zero_growth_report(&checkpoints);
            for r in &rows {
                println!(
                    "n={} zeroes={} cbrt={:.3} sqrt={:.3} pi={} within_band={}",
                    r.n, r.zeroes, r.cbrt_n, r.sqrt_n, r.pi_n, r.within_band
                );
            }
            if let Some(csv) = &args.input.csv {
                store::write_growth_csv(&rows, csv)?;
                println!("csv={}", csv.display());
            }
            Ok(())
        }
    }
}

fn balance_walk(
    args: &SlopeArgs,
) -> Result<(jladder_core::WalkOutput, stats::BalanceAccumulator), Error> {
    let mut wc = WalkConfig::new(args.limit);
    wc.segment_size = args.segment_size;
    wc.workers = args.workers.unwrap_or_else(default_workers);
    wc.collect_balance = true;
    wc.slope_decimation = args.decimation;
    eprintln!("walking to {} for balance sums...", args.limit);
    let out = if wc.workers > 1 {
        walker::parallel_walk(&wc)?
    } else {
        walker::walk(&wc)?
    };
    let acc = out
        .balance
        .clone()
        .ok_or_else(|| Error::Inconsistency("balance walk returned no accumulator".into()))?;
    Ok((out, acc))
}

fn cmd_triangles(args: TrianglesArgs) -> Result<(), Error> {
    let ladder = walker::triangle_ladder(args.k)?;
    println!("k={}", args.k);
    println!("points={}", ladder.points.len());
    for j in 1..=args.k {
        let stage = walker::triangle_ladder(j)?;
        let eps = stats::slope_fit(stage.points.iter().copied(), 1)?;
        println!("epsilon_{j}={eps:.6}");
    }
    if let Some(csv) = &args.csv {
        store::write_triangle_csv(&ladder, csv)?;
        println!("csv={}", csv.display());
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Error> {
    if args.limit > 2_000_000 {
        return Err(Error::Contract(
            "--limit above 2000000 is not supported (the oracle is trial division)".into(),
        ));
    }
    let report = verify::run_suite(args.limit)?;
    for check in &report.checks {
        println!("ok {} ({})", check.name, check.detail);
    }
    println!("zeroes={}", report.zero_count);
    println!("result=pass");
    Ok(())
}
