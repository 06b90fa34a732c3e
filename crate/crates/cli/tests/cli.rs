use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn jladder(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jladder"))
        .args(args)
        .current_dir(dir)
        .env_remove("JLADDER_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn assert_line(out: &Output, line: &str) {
    let text = stdout(out);
    assert!(
        text.lines().any(|l| l == line),
        "expected line '{line}' in:\n{text}"
    );
}

#[test]
fn walk_reports_zero_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = jladder(&["walk", "--limit", "1000", "--out-dir", "run"], dir.path());
    assert!(out.status.success(), "{out:?}");
    assert_line(&out, "zeroes=16");
    assert_line(&out, "pi_limit=168");
    assert!(dir.path().join("run/level_0.txt").exists());
    assert!(dir.path().join("run/checkpoint.json").exists());
}

#[test]
fn walk_multiple_levels_writes_one_file_each() {
    let dir = tempfile::tempdir().unwrap();
    let out = jladder(
        &["walk", "--limit", "1000", "--level", "0", "--level", "1", "--out-dir", "."],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    assert!(dir.path().join("level_0.txt").exists());
    assert!(dir.path().join("level_1.txt").exists());
}

#[test]
fn walk_limit_zero_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = jladder(&["walk", "--limit", "0"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn workers_do_not_change_output_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = jladder(
        &["walk", "--limit", "200000", "--segment-size", "10000", "--workers", "1", "--out-dir", "a"],
        dir.path(),
    );
    let b = jladder(
        &["walk", "--limit", "200000", "--segment-size", "10000", "--workers", "4", "--out-dir", "b"],
        dir.path(),
    );
    assert!(a.status.success() && b.status.success());
    let fa = fs::read(dir.path().join("a/level_0.txt")).unwrap();
    let fb = fs::read(dir.path().join("b/level_0.txt")).unwrap();
    assert_eq!(fa, fb);
}

#[test]
fn env_var_sets_default_workers() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_jladder"))
        .args(["walk", "--limit", "1000", "--out-dir", "."])
        .current_dir(dir.path())
        .env("JLADDER_WORKERS", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_line(&out, "workers=3");
}

#[test]
fn stats_primes_matches_published_row() {
    let dir = tempfile::tempdir().unwrap();
    jladder(&["walk", "--limit", "10000", "--out-dir", "."], dir.path());
    let out = jladder(&["stats", "primes", "--zeroes", "level_0.txt"], dir.path());
    assert!(out.status.success(), "{out:?}");
    assert_line(&out, "zeroes=59");
    assert_line(&out, "primes=21");
}

#[test]
fn stats_gaps_emits_csv() {
    let dir = tempfile::tempdir().unwrap();
    jladder(&["walk", "--limit", "100000", "--out-dir", "."], dir.path());
    let out = jladder(
        &["stats", "gaps", "--zeroes", "level_0.txt", "--csv", "gaps.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    let csv = fs::read_to_string(dir.path().join("gaps.csv")).unwrap();
    assert!(csv.starts_with("gap,count\n"));
    assert_line(&out, "champion_1=4 count=29");
}

#[test]
fn stats_benford_on_empty_list_is_insufficient_data() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("empty.txt"), "# count: 0\n").unwrap();
    let out = jladder(&["stats", "benford", "--zeroes", "empty.txt"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("insufficient data"));
}

#[test]
fn missing_input_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = jladder(&["stats", "primes", "--zeroes", "nope.txt"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_small_limits() {
    let dir = tempfile::tempdir().unwrap();
    let out = jladder(&["verify", "--limit", "10"], dir.path());
    assert!(out.status.success(), "{out:?}");
    assert_line(&out, "zeroes=3");
    assert_line(&out, "result=pass");

    let out = jladder(&["verify", "--limit", "100000"], dir.path());
    assert!(out.status.success(), "{out:?}");
    assert_line(&out, "result=pass");
}

#[test]
fn fixture_triangles() {
    let dir = tempfile::tempdir().unwrap();
    let out = jladder(&["fixture", "triangles", "--k", "1"], dir.path());
    assert!(out.status.success());
    assert_line(&out, "points=3");

    let out = jladder(&["fixture", "triangles", "--k", "0"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero_and_bad_flag_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(jladder(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(jladder(&["walk", "--bogus"], dir.path()).status.code(), Some(1));
    assert_eq!(jladder(&[], dir.path()).status.code(), Some(1));
}

#[test]
fn resume_continues_toward_larger_limit() {
    let dir = tempfile::tempdir().unwrap();
    jladder(&["walk", "--limit", "10000", "--segment-size", "1000", "--out-dir", "."], dir.path());
    let out = jladder(
        &["walk", "--limit", "20000", "--segment-size", "1000", "--out-dir", "."],
        dir.path(),
    );
    assert!(out.status.success(), "{out:?}");
    assert_line(&out, "resumed_from=10000");

    // Must match a from-scratch walk to the same limit byte for byte.
    let fresh = tempfile::tempdir().unwrap();
    jladder(&["walk", "--limit", "20000", "--segment-size", "1000", "--out-dir", "."], fresh.path());
    let resumed = fs::read(dir.path().join("level_0.txt")).unwrap();
    let scratch = fs::read(fresh.path().join("level_0.txt")).unwrap();
    assert_eq!(resumed, scratch);
}
