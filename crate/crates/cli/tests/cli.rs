use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use tempfile::NamedTempFile;

fn ncprob(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncprob")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn number(o: &Output) -> f64 {
    assert!(o.status.success(), "{}", stderr(o));
    stdout(o).trim().parse().unwrap()
}

fn file(contents: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

fn path(f: &NamedTempFile) -> &str {
    f.path().to_str().unwrap()
}

#[test]
fn oneside_examples() {
    let f = file("0.5\n0.7\n");
    let o = ncprob(&["oneside", path(&f)]);
    assert!((number(&o) - 0.45).abs() < 1e-12);
    assert_eq!(stdout(&o).trim().len(), "0.45000000000000012".len());

    let ones = file("# three ones\n1\n1.0\n\n1\n");
    assert_eq!(stdout(&ncprob(&["oneside", path(&ones)])), "1\n");

    for method in ["fast", "fft", "poisson", "binomial"] {
        let o = ncprob(&["oneside", path(&f), "--method", method]);
        assert!((number(&o) - 0.45).abs() < 1e-12, "{method}");
    }
    let o = ncprob(&["oneside", path(&f), "--method", "fast", "--jump-size", "1"]);
    assert!((number(&o) - 0.45).abs() < 1e-12);
}

#[test]
fn oneside_reads_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ncprob"))
        .args(["oneside", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"0.25\n0.5\n0.75\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert!((number(&o) - 0.25).abs() < 1e-12);
}

#[test]
fn oneside_json() {
    let f = file("0.5\n0.7\n");
    let o = ncprob(&["oneside", path(&f), "--json", "--method", "fft"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n"], 2);
    assert_eq!(v["method"], "fft");
    assert!((v["prob"].as_f64().unwrap() - 0.45).abs() < 1e-12);
    assert!((v["log_prob"].as_f64().unwrap() - 0.45f64.ln()).abs() < 1e-12);

    let zero = file("0\n0.5\n");
    let v: serde_json::Value = serde_json::from_str(&stdout(&ncprob(&["oneside", path(&zero), "--json"]))).unwrap();
    assert_eq!(v["prob"].as_f64(), Some(0.0));
    assert!(v["log_prob"].is_null());
}

#[test]
fn malformed_input_exits_1_naming_the_line() {
    let f = file("0.5\n1.2\n");
    let o = ncprob(&["oneside", path(&f)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let f = file("# header\n0.1\nabc\n");
    let o = ncprob(&["oneside", path(&f)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = ncprob(&["oneside", "/nonexistent/bounds.txt"]);
    assert_eq!(o.status.code(), Some(1));

    let f = file("0.5\n");
    assert_eq!(ncprob(&["oneside", path(&f), "--method", "quick"]).status.code(), Some(1));
    assert_eq!(ncprob(&["oneside", path(&f), "--jump-size", "0"]).status.code(), Some(1));
    assert_eq!(ncprob(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(ncprob(&[]).status.code(), Some(1));
    assert_eq!(ncprob(&["--help"]).status.code(), Some(0));
}

#[test]
fn output_is_byte_stable() {
    let f = file("0.1\n0.3\n0.35\n0.8\n0.9\n");
    let a = ncprob(&["oneside", path(&f), "--json"]);
    let b = ncprob(&["oneside", path(&f), "--json"]);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&ncprob(&["pvalue", "--stat", "hc", "--n", "40", "--value", "2.5"]));
    assert!(!text.contains(',') && text.trim().parse::<f64>().is_ok(), "{text}");
}

#[test]
fn pvalue_and_threshold_examples() {
    let p = number(&ncprob(&["pvalue", "--stat", "ks-minus", "--n", "1", "--value", "0.95"]));
    assert!((p - 0.05).abs() < 1e-12);
    let s = number(&ncprob(&["threshold", "--stat", "ks-minus", "--n", "1", "--alpha", "0.05"]));
    assert!((s - 0.95).abs() < 1e-7);
    let s = number(&ncprob(&["threshold", "--stat", "ks-minus", "--n", "1", "--alpha", "0.05", "--tol", "1e-13"]));
    assert!((s - 0.95).abs() < 1e-12);

    let o = ncprob(&["threshold", "--stat", "hc", "--n", "30", "--alpha", "0.01", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["pvalue"].as_f64().unwrap() - 0.01).abs() <= 1e-8);
    assert!(v["evaluations"].as_u64().unwrap() > 0);
}

#[test]
fn unknown_statistic_lists_valid_names() {
    let o = ncprob(&["pvalue", "--stat", "anderson", "--n", "3", "--value", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    for name in ["bj-plus", "ks-plus", "ks-minus", "hc"] {
        assert!(e.contains(name), "{e}");
    }
    let o = ncprob(&["pvalue", "--stat", "ks-minus", "--n", "3", "--value", "7"]);
    assert_eq!(o.status.code(), Some(1));
    let o = ncprob(&["threshold", "--stat", "ks-minus", "--n", "3", "--alpha", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn berk_jones_round_trip_at_ten_thousand() {
    let s = stdout(&ncprob(&["threshold", "--stat", "bj-plus", "--n", "10000", "--alpha", "0.05"]));
    let p = number(&ncprob(&["pvalue", "--stat", "bj-plus", "--n", "10000", "--value", s.trim()]));
    assert!((p - 0.05).abs() <= 1e-6, "{p}");
}

#[test]
fn power_examples() {
    let s = 0.3;
    let p = number(&ncprob(&["power", "--stat", "ks-minus", "--n", "1", "--value", "0.3", "--alt", "pow:2"]));
    assert!((p - (1.0 - s * s)).abs() < 1e-12);

    let pv = number(&ncprob(&["pvalue", "--stat", "bj-plus", "--n", "50", "--value", "0.01"]));
    let pw = number(&ncprob(&["power", "--stat", "bj-plus", "--n", "50", "--value", "0.01", "--alt", "identity"]));
    assert_eq!(pv, pw);

    let knots = file("# identity as knots\n0 0\n1 1\n");
    let pk = number(&ncprob(&["power", "--stat", "bj-plus", "--n", "50", "--value", "0.01", "--transform", path(&knots)]));
    assert!((pk - pv).abs() < 1e-14);

    // Berk-Jones M+ rejects for small order statistics, so a down shift raises power.
    let down = number(&ncprob(&["power", "--stat", "bj-plus", "--n", "100", "--alpha", "0.05", "--alt", "normal-shift:-0.5"]));
    let up = number(&ncprob(&["power", "--stat", "bj-plus", "--n", "100", "--alpha", "0.05", "--alt", "normal-shift:0.5"]));
    assert!(down > 0.5 && up < 0.05, "{down} {up}");
}

#[test]
fn power_input_errors() {
    let base = ["power", "--stat", "bj-plus", "--n", "10", "--value", "0.05"];
    let run = |extra: &[&str]| {
        let mut args = base.to_vec();
        args.extend_from_slice(extra);
        ncprob(&args).status.code()
    };
    assert_eq!(run(&[]), Some(1));
    assert_eq!(run(&["--alt", "pow:0"]), Some(1));
    assert_eq!(run(&["--alt", "laplace:1"]), Some(1));
    let bad = file("0 0\n0.5 0.6 0.7\n1 1\n");
    let o = ncprob(&[&base[..], &["--transform", path(&bad)]].concat());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    let decreasing = file("0 0\n0.4 0.8\n0.6 0.3\n1 1\n");
    assert_eq!(run(&["--transform", path(&decreasing)]), Some(1));
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("method,n,seconds,prob"));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn bench_all_methods_agree() {
    let o = ncprob(&["bench", "--sizes", "100", "--repeats", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    let methods: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(methods, ["fast", "fft", "poisson", "binomial"]);
    let probs: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    for p in &probs {
        assert!((p - probs[3]).abs() <= 1e-10 * probs[3]);
        assert!((p - 0.95).abs() < 1e-6, "{p}");
    }
    for r in &rows {
        assert_eq!(r[1], "100");
        assert!(r[2].parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn bench_fast_matches_fft_at_ten_thousand() {
    let out = NamedTempFile::new().unwrap();
    let o = ncprob(&["bench", "--sizes", "10000", "--method", "fast,fft", "--repeats", "1", "--out", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let rows = csv_rows(&std::fs::read_to_string(out.path()).unwrap());
    assert_eq!(rows.len(), 2);
    let (fast, fft): (f64, f64) = (rows[0][3].parse().unwrap(), rows[1][3].parse().unwrap());
    assert!((fast - fft).abs() <= 1e-9 * fft, "{fast} vs {fft}");
}

#[test]
fn bench_skips_methods_over_budget() {
    let o = ncprob(&[
        "bench",
        "--sizes",
        "20,3000,4000",
        "--method",
        "fast,poisson",
        "--repeats",
        "1",
        "--budget-seconds",
        "0.2",
        "--stat",
        "ks-minus",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[1][0], "poisson");
    assert_ne!(rows[1][2], "skipped");
    for r in [&rows[3], &rows[5]] {
        assert_eq!((r[0].as_str(), r[2].as_str(), r[3].as_str()), ("poisson", "skipped", ""));
    }
    assert!(rows[4][2].parse::<f64>().is_ok());
}

#[test]
fn bench_input_errors() {
    assert_eq!(ncprob(&["bench", "--sizes", "0"]).status.code(), Some(1));
    assert_eq!(ncprob(&["bench", "--sizes", "10", "--repeats", "0"]).status.code(), Some(1));
    assert_eq!(ncprob(&["bench", "--sizes", "10", "--method", "fast,slow"]).status.code(), Some(1));
    assert_eq!(ncprob(&["bench", "--sizes", "10", "--budget-seconds", "-1"]).status.code(), Some(1));
    assert_eq!(ncprob(&["bench"]).status.code(), Some(1));
    let o = ncprob(&["bench", "--sizes", "10", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!Path::new("/nonexistent/dir/out.csv").exists());
}

#[test]
fn selftest_passes_on_a_clean_build() {
    let o = ncprob(&["selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 4);
    assert!(text.contains("max abs error") && text.contains("max rel difference"));
    assert!(text.contains("4/4 suites passed"));
}

#[test]
fn selftest_detects_injected_fault() {
    let o = ncprob(&["selftest", "--inject-fault"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("FAIL"));
    let help = stdout(&ncprob(&["selftest", "--help"]));
    assert!(!help.contains("inject"));
}
