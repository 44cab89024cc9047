//! Timing harness: alpha-level bounds of a statistic, every method, best of
//! `r` runs, CSV `method,n,seconds,prob`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::Args;
use ncprob_core::gof::{self, StatisticSpec};
use ncprob_core::{ncprob, DiscreteBounds, Error, Method, NcOptions, ProbabilityResult};

use crate::format::g17;
use crate::Failure;

/// Methods whose probabilities differ by more than this (relative) fail the run.
pub const AGREEMENT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "bj-plus")]
    pub stat: String,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Threshold tolerance on the p-value.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// Comma-separated methods, or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub method: Vec<String>,
    #[arg(long)]
    pub jump_size: Option<usize>,
    /// Per (method, n) wall-time budget; methods over it are skipped.
    #[arg(long, default_value_t = 600.0)]
    pub budget_seconds: f64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// One timed evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRecord {
    pub method: Method,
    pub n: usize,
    /// Best wall time over the repeats.
    pub seconds: f64,
    pub value: ProbabilityResult,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BenchRow {
    Done(BenchRecord),
    Skipped { method: Method, n: usize },
}

impl BenchRow {
    pub fn csv(&self) -> String {
        match self {
            BenchRow::Done(r) => format!("{},{},{},{}", r.method, r.n, g17(r.seconds), g17(r.value.prob)),
            BenchRow::Skipped { method, n } => format!("{method},{n},skipped,"),
        }
    }
}

fn parse_methods(names: &[String]) -> Result<Vec<Method>, Failure> {
    let mut methods = Vec::new();
    for name in names {
        if name == "all" {
            methods.extend(Method::ALL);
        } else {
            methods.push(name.parse::<Method>()?);
        }
    }
    let mut unique = Vec::new();
    for m in methods {
        if !unique.contains(&m) {
            unique.push(m);
        }
    }
    Ok(unique)
}

/// Best of `repeats` timings, or `None` once a run passes the budget.
fn time_method(
    bounds: &DiscreteBounds,
    method: Method,
    jump_size: Option<usize>,
    repeats: usize,
    budget: Duration,
) -> Result<Option<(f64, ProbabilityResult)>, Failure> {
    let mut best: Option<(f64, ProbabilityResult)> = None;
    for _ in 0..repeats {
        let start = Instant::now();
        let options = NcOptions { method, jump_size, deadline: Some(start + budget) };
        let value = match ncprob(bounds, &options) {
            Ok(v) => v,
            Err(Error::DeadlineExceeded) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let seconds = start.elapsed().as_secs_f64().max(1e-9);
        if best.map_or(true, |(s, _)| seconds < s) {
            best = Some((seconds, value));
        }
    }
    Ok(best)
}

pub fn run(args: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let spec: StatisticSpec = args.stat.parse()?;
    let methods = parse_methods(&args.method)?;
    if args.sizes.iter().any(|&n| n == 0) {
        return Err(Failure::input("sizes must be positive"));
    }
    if args.repeats == 0 {
        return Err(Failure::input("--repeats must be at least 1"));
    }
    if !(args.budget_seconds > 0.0 && args.budget_seconds.is_finite()) {
        return Err(Failure::input(format!("--budget-seconds must be positive, got {}", args.budget_seconds)));
    }
    if args.jump_size == Some(0) {
        return Err(Failure::input("--jump-size must be at least 1"));
    }
    let budget = Duration::from_secs_f64(args.budget_seconds);
    let mut sink: Box<dyn Write + '_> = match &args.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(&mut *out),
    };
    writeln!(sink, "method,n,seconds,prob")?;

    // A method that ran out of budget at some n is not retried at larger n.
    let mut exhausted: Vec<(Method, usize)> = Vec::new();
    let mut disagreements = Vec::new();
    for &n in &args.sizes {
        let level = gof::threshold_with(&spec, n, args.alpha, args.tol, &NcOptions::default())?.level;
        let bounds = gof::bounds_for_level(&spec, n, level)?;
        writeln!(err, "n={n}: {} level {}", spec.name(), g17(level))?;
        let mut done: Vec<BenchRecord> = Vec::new();
        for &method in &methods {
            let skip = exhausted.iter().any(|&(m, at)| m == method && at <= n);
            let outcome = if skip { None } else { time_method(&bounds, method, args.jump_size, args.repeats, budget)? };
            let row = match outcome {
                Some((seconds, value)) => {
                    let record = BenchRecord { method, n, seconds, value };
                    done.push(record);
                    BenchRow::Done(record)
                }
                None => {
                    exhausted.push((method, n));
                    BenchRow::Skipped { method, n }
                }
            };
            writeln!(sink, "{}", row.csv())?;
            sink.flush()?;
        }
        for (i, a) in done.iter().enumerate() {
            for b in &done[i + 1..] {
                let diff = relative_difference(a.value.prob, b.value.prob);
                if diff > AGREEMENT_TOLERANCE {
                    disagreements.push(format!("n={n}: {} and {} differ by {diff:e} relative", a.method, b.method));
                }
            }
        }
    }
    sink.flush()?;
    if disagreements.is_empty() {
        Ok(())
    } else {
        Err(Failure::numerical(format!("methods disagree: {}", disagreements.join("; "))))
    }
}

fn relative_difference(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
