//! The `ncprob` command line tool.
//!
//! Exit codes: 0 on success, 1 for usage or input errors, 2 for numerical
//! failures (including benchmark and self-test disagreements).

pub mod alternative;
pub mod bench;
pub mod format;
pub mod selftest;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ncprob_core::gof::{self, StatisticSpec};
use ncprob_core::{ncprob, DiscreteBounds, Error, Method, NcOptions, ProbabilityResult};
use serde_json::json;

use crate::format::{g17, json_log};

#[derive(Debug, Parser)]
#[command(name = "ncprob", version, about = "Exact one-sided boundary crossing probabilities for uniform order statistics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// P(X(i) <= B_i for all i) for bounds read from a file (`-` for stdin).
    Oneside {
        file: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long)]
        json: bool,
    },
    /// P-value of a one-sided statistic at an observed level.
    Pvalue {
        #[command(flatten)]
        stat: StatArgs,
        #[arg(long, allow_negative_numbers = true)]
        value: f64,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long)]
        json: bool,
    },
    /// Level at which a statistic's p-value equals alpha.
    Threshold {
        #[command(flatten)]
        stat: StatArgs,
        #[arg(long)]
        alpha: f64,
        /// Allowed |p-value - alpha|.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long)]
        json: bool,
    },
    /// Rejection probability at a level under an alternative.
    Power {
        #[command(flatten)]
        stat: StatArgs,
        /// Level of the test; defaults to the alpha-level threshold.
        #[arg(long, allow_negative_numbers = true, conflicts_with = "alpha")]
        value: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Built-in alternative: identity, pow:A or normal-shift:MU.
        #[arg(long, conflicts_with = "transform")]
        alt: Option<String>,
        /// File of `u g(u)` knots, one pair per line.
        #[arg(long)]
        transform: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long)]
        json: bool,
    },
    /// Time the methods on alpha-level bounds of a statistic and write CSV.
    Bench(bench::BenchArgs),
    /// Check all methods against the independent oracles.
    Selftest {
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// fast, fft, poisson or binomial.
    #[arg(long, default_value = "fast")]
    pub method: String,
    /// Block size of the fast method.
    #[arg(long)]
    pub jump_size: Option<usize>,
}

impl EngineArgs {
    fn options(&self) -> Result<NcOptions, Failure> {
        let method: Method = self.method.parse().map_err(Failure::from)?;
        if self.jump_size == Some(0) {
            return Err(Failure::input("--jump-size must be at least 1"));
        }
        Ok(NcOptions { method, jump_size: self.jump_size, deadline: None })
    }
}

#[derive(Debug, Clone, Args)]
pub struct StatArgs {
    /// bj-plus, ks-plus, ks-minus or hc.
    #[arg(long)]
    pub stat: String,
    /// Sample size.
    #[arg(long)]
    pub n: usize,
}

impl StatArgs {
    fn spec(&self) -> Result<StatisticSpec, Failure> {
        self.stat.parse().map_err(Failure::from)
    }
}

/// A command failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Parse { .. } | Error::UnsupportedSize { .. } => Failure::input(e.to_string()),
            Error::NumericalFailure(_) | Error::ContractViolation(_) | Error::DeadlineExceeded => {
                Failure::numerical(e.to_string())
            }
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::input(e.to_string())
    }
}

/// Parses `args` and runs the command, writing results to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Oneside { file, engine, json } => {
            let options = engine.options()?;
            let bounds = read_bounds(&file)?;
            let result = ncprob(&bounds, &options)?;
            write_probability(out, bounds.n(), &result, json)
        }
        Command::Pvalue { stat, value, engine, json } => {
            let spec = stat.spec()?;
            let options = engine.options()?;
            let p = gof::pvalue_with(&spec, stat.n, value, &options)?;
            if json {
                let v = json!({"stat": spec.name(), "n": stat.n, "value": value, "pvalue": p, "method": options.method.name()});
                writeln!(out, "{v}")?;
            } else {
                writeln!(out, "{}", g17(p))?;
            }
            Ok(())
        }
        Command::Threshold { stat, alpha, tol, engine, json } => {
            let spec = stat.spec()?;
            let options = engine.options()?;
            let t = gof::threshold_with(&spec, stat.n, alpha, tol, &options)?;
            if json {
                let v = json!({
                    "stat": spec.name(),
                    "n": stat.n,
                    "alpha": alpha,
                    "threshold": t.level,
                    "pvalue": t.pvalue,
                    "evaluations": t.evaluations,
                    "method": options.method.name(),
                });
                writeln!(out, "{v}")?;
            } else {
                writeln!(out, "{}", g17(t.level))?;
            }
            Ok(())
        }
        Command::Power { stat, value, alpha, tol, alt, transform, engine, json } => {
            let spec = stat.spec()?;
            let options = engine.options()?;
            let g = match (&alt, &transform) {
                (_, Some(path)) => alternative::from_file(&read_text(path)?)?,
                (Some(name), None) => alternative::parse(name)?,
                (None, None) => return Err(Failure::input("power needs --alt or --transform")),
            };
            let level = match (value, alpha) {
                (Some(s), _) => s,
                (None, Some(a)) => gof::threshold_with(&spec, stat.n, a, tol, &options)?.level,
                (None, None) => return Err(Failure::input("power needs --value or --alpha")),
            };
            let p = gof::power_with(&spec, stat.n, level, &g, &options)?;
            if json {
                let v = json!({"stat": spec.name(), "n": stat.n, "value": level, "power": p, "method": options.method.name()});
                writeln!(out, "{v}")?;
            } else {
                writeln!(out, "{}", g17(p))?;
            }
            Ok(())
        }
        Command::Bench(args) => bench::run(&args, out, err),
        Command::Selftest { inject_fault } => selftest::run(inject_fault, out),
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    }
}

fn read_bounds(path: &Path) -> Result<DiscreteBounds, Failure> {
    let text = read_text(path)?;
    DiscreteBounds::parse_text(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_probability(out: &mut dyn Write, n: usize, r: &ProbabilityResult, json: bool) -> Result<(), Failure> {
    if json {
        let v = json!({"n": n, "prob": r.prob, "log_prob": json_log(r.log_prob), "method": r.method.name()});
        writeln!(out, "{v}")?;
    } else {
        writeln!(out, "{}", g17(r.prob))?;
    }
    Ok(())
}
