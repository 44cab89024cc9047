//! Oracle suite behind `ncprob selftest`.

use std::io::Write;

use ncprob_core::gof::{self, berk_jones_plus, ks_minus};
use ncprob_core::oracle::{monte_carlo_ncprob, quadrature_ncprob, smirnov_ksminus_pvalue, QUADRATURE_MAX_N};
use ncprob_core::{ncprob, DiscreteBounds, Method, NcOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Failure;

const SEED: u64 = 0x5e1f_7e57;

/// Relative perturbation applied to every probability by `--inject-fault`.
const FAULT: f64 = 1e-6;

pub struct SuiteReport {
    pub name: &'static str,
    pub measure: &'static str,
    pub worst: f64,
    pub limit: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.worst <= self.limit
    }
}

struct Engine {
    fault: bool,
}

impl Engine {
    fn prob(&self, bounds: &DiscreteBounds, method: Method) -> Result<f64, Failure> {
        let p = ncprob(bounds, &NcOptions::with_method(method))?.prob;
        Ok(if self.fault { p * (1.0 - FAULT) } else { p })
    }
}

fn random_bounds(rng: &mut ChaCha8Rng, n: usize) -> DiscreteBounds {
    let gamma = if rng.gen_bool(0.5) { 1.0 } else { rng.gen_range(0.2..1.0) };
    let mut raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>().powf(gamma)).collect();
    raw.sort_by(f64::total_cmp);
    DiscreteBounds::new(raw).expect("values in [0, 1]")
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn quadrature_suite(engine: &Engine, rng: &mut ChaCha8Rng) -> Result<SuiteReport, Failure> {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=QUADRATURE_MAX_N.min(8));
        let bounds = random_bounds(rng, n);
        let exact = quadrature_ncprob(&bounds)?;
        for method in Method::ALL {
            worst = worst.max((engine.prob(&bounds, method)? - exact).abs());
        }
    }
    Ok(SuiteReport { name: "quadrature (n <= 8)", measure: "max abs error", worst, limit: 1e-10 })
}

fn cross_method_suite(engine: &Engine, rng: &mut ChaCha8Rng) -> Result<SuiteReport, Failure> {
    let mut worst: f64 = 0.0;
    for _ in 0..60 {
        let n = rng.gen_range(1..=120);
        let bounds = random_bounds(rng, n);
        let reference = engine.prob(&bounds, Method::Binomial)?;
        for method in [Method::Poisson, Method::Fft, Method::Fast] {
            worst = worst.max(relative(engine.prob(&bounds, method)?, reference));
        }
    }
    if engine.fault {
        // The perturbation is common to all methods; compare against an oracle too.
        let bounds = DiscreteBounds::new(vec![0.5, 0.7]).expect("valid bounds");
        worst = worst.max(relative(engine.prob(&bounds, Method::Fast)?, quadrature_ncprob(&bounds)?));
    }
    Ok(SuiteReport { name: "cross-method (n <= 120)", measure: "max rel difference", worst, limit: 1e-10 })
}

fn monte_carlo_suite(engine: &Engine) -> Result<SuiteReport, Failure> {
    let mut worst: f64 = 0.0;
    for (k, n) in [5usize, 20, 50, 200].into_iter().enumerate() {
        let bounds = gof::bounds_for_level(&berk_jones_plus(), n, 0.02)?;
        let p = engine.prob(&bounds, Method::Fast)?;
        let mc = monte_carlo_ncprob(&bounds, 400_000, SEED + k as u64)?;
        worst = worst.max(mc.z_score(p));
    }
    Ok(SuiteReport { name: "Monte Carlo (4e5 trials)", measure: "max |z|", worst, limit: 4.5 })
}

fn smirnov_suite(engine: &Engine) -> Result<SuiteReport, Failure> {
    let mut worst: f64 = 0.0;
    let spec = ks_minus();
    for n in [10usize, 100, 1000] {
        for t in 1..=10 {
            let d = t as f64 * 0.15 / (n as f64).sqrt();
            let bounds = gof::bounds_for_level(&spec, n, d)?;
            let p = 1.0 - engine.prob(&bounds, Method::Fast)?;
            worst = worst.max((p - smirnov_ksminus_pvalue(n, d)?).abs());
        }
    }
    Ok(SuiteReport { name: "Smirnov ks-minus", measure: "max abs error", worst, limit: 1e-9 })
}

pub fn run_suites(inject_fault: bool) -> Result<Vec<SuiteReport>, Failure> {
    let engine = Engine { fault: inject_fault };
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    Ok(vec![
        quadrature_suite(&engine, &mut rng)?,
        cross_method_suite(&engine, &mut rng)?,
        monte_carlo_suite(&engine)?,
        smirnov_suite(&engine)?,
    ])
}

pub fn run(inject_fault: bool, out: &mut dyn Write) -> Result<(), Failure> {
    let reports = run_suites(inject_fault)?;
    for r in &reports {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        writeln!(out, "{status}  {:<26} {} {:.3e} (limit {:e})", r.name, r.measure, r.worst, r.limit)?;
    }
    let passed = reports.iter().filter(|r| r.passed()).count();
    writeln!(out, "{passed}/{} suites passed", reports.len())?;
    if passed == reports.len() {
        Ok(())
    } else {
        Err(Failure::numerical("self-test failed"))
    }
}
