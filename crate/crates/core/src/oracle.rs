//! Independent reference values: Monte Carlo, exact repeated integration
//! for small `n`, and the Birnbaum–Tingey finite sum for `D⁻`.
//!
//! The Monte Carlo generator is ChaCha8 (`rand_chacha`), whose output stream
//! is fixed by the seed on every platform.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use statrs::function::factorial::ln_factorial;

use crate::boundary::DiscreteBounds;
use crate::error::{invalid, Error, Result};

/// Largest size accepted by [`quadrature_ncprob`].
pub const QUADRATURE_MAX_N: usize = 10;

/// A Monte Carlo estimate of NCPROB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    /// `sqrt(estimate·(1 - estimate)/trials)`.
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Number of standard errors between the estimate and `p`. A zero
    /// standard error counts exact agreement as 0 and anything else as
    /// infinite.
    pub fn z_score(&self, p: f64) -> f64 {
        let d = (p - self.estimate).abs();
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Fraction of `trials` seeded uniform samples with `X(i) <= B_i` for all `i`.
///
/// Order statistics are generated from the top down, `X(n) = V^{1/n}` and
/// `X(k) = X(k+1)·V^{1/k}`, in log space, so a trial stops at its first
/// violation without sorting.
pub fn monte_carlo_ncprob(bounds: &DiscreteBounds, trials: u64, seed: u64) -> Result<McEstimate> {
    if trials == 0 {
        return Err(invalid("Monte Carlo needs at least one trial"));
    }
    let n = bounds.n();
    let mut hits = 0u64;
    if !bounds.forces_zero() {
        let log_b: Vec<f64> = bounds.as_slice().iter().map(|b| b.ln()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        'trial: for _ in 0..trials {
            let mut log_x = 0.0;
            for k in (1..=n).rev() {
                let e: f64 = Exp1.sample(&mut rng);
                log_x -= e / k as f64;
                if log_x > log_b[k - 1] {
                    continue 'trial;
                }
            }
            hits += 1;
        }
    }
    let estimate = hits as f64 / trials as f64;
    Ok(McEstimate {
        estimate,
        std_error: (estimate * (1.0 - estimate) / trials as f64).sqrt(),
        trials,
        seed,
    })
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("bounds are finite")
}

/// Polynomial with exact coefficients, lowest degree first.
type Poly = Vec<BigRational>;

fn eval(p: &Poly, x: &BigRational) -> BigRational {
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

fn antiderivative(p: &Poly) -> Poly {
    let mut out = Vec::with_capacity(p.len() + 1);
    out.push(BigRational::zero());
    for (d, c) in p.iter().enumerate() {
        out.push(c / BigRational::from_integer(BigInt::from(d + 1)));
    }
    out
}

/// `n!·∫_0^{B_1} ∫_{x_1}^{B_2} … ∫_{x_{n-1}}^{B_n} dx_n … dx_1`, evaluated
/// exactly on the binary values of the bounds and rounded once.
pub fn quadrature_ncprob(bounds: &DiscreteBounds) -> Result<f64> {
    let n = bounds.n();
    if n > QUADRATURE_MAX_N {
        return Err(Error::UnsupportedSize { n, max: QUADRATURE_MAX_N });
    }
    // inner(x) = ∫_x^{B_k} inner_{k+1}(y) dy, built from k = n down to 1.
    let mut inner: Poly = vec![BigRational::one()];
    for k in (1..=n).rev() {
        let a = antiderivative(&inner);
        let top = eval(&a, &rational(bounds.as_slice()[k - 1]));
        inner = a.into_iter().map(|c| -c).collect();
        inner[0] += top;
    }
    let mut value = inner[0].clone();
    for k in 2..=n {
        value *= BigRational::from_integer(BigInt::from(k));
    }
    value.to_f64().ok_or_else(|| Error::NumericalFailure("exact integral does not fit a double".into()))
}

/// `P(D⁻_n > d)` for `D⁻_n = max_i (U(i) - (i - 1)/n)`, by the
/// Birnbaum–Tingey sum
/// `d·Σ_{j=0}^{⌊n(1-d)⌋} C(n, j)(1 - d - j/n)^{n-j}(d + j/n)^{j-1}`,
/// accumulated in log space.
pub fn smirnov_ksminus_pvalue(n: usize, d: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&d) {
        return Err(invalid(format!("level must lie in [0, 1], got {d}")));
    }
    if n == 0 || d == 0.0 {
        return Ok(if n == 0 { 0.0 } else { 1.0 });
    }
    if d == 1.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let jmax = ((nf * (1.0 - d)).floor() as usize).min(n);
    let ln_n = ln_factorial(n as u64);
    let logs: Vec<f64> = (0..=jmax)
        .map(|j| {
            let jf = j as f64;
            let rest = 1.0 - d - jf / nf;
            let a = if n == j { 0.0 } else { (nf - jf) * rest.ln() };
            ln_n - ln_factorial(j as u64) - ln_factorial((n - j) as u64) + a + (jf - 1.0) * (d + jf / nf).ln()
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs.iter().map(|l| (l - top).exp()).sum();
    Ok((d.ln() + top + sum.ln()).exp().clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: &[f64]) -> DiscreteBounds {
        DiscreteBounds::new(v.to_vec()).unwrap()
    }

    #[test]
    fn quadrature_examples() {
        assert!((quadrature_ncprob(&b(&[0.5, 0.7])).unwrap() - 0.45).abs() < 1e-15);
        assert!((quadrature_ncprob(&b(&[0.25, 0.5, 0.75])).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(quadrature_ncprob(&b(&[0.375])).unwrap(), 0.375);
        assert_eq!(quadrature_ncprob(&b(&[])).unwrap(), 1.0);
        assert_eq!(quadrature_ncprob(&b(&[0.0, 0.4])).unwrap(), 0.0);
        assert!((quadrature_ncprob(&b(&[0.5; 7])).unwrap() - 0.5f64.powi(7)).abs() < 1e-18);
        assert!(matches!(
            quadrature_ncprob(&b(&[0.5; 11])),
            Err(Error::UnsupportedSize { n: 11, max: 10 })
        ));
        // Non-monotone input is read after normalization.
        let raw = quadrature_ncprob(&b(&[0.5, 0.3, 0.9])).unwrap();
        assert!((raw - quadrature_ncprob(&b(&[0.3, 0.3, 0.9])).unwrap()).abs() < 1e-16);
    }

    #[test]
    fn monte_carlo_examples() {
        let one = monte_carlo_ncprob(&b(&[1.0; 6]), 1000, 1).unwrap();
        assert_eq!((one.estimate, one.std_error), (1.0, 0.0));
        let zero = monte_carlo_ncprob(&b(&[0.0, 0.5]), 1000, 1).unwrap();
        assert_eq!(zero.estimate, 0.0);
        let mc = monte_carlo_ncprob(&b(&[0.5, 0.7]), 1_000_000, 7).unwrap();
        assert!(mc.z_score(0.45) < 4.0, "{mc:?}");
        let se = (mc.estimate * (1.0 - mc.estimate) / 1e6).sqrt();
        assert!((mc.std_error - se).abs() < 1e-12);
        assert_eq!(mc, monte_carlo_ncprob(&b(&[0.5, 0.7]), 1_000_000, 7).unwrap());
        assert!(monte_carlo_ncprob(&b(&[0.5]), 0, 1).is_err());
    }

    #[test]
    fn monte_carlo_error_shrinks_with_trials() {
        let bounds = b(&[0.2, 0.35, 0.6, 0.65, 0.9]);
        let exact = quadrature_ncprob(&bounds).unwrap();
        for seed in 0..5 {
            let small = monte_carlo_ncprob(&bounds, 30_000, seed).unwrap();
            let large = monte_carlo_ncprob(&bounds, 270_000, seed).unwrap();
            assert!(small.z_score(exact) < 4.5 && large.z_score(exact) < 4.5);
            assert!((large.std_error * 3.0 - small.std_error).abs() < 0.05 * small.std_error);
        }
    }

    #[test]
    fn smirnov_examples() {
        for d in [0.0, 0.1, 0.5, 0.99, 1.0] {
            assert!((smirnov_ksminus_pvalue(1, d).unwrap() - (1.0 - d)).abs() < 1e-15);
        }
        assert_eq!(smirnov_ksminus_pvalue(17, 0.0).unwrap(), 1.0);
        assert!(smirnov_ksminus_pvalue(3, 1.5).is_err());
    }

    #[test]
    fn smirnov_matches_quadrature() {
        for n in 1..=8usize {
            for t in 1..20 {
                let d = t as f64 / 20.0;
                let bounds = DiscreteBounds::new((1..=n).map(|i| (d + (i - 1) as f64 / n as f64).min(1.0)).collect())
                    .unwrap();
                let q = 1.0 - quadrature_ncprob(&bounds).unwrap();
                let s = smirnov_ksminus_pvalue(n, d).unwrap();
                assert!((q - s).abs() < 1e-13, "n={n} d={d}: {q} vs {s}");
            }
        }
        let bounds = DiscreteBounds::new((1..=5).map(|i| (0.3 + (i - 1) as f64 / 5.0).min(1.0)).collect()).unwrap();
        let q = 1.0 - quadrature_ncprob(&bounds).unwrap();
        assert!((q - smirnov_ksminus_pvalue(5, 0.3).unwrap()).abs() < 1e-10);
    }
}
