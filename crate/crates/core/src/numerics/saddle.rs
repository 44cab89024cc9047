//! Saddle-point evaluation of Poisson and binomial masses (Loader, 2000).
//!
//! Avoids forming factorials or large binomial coefficients: the deviance
//! term `bd0` and the Stirling remainder `stirlerr` are both well conditioned.

use std::f64::consts::PI;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln Γ(n+1) - (n+1/2) ln n + n - ln √(2π)`.
pub(crate) fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;

    if n <= 15.0 {
        let lnfact = if n.fract() == 0.0 {
            (2..=n as u64).map(|k| (k as f64).ln()).sum::<f64>()
        } else {
            statrs::function::gamma::ln_gamma(n + 1.0)
        };
        if n == 0.0 {
            return lnfact - LN_SQRT_2PI;
        }
        return lnfact - (n + 0.5) * n.ln() + n - LN_SQRT_2PI;
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance `x ln(x/m) + m - x`, evaluated without cancellation near `x = m`.
pub(crate) fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// Natural log of `Pr(Pois(lambda) = x)`.
pub fn log_poisson_pmf(x: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if x == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if x < 0.0 {
        return f64::NEG_INFINITY;
    }
    if x == 0.0 {
        return -lambda;
    }
    -stirlerr(x) - bd0(x, lambda) - 0.5 * (2.0 * PI * x).ln()
}

pub(crate) fn poisson_pmf(x: f64, lambda: f64) -> f64 {
    log_poisson_pmf(x, lambda).exp()
}

/// `ln Pr(Pois(n) = n) = ln(nⁿ e⁻ⁿ / n!)`, the conditioning constant of the
/// Poisson embedding.
pub fn ln_poisson_pmf_at_mean(n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    -stirlerr(n) - 0.5 * (2.0 * PI * n).ln()
}

/// Natural log of `Pr(Binomial(n, p) = x)` with `q = 1 - p` supplied separately
/// so that callers holding an accurate complement can pass it.
pub fn log_binomial_pmf(x: f64, n: f64, p: f64, q: f64) -> f64 {
    if p == 0.0 {
        return if x == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if x == n { 0.0 } else { f64::NEG_INFINITY };
    }
    if x < 0.0 || x > n {
        return f64::NEG_INFINITY;
    }
    if x == 0.0 {
        if n == 0.0 {
            return 0.0;
        }
        return if p < 0.1 { -bd0(n, n * q) - n * p } else { n * q.ln() };
    }
    if x == n {
        return if q < 0.1 { -bd0(n, n * p) - n * q } else { n * p.ln() };
    }
    let lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(x, n * p) - bd0(n - x, n * q);
    let lf = (2.0 * PI).ln() + x.ln() + (-x / n).ln_1p();
    lc - 0.5 * lf
}

pub(crate) fn binomial_pmf(x: f64, n: f64, p: f64, q: f64) -> f64 {
    log_binomial_pmf(x, n, p, q).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ln_factorial(n: u64) -> f64 {
        (2..=n).map(|k| (k as f64).ln()).sum()
    }

    #[test]
    fn stirlerr_matches_definition_at_small_and_moderate_n() {
        for n in [1u64, 2, 5, 15, 16, 30, 40, 100, 600] {
            let direct = ln_factorial(n) - (n as f64 + 0.5) * (n as f64).ln() + n as f64 - LN_SQRT_2PI;
            let tol = 1e-14 * ln_factorial(n).max(1.0);
            assert!((stirlerr(n as f64) - direct).abs() < tol, "n={n}");
        }
    }

    #[test]
    fn poisson_log_pmf_matches_formula() {
        for (x, lambda) in [(0u64, 2.5f64), (3, 2.0), (10, 7.5), (40, 38.2)] {
            let direct = x as f64 * lambda.ln() - lambda - ln_factorial(x);
            assert!((log_poisson_pmf(x as f64, lambda) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn poisson_at_mean_is_accurate_for_large_n() {
        // ln(n^n e^-n / n!) ≈ -½ ln(2πn) - 1/(12n)
        let n = 1_000_000usize;
        let approx = -0.5 * (2.0 * PI * n as f64).ln() - 1.0 / (12.0 * n as f64);
        assert!((ln_poisson_pmf_at_mean(n) - approx).abs() < 1e-15);
        assert!((ln_poisson_pmf_at_mean(1) - (-1.0)).abs() < 1e-15);
    }

    #[test]
    fn binomial_log_pmf_matches_choose() {
        let direct = (10.0f64).ln() + 2.0 * 0.3f64.ln() + 3.0 * 0.7f64.ln();
        assert!((log_binomial_pmf(2.0, 5.0, 0.3, 0.7) - direct).abs() < 1e-13);
        assert_eq!(log_binomial_pmf(0.0, 4.0, 0.0, 1.0), 0.0);
        assert!((log_binomial_pmf(0.0, 4.0, 0.25, 0.75).exp() - 0.316_406_25).abs() < 1e-15);
    }
}
