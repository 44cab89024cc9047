use statrs::function::gamma::ln_gamma;

use super::saddle::log_binomial_pmf;
use crate::error::{invalid, Error, Result};

const FPMIN: f64 = 1e-300;

fn check_shapes(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(invalid(format!("beta shapes must be positive and finite, got ({a}, {b})")));
    }
    Ok(())
}

/// `x^a (1-x)^b / B(a, b)`, via the binomial saddle point.
fn front(a: f64, b: f64, x: f64, y: f64) -> f64 {
    log_binomial_pmf(a, a + b, x, y).exp() * a * b / (a + b)
}

/// Continued fraction for `I_x(a, b)`, modified Lentz.
fn betacf(a: f64, b: f64, x: f64) -> Result<f64> {
    let max_iter = 1000 + (20.0 * a.max(b).sqrt()) as usize;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=max_iter {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= f64::EPSILON {
            return Ok(h);
        }
    }
    Err(Error::NumericalFailure(format!(
        "incomplete beta continued fraction did not converge for a={a}, b={b}, x={x}"
    )))
}

/// Returns `(I_x(a,b), 1 - I_x(a,b))`, each evaluated on the side where it is
/// not formed by cancellation.
fn tails(a: f64, b: f64, x: f64) -> Result<(f64, f64)> {
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x == 1.0 {
        return Ok((1.0, 0.0));
    }
    let y = 1.0 - x;
    let bt = front(a, b, x, y);
    if x <= a / (a + b) {
        let lower = (bt * betacf(a, b, x)? / a).clamp(0.0, 1.0);
        Ok((lower, 1.0 - lower))
    } else {
        let upper = (bt * betacf(b, a, y)? / b).clamp(0.0, 1.0);
        Ok((1.0 - upper, upper))
    }
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    check_shapes(a, b)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(format!("incomplete beta argument must lie in [0, 1], got {x}")));
    }
    Ok(tails(a, b, x)?.0)
}

/// Solves `I_x(a, b) = y` for `y <= 1/2` by safeguarded Newton iteration in
/// `ln x`, where the lower tail behaves like a power law.
fn lower_quantile(a: f64, b: f64, y: f64) -> Result<f64> {
    let ln_y = y.ln();
    let ln_beta = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    let mean = a / (a + b);
    let mut v = ((ln_y + a.ln() + ln_beta) / a).min(mean.ln());
    let (mut lo, mut hi) = (f64::NEG_INFINITY, 0.0f64);

    for _ in 0..400 {
        let x = v.exp();
        let (lower, _) = tails(a, b, x)?;
        if lower < y {
            lo = v;
        } else {
            hi = v;
        }
        let step = if lower > 0.0 {
            let slope = front(a, b, x, 1.0 - x) / ((1.0 - x) * lower);
            (lower.ln() - ln_y) / slope
        } else {
            f64::NAN
        };
        let mut next = v - step;
        if !(next > lo && next < hi) {
            next = if lo.is_finite() { 0.5 * (lo + hi) } else { hi - hi.abs().max(1.0) };
        }
        let done = (next - v).abs() <= 1e-15 * v.abs().max(1.0) || (hi - lo) <= 1e-15 * hi.abs().max(1.0);
        v = next;
        if done {
            let x = v.exp();
            let got = tails(a, b, x)?.0;
            if (got - y).abs() <= 1e-12 {
                return Ok(x);
            }
            break;
        }
    }
    Err(Error::NumericalFailure(format!("incomplete beta inverse did not converge for a={a}, b={b}, y={y}")))
}

/// Inverse of [`reg_inc_beta`] in its third argument.
pub fn reg_inc_beta_inv(a: f64, b: f64, y: f64) -> Result<f64> {
    check_shapes(a, b)?;
    if !(0.0..=1.0).contains(&y) {
        return Err(invalid(format!("incomplete beta level must lie in [0, 1], got {y}")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y == 1.0 {
        return Ok(1.0);
    }
    if y <= 0.5 {
        lower_quantile(a, b, y)
    } else {
        Ok(1.0 - lower_quantile(b, a, 1.0 - y)?)
    }
}
