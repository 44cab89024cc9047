use super::saddle::{binomial_pmf, poisson_pmf};
use crate::error::{invalid, Result};

/// Masses below this are dropped from convolution kernels. Every propagated
/// quantity is at most 1, so a dropped term moves any entry by less than
/// `1e-300` of the running scale.
pub(crate) const PMF_CUTOFF: f64 = 1e-300;

/// Walk length after which the recurrence is re-anchored on a directly
/// evaluated mass.
const REANCHOR: usize = 128;

/// Probability masses indexed by count, starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PmfVector(Vec<f64>);

impl PmfVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl std::ops::Index<usize> for PmfVector {
    type Output = f64;
    fn index(&self, idx: usize) -> &f64 {
        &self.0[idx]
    }
}

/// Pushes `(j, Pr(Pois(lambda) = j))` for `j <= hi`, walking outward from the
/// mode by the ratio recurrence. Each direction stops once a mass drops below
/// `cutoff` or underflows.
fn poisson_walk(lambda: f64, hi: usize, cutoff: f64, out: &mut Vec<(usize, f64)>) {
    let mode = (lambda.floor() as usize).min(hi);
    out.push((mode, poisson_pmf(mode as f64, lambda)));

    let mut v = out[0].1;
    for j in mode + 1..=hi {
        v = if (j - mode) % REANCHOR == 0 { poisson_pmf(j as f64, lambda) } else { v * lambda / j as f64 };
        if v < cutoff || v == 0.0 {
            break;
        }
        out.push((j, v));
    }
    let mut v = out[0].1;
    for j in (0..mode).rev() {
        v = if (mode - j) % REANCHOR == 0 { poisson_pmf(j as f64, lambda) } else { v * (j + 1) as f64 / lambda };
        if v < cutoff || v == 0.0 {
            break;
        }
        out.push((j, v));
    }
}

/// `Pr(Pois(lambda) = j)` for `j = 0..=max_count`.
///
/// The ratio recurrence is started from the mode, whose mass is evaluated by
/// a saddle-point formula, so large intensities do not underflow at `j = 0`.
pub fn poisson_pmf_vector(lambda: f64, max_count: usize) -> Result<PmfVector> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("Poisson intensity must be finite and non-negative, got {lambda}")));
    }
    let mut values = vec![0.0; max_count + 1];
    if lambda == 0.0 {
        values[0] = 1.0;
        return Ok(PmfVector(values));
    }
    let mut walk = Vec::new();
    poisson_walk(lambda, max_count, 0.0, &mut walk);
    for (j, v) in walk {
        values[j] = v;
    }
    Ok(PmfVector(values))
}

/// Poisson masses restricted to their numerically non-negligible support.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonKernel {
    pub offset: usize,
    pub values: Vec<f64>,
}

impl PoissonKernel {
    /// Kernel for counts `0..=max_count`. Masses below `1e-300` at either end
    /// are trimmed.
    pub fn new(lambda: f64, max_count: usize) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(invalid(format!("Poisson intensity must be finite and non-negative, got {lambda}")));
        }
        if lambda == 0.0 {
            return Ok(Self { offset: 0, values: vec![1.0] });
        }
        let mut walk = Vec::new();
        poisson_walk(lambda, max_count, PMF_CUTOFF, &mut walk);
        let lo = walk.iter().map(|w| w.0).min().unwrap_or(0);
        let hi = walk.iter().map(|w| w.0).max().unwrap_or(0);
        let mut values = vec![0.0; hi - lo + 1];
        for (j, v) in walk {
            values[j - lo] = v;
        }
        Ok(Self { offset: lo, values })
    }

    #[inline]
    pub fn get(&self, count: usize) -> f64 {
        count
            .checked_sub(self.offset)
            .and_then(|i| self.values.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    /// One past the largest count with non-zero mass.
    pub fn end(&self) -> usize {
        self.offset + self.values.len()
    }

    pub fn is_delta(&self) -> bool {
        self.offset == 0 && self.values.len() == 1
    }
}

fn choose_small(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut c: u64 = 1;
    for t in 0..k {
        c = c * (n - t) / (t + 1);
    }
    c as f64
}

/// `C(n-k, j-k) p^(j-k) (1-p)^(n-j)`: the chance that an empirical count of
/// `k` grows to `j` when each of the `n-k` remaining points independently
/// lands in the next interval with probability `p`.
pub fn binomial_transition(n: usize, k: usize, j: usize, p: f64) -> Result<f64> {
    if j < k || j > n {
        return Err(invalid(format!("binomial transition needs k <= j <= n, got k={k}, j={j}, n={n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("probability must lie in [0, 1], got {p}")));
    }
    let trials = (n - k) as u64;
    let hits = (j - k) as u64;
    if n <= 30 {
        let q = 1.0 - p;
        return Ok(choose_small(trials, hits) * p.powi(hits as i32) * q.powi((trials - hits) as i32));
    }
    Ok(binomial_pmf(hits as f64, trials as f64, p, 1.0 - p))
}

/// `Pr(Binomial(trials, p) = x)` for `x = 0..=trials`, by ratio recurrence from
/// the mode.
pub fn binomial_pmf_vector(trials: usize, p: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("probability must lie in [0, 1], got {p}")));
    }
    let mut out = vec![0.0; trials + 1];
    let q = 1.0 - p;
    if p == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    if q == 0.0 {
        out[trials] = 1.0;
        return Ok(out);
    }
    let m = trials as f64;
    let mode = (((trials + 1) as f64 * p).floor() as usize).min(trials);
    let eval = |x: usize| binomial_pmf(x as f64, m, p, q);
    let odds = p / q;
    out[mode] = eval(mode);
    let mut v = out[mode];
    for x in mode + 1..=trials {
        v = if (x - mode) % REANCHOR == 0 { eval(x) } else { v * (trials - x + 1) as f64 / x as f64 * odds };
        if v == 0.0 {
            break;
        }
        out[x] = v;
    }
    let mut v = out[mode];
    for x in (0..mode).rev() {
        v = if (mode - x) % REANCHOR == 0 { eval(x) } else { v * (x + 1) as f64 / (trials - x) as f64 / odds };
        if v == 0.0 {
            break;
        }
        out[x] = v;
    }
    Ok(out)
}
