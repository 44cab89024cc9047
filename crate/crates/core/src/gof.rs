//! One-sided goodness-of-fit statistics `S = max_i s_i(U(i))` or
//! `S = min_i s_i(U(i))`, where `U(i) = F(X(i))` are the probability-integral
//! transformed order statistics.
//!
//! Max-form statistics reject for large `S`, min-form statistics for small
//! `S`. Every level `s` turns the non-rejection event into per-index bounds
//! on the `U(i)`, so p-values, power and thresholds all reduce to NCPROB.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::boundary::{reflect_lower_to_upper, DiscreteBounds};
use crate::error::{invalid, Error, Result};
use crate::numerics::reg_inc_beta_inv;
use crate::{ncprob, NcOptions};

/// Monotonicity of every `s_i` in `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// Aggregation over indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    Max,
    Min,
}

type IndexFn = Arc<dyn Fn(usize, usize, f64) -> f64 + Send + Sync>;

/// A one-sided statistic. Scores and inverses are called as `f(i, n, x)` with
/// `i` in `1..=n`, so one spec serves every sample size.
#[derive(Clone)]
pub struct StatisticSpec {
    name: String,
    direction: Direction,
    form: Form,
    score: IndexFn,
    inverse: Option<IndexFn>,
}

impl fmt::Debug for StatisticSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StatisticSpec")
            .field("name", &self.name)
            .field("direction", &self.direction)
            .field("form", &self.form)
            .field("closed_form_inverse", &self.inverse.is_some())
            .finish()
    }
}

/// Names accepted by [`StatisticSpec::from_str`].
pub const BUILTIN_STATISTICS: [&str; 4] = ["bj-plus", "ks-plus", "ks-minus", "hc"];

impl StatisticSpec {
    /// A statistic with the given scores, `s_i(u) = score(i, n, u)`, each
    /// strictly monotone in `u` in the declared direction.
    pub fn new(
        name: impl Into<String>,
        direction: Direction,
        form: Form,
        score: impl Fn(usize, usize, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), direction, form, score: Arc::new(score), inverse: None }
    }

    /// Supplies `s_i^{-1}(s)` in closed form. Values outside `[0, 1]` are clamped.
    pub fn with_inverse(mut self, inverse: impl Fn(usize, usize, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.inverse = Some(Arc::new(inverse));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn has_closed_form_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    pub fn score(&self, i: usize, n: usize, u: f64) -> f64 {
        (self.score)(i, n, u)
    }

    /// The point where `s_i` crosses level `s`: `sup{u : s_i(u) <= s}` for
    /// increasing scores and `inf{u : s_i(u) <= s}` for decreasing ones,
    /// within `[0, 1]`.
    pub fn crossing_point(&self, i: usize, n: usize, s: f64) -> f64 {
        if let Some(inv) = &self.inverse {
            let u = inv(i, n, s);
            if !u.is_nan() {
                return u.clamp(0.0, 1.0);
            }
        }
        self.bisect_crossing(i, n, s)
    }

    fn bisect_crossing(&self, i: usize, n: usize, s: f64) -> f64 {
        let below = |u: f64| self.score(i, n, u) <= s;
        // `lo` is on the side of the crossing where the score is low.
        let (mut lo, mut hi) = match self.direction {
            Direction::Increasing => {
                if below(1.0) {
                    return 1.0;
                }
                if !below(0.0) {
                    return 0.0;
                }
                (0.0, 1.0)
            }
            Direction::Decreasing => {
                if below(0.0) {
                    return 0.0;
                }
                if !below(1.0) {
                    return 1.0;
                }
                (1.0, 0.0)
            }
        };
        for _ in 0..1100 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if below(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Smallest and largest attainable values of the statistic at size `n`.
    pub fn range(&self, n: usize) -> (f64, f64) {
        let (mut lo, mut hi) = match self.form {
            Form::Max => (f64::NEG_INFINITY, f64::NEG_INFINITY),
            Form::Min => (f64::INFINITY, f64::INFINITY),
        };
        for i in 1..=n {
            let (a, b) = (self.score(i, n, 0.0), self.score(i, n, 1.0));
            let (l, h) = (a.min(b), a.max(b));
            match self.form {
                Form::Max => {
                    lo = lo.max(l);
                    hi = hi.max(h);
                }
                Form::Min => {
                    lo = lo.min(l);
                    hi = hi.min(h);
                }
            }
        }
        (lo, hi)
    }

    /// Value of the statistic on a sorted sample already mapped to `[0, 1]`.
    pub fn statistic(&self, sorted: &[f64]) -> f64 {
        let n = sorted.len();
        let scores = sorted.iter().enumerate().map(|(k, &u)| self.score(k + 1, n, u));
        match self.form {
            Form::Max => scores.fold(f64::NEG_INFINITY, f64::max),
            Form::Min => scores.fold(f64::INFINITY, f64::min),
        }
    }

    /// Whether the non-rejection event bounds the `U(i)` from above.
    fn bounds_from_above(&self) -> bool {
        matches!((self.form, self.direction), (Form::Max, Direction::Increasing) | (Form::Min, Direction::Decreasing))
    }
}

impl FromStr for StatisticSpec {
    type Err = Error;

    fn from_str(name: &str) -> Result<Self> {
        match name {
            "bj-plus" => Ok(berk_jones_plus()),
            "ks-plus" => Ok(ks_plus()),
            "ks-minus" => Ok(ks_minus()),
            "hc" => Ok(higher_criticism()),
            _ => Err(invalid(format!("unknown statistic {name:?}; expected one of {}", BUILTIN_STATISTICS.join(", ")))),
        }
    }
}

/// Berk–Jones `M⁺`: `s_i(u) = I_u(i, n - i + 1)`, min form.
pub fn berk_jones_plus() -> StatisticSpec {
    StatisticSpec::new("bj-plus", Direction::Increasing, Form::Min, |i, n, u| {
        crate::numerics::reg_inc_beta(i as f64, (n - i + 1) as f64, u.clamp(0.0, 1.0)).unwrap_or(f64::NAN)
    })
    .with_inverse(|i, n, s| reg_inc_beta_inv(i as f64, (n - i + 1) as f64, s.clamp(0.0, 1.0)).unwrap_or(f64::NAN))
}

/// `D⁻`: `s_i(u) = u - (i - 1)/n`, max form.
pub fn ks_minus() -> StatisticSpec {
    StatisticSpec::new("ks-minus", Direction::Increasing, Form::Max, |i, n, u| u - (i - 1) as f64 / n as f64)
        .with_inverse(|i, n, s| s + (i - 1) as f64 / n as f64)
}

/// `D⁺`: `s_i(u) = i/n - u`, max form.
pub fn ks_plus() -> StatisticSpec {
    StatisticSpec::new("ks-plus", Direction::Decreasing, Form::Max, |i, n, u| i as f64 / n as f64 - u)
        .with_inverse(|i, n, s| i as f64 / n as f64 - s)
}

/// Higher Criticism: `s_i(u) = sqrt(n)·(i/n - u)/sqrt(u(1 - u))`, max form
/// over all `i`.
pub fn higher_criticism() -> StatisticSpec {
    StatisticSpec::new("hc", Direction::Decreasing, Form::Max, hc_score).with_inverse(hc_inverse)
}

fn hc_score(i: usize, n: usize, u: f64) -> f64 {
    let rn = (n as f64).sqrt();
    if i == n {
        return rn * ((1.0 - u) / u).sqrt();
    }
    rn * (i as f64 / n as f64 - u) / (u * (1.0 - u)).sqrt()
}

/// Root of `(n + s²)u² - (2np + s²)u + np² = 0` on the side of `p = i/n`
/// matching the sign of `s`.
fn hc_inverse(i: usize, n: usize, s: f64) -> f64 {
    let (nf, p) = (n as f64, i as f64 / n as f64);
    if s.is_infinite() {
        return if s > 0.0 { 0.0 } else { 1.0 };
    }
    let a = 2.0 * nf * p + s * s;
    let root = s.abs() * (s * s + 4.0 * nf * p * (1.0 - p)).sqrt();
    if s > 0.0 {
        2.0 * nf * p * p / (a + root)
    } else {
        (a + root) / (2.0 * (nf + s * s))
    }
}

/// `G∘F⁻¹`: maps null probabilities `u` to probabilities under the alternative.
#[derive(Clone)]
pub struct AlternativeTransform {
    g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for AlternativeTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("AlternativeTransform")
    }
}

/// Points used to check an alternative for monotonicity and endpoints.
const TRANSFORM_GRID: usize = 1000;

impl AlternativeTransform {
    /// Wraps `g`, checking on a grid that it is nondecreasing with
    /// `g(0) = 0` and `g(1) = 1`.
    pub fn new(g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let mut prev = f64::NEG_INFINITY;
        for t in 0..=TRANSFORM_GRID {
            let u = t as f64 / TRANSFORM_GRID as f64;
            let v = g(u);
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(format!("alternative maps {u} to {v}, outside [0, 1]")));
            }
            if v < prev {
                return Err(invalid(format!("alternative is decreasing near u = {u}")));
            }
            prev = v;
        }
        if g(0.0).abs() > 1e-9 || (g(1.0) - 1.0).abs() > 1e-9 {
            return Err(invalid("alternative must satisfy g(0) = 0 and g(1) = 1"));
        }
        Ok(Self { g: Arc::new(g) })
    }

    pub fn identity() -> Self {
        Self { g: Arc::new(|u| u) }
    }

    /// Piecewise-linear interpolation through `(u, g(u))` knots, which must
    /// include `u = 0` and `u = 1`.
    pub fn from_knots(knots: &[(f64, f64)]) -> Result<Self> {
        let mut pts = knots.to_vec();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pts.first().map(|p| p.0) != Some(0.0) || pts.last().map(|p| p.0) != Some(1.0) {
            return Err(invalid("alternative knots must include u = 0 and u = 1"));
        }
        Self::new(move |u| {
            let k = pts.partition_point(|p| p.0 <= u).clamp(1, pts.len() - 1);
            let ((x0, y0), (x1, y1)) = (pts[k - 1], pts[k]);
            if x1 == x0 {
                y1
            } else {
                y0 + (y1 - y0) * (u - x0) / (x1 - x0)
            }
        })
    }

    pub fn apply(&self, u: f64) -> f64 {
        (self.g)(u)
    }
}

fn check_level(spec: &StatisticSpec, n: usize, s: f64) -> Result<()> {
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    let (lo, hi) = spec.range(n);
    if s.is_nan() || s < lo || s > hi {
        return Err(invalid(format!("level {s} is outside the range [{lo}, {hi}] of {} at n = {n}", spec.name)));
    }
    Ok(())
}

/// Crossing points `u_i` of every score at level `s`.
fn crossing_points(spec: &StatisticSpec, n: usize, s: f64) -> Vec<f64> {
    (1..=n).map(|i| spec.crossing_point(i, n, s)).collect()
}

fn reduce(spec: &StatisticSpec, points: Vec<f64>) -> Result<DiscreteBounds> {
    if spec.bounds_from_above() {
        DiscreteBounds::new(points)
    } else {
        reflect_lower_to_upper(&points)
    }
}

/// Upper bounds `B` with `{S on the non-rejection side of s} = {∀i: V(i) <= B_i}`,
/// where `V` is the sample itself or its reflection `1 - U`.
pub fn bounds_for_level(spec: &StatisticSpec, n: usize, s: f64) -> Result<DiscreteBounds> {
    check_level(spec, n, s)?;
    reduce(spec, crossing_points(spec, n, s))
}

/// Null probability of the rejection side of `s`: `P(S > s)` for max-form
/// and `P(S < s)` for min-form statistics.
pub fn pvalue(spec: &StatisticSpec, n: usize, s: f64) -> Result<f64> {
    pvalue_with(spec, n, s, &NcOptions::default())
}

pub fn pvalue_with(spec: &StatisticSpec, n: usize, s: f64, options: &NcOptions) -> Result<f64> {
    let bounds = bounds_for_level(spec, n, s)?;
    Ok((1.0 - ncprob(&bounds, options)?.prob).clamp(0.0, 1.0))
}

/// Probability of rejecting at level `s` when `U(i)` are distributed as
/// the order statistics of `g^{-1}(V)` for uniform `V`.
pub fn power(spec: &StatisticSpec, n: usize, s: f64, alt: &AlternativeTransform) -> Result<f64> {
    power_with(spec, n, s, alt, &NcOptions::default())
}

pub fn power_with(
    spec: &StatisticSpec,
    n: usize,
    s: f64,
    alt: &AlternativeTransform,
    options: &NcOptions,
) -> Result<f64> {
    check_level(spec, n, s)?;
    // `g` must act on the bounds for the untransformed sample, before any
    // reflection.
    let points = crossing_points(spec, n, s).into_iter().map(|u| alt.apply(u).clamp(0.0, 1.0)).collect();
    let bounds = reduce(spec, points)?;
    Ok((1.0 - ncprob(&bounds, options)?.prob).clamp(0.0, 1.0))
}

/// An α-level threshold with the p-value attained there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub level: f64,
    pub pvalue: f64,
    /// NCPROB evaluations spent.
    pub evaluations: usize,
}

/// A level `s` with `|pvalue(s) - alpha| <= tol`.
pub fn threshold(spec: &StatisticSpec, n: usize, alpha: f64, tol: f64) -> Result<f64> {
    Ok(threshold_with(spec, n, alpha, tol, &NcOptions::default())?.level)
}

pub fn threshold_with(
    spec: &StatisticSpec,
    n: usize,
    alpha: f64,
    tol: f64,
    options: &NcOptions,
) -> Result<Threshold> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    let mut evaluations = 0;
    let mut eval = |s: f64| -> Result<f64> {
        evaluations += 1;
        pvalue_with(spec, n, s, options)
    };
    // Max-form p-values fall as s grows, min-form ones rise. `a` is kept on
    // the side with p-value above alpha, `b` below.
    let (lo, hi) = spec.range(n);
    let (mut a, mut b) = match spec.form {
        Form::Max => (lo, hi),
        Form::Min => (hi, lo),
    };

    // Doubling search from a finite anchor replaces infinite ends.
    let anchor = if a.is_finite() { a } else if b.is_finite() { b } else { 0.0 };
    for want_above in [true, false] {
        let end = if want_above { a } else { b };
        if end.is_finite() {
            continue;
        }
        let dir = end.signum();
        let mut step = 1.0f64;
        loop {
            let probe = anchor + dir * step;
            if !probe.is_finite() {
                return Err(invalid(format!("alpha = {alpha} is not attained by {} at n = {n}", spec.name)));
            }
            let p = eval(probe)?;
            if (p - alpha).abs() <= tol {
                return Ok(Threshold { level: probe, pvalue: p, evaluations });
            }
            if (p > alpha) == want_above {
                if want_above {
                    a = probe;
                } else {
                    b = probe;
                }
                break;
            }
            // The probe lies on the other side and tightens that end.
            if want_above {
                b = probe;
            } else {
                a = probe;
            }
            step *= 2.0;
        }
    }

    let (pa, pb) = (eval(a)?, eval(b)?);
    for (s, p) in [(a, pa), (b, pb)] {
        if (p - alpha).abs() <= tol {
            return Ok(Threshold { level: s, pvalue: p, evaluations });
        }
    }
    if !(pa > alpha && pb < alpha) {
        return Err(invalid(format!(
            "alpha = {alpha} is not attained by {} at n = {n}: p-values span [{}, {}]",
            spec.name,
            pa.min(pb),
            pa.max(pb)
        )));
    }
    loop {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            return Err(Error::NumericalFailure(format!(
                "bisection for alpha = {alpha} stalled at s = {mid} without reaching tolerance {tol}"
            )));
        }
        let p = eval(mid)?;
        if (p - alpha).abs() <= tol {
            return Ok(Threshold { level: mid, pvalue: p, evaluations });
        }
        if p > alpha {
            a = mid;
        } else {
            b = mid;
        }
    }
}
