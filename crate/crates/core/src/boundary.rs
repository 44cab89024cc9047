//! Upper bounds on order statistics and the reductions between the
//! discrete problem `P(∀i: X(i) <= B_i)` and the continuous problem
//! `P(∀t: b(t) <= n F̂_n(t))`.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};

/// Default absolute accuracy for locating first passage times.
pub const DEFAULT_PASSAGE_TOL: f64 = 1e-12;

/// Normalized upper bounds `B_1 <= ... <= B_n`, each in `[0, 1]`.
///
/// Construction always applies suffix-minimum normalization, which leaves
/// the event `∀i: X(i) <= B_i` unchanged because order statistics are sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBounds {
    bounds: Vec<f64>,
}

impl DiscreteBounds {
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        let mut bounds = raw;
        for (i, &b) in bounds.iter().enumerate() {
            if !(0.0..=1.0).contains(&b) {
                return Err(invalid(format!("bound {} is {b}, outside [0, 1]", i + 1)));
            }
        }
        for i in (0..bounds.len().saturating_sub(1)).rev() {
            if bounds[i + 1] < bounds[i] {
                bounds[i] = bounds[i + 1];
            }
        }
        Ok(Self { bounds })
    }

    /// Sample size, i.e. the number of bounds.
    pub fn n(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.bounds
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.bounds
    }

    /// `X(1) <= 0` has probability zero, so any zero bound forces zero.
    pub fn forces_zero(&self) -> bool {
        self.bounds.first().is_some_and(|&b| b == 0.0)
    }

    /// Bound `i` of the sentinel-extended sequence `B_0 = 0, ..., B_{n+1} = 1`.
    #[inline]
    pub fn extended(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else if i > self.bounds.len() {
            1.0
        } else {
            self.bounds[i - 1]
        }
    }

    /// Pads with vacuous bounds equal to 1 up to `n` order statistics.
    pub fn with_sample_size(mut self, n: usize) -> Result<Self> {
        if self.bounds.len() > n {
            return Err(invalid(format!(
                "{} bounds cannot constrain a sample of size {n}",
                self.bounds.len()
            )));
        }
        self.bounds.resize(n, 1.0);
        Ok(self)
    }

    /// Parses the line-oriented text format: one decimal per line, blank
    /// lines and lines starting with `#` ignored.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut raw = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let value: f64 = line.parse().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("cannot parse {line:?} as a number"),
            })?;
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Parse { line: idx + 1, message: format!("bound {value} is outside [0, 1]") });
            }
            raw.push(value);
        }
        Self::new(raw)
    }
}

impl fmt::Display for DiscreteBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bounds {
            writeln!(f, "{b:?}")?;
        }
        Ok(())
    }
}

/// `B'_i = min_{j >= i} B_j`.
pub fn suffix_min_normalize(raw: &[f64]) -> Result<DiscreteBounds> {
    DiscreteBounds::new(raw.to_vec())
}

/// Maps lower bounds `X(i) >= b_i` to upper bounds on the reflected sample
/// `1 - X`, namely `B_j = 1 - b_{n+1-j}`.
pub fn reflect_lower_to_upper(lower: &[f64]) -> Result<DiscreteBounds> {
    for (i, &b) in lower.iter().enumerate() {
        if !(0.0..=1.0).contains(&b) {
            return Err(invalid(format!("lower bound {} is {b}, outside [0, 1]", i + 1)));
        }
    }
    DiscreteBounds::new(lower.iter().rev().map(|&b| 1.0 - b).collect())
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A nondecreasing boundary `b: [0, 1] -> R` with optional known breakpoints
/// (jump locations). Monotonicity is the caller's contract; see
/// [`MonotoneBoundary::is_monotone_on_grid`].
#[derive(Clone)]
pub struct MonotoneBoundary {
    eval: Evaluator,
    terminal_value: f64,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for MonotoneBoundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneBoundary")
            .field("terminal_value", &self.terminal_value)
            .field("breakpoints", &self.breakpoints.len())
            .finish()
    }
}

impl MonotoneBoundary {
    pub fn new(eval: impl Fn(f64) -> f64 + Send + Sync + 'static, breakpoints: &[f64]) -> Self {
        let terminal_value = eval(1.0);
        let mut breakpoints: Vec<f64> = breakpoints.iter().copied().filter(|t| (0.0..=1.0).contains(t)).collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        Self { eval: Arc::new(eval), terminal_value, breakpoints }
    }

    #[inline]
    pub fn evaluate(&self, t: f64) -> f64 {
        if t >= 1.0 {
            self.terminal_value
        } else {
            (self.eval)(t)
        }
    }

    /// `b(1)`.
    pub fn terminal_value(&self) -> f64 {
        self.terminal_value
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Spot check of the monotonicity contract on `points + 1` equispaced
    /// nodes plus the breakpoints.
    pub fn is_monotone_on_grid(&self, points: usize) -> bool {
        let mut ts = grid_with(points, &self.breakpoints);
        ts.dedup();
        ts.windows(2).all(|w| self.evaluate(w[0]) <= self.evaluate(w[1]))
    }
}

fn grid_with(points: usize, extra: &[f64]) -> Vec<f64> {
    let points = points.max(1);
    let mut ts: Vec<f64> = (0..=points).map(|k| k as f64 / points as f64).collect();
    ts.extend(extra.iter().copied().filter(|t| (0.0..=1.0).contains(t)));
    ts.sort_by(f64::total_cmp);
    ts
}

/// Running maximum `b_max(t) = max_{u <= t} b(u)`.
///
/// The maximum is taken exactly over `grid_points + 1` equispaced nodes and
/// the supplied breakpoints; between nodes `b_max(t) = max(b(t), running max
/// at the previous node)`. Monotone inputs are returned unchanged.
pub fn monotonize(
    b: impl Fn(f64) -> f64 + Send + Sync + 'static,
    grid_points: usize,
    breakpoints: &[f64],
) -> MonotoneBoundary {
    let nodes = grid_with(grid_points, breakpoints);
    let mut running = Vec::with_capacity(nodes.len());
    let mut acc = f64::NEG_INFINITY;
    for &t in &nodes {
        acc = acc.max(b(t));
        running.push(acc);
    }
    let eval = move |t: f64| {
        let idx = nodes.partition_point(|&u| u <= t);
        let prefix = if idx == 0 { f64::NEG_INFINITY } else { running[idx - 1] };
        prefix.max(b(t))
    };
    MonotoneBoundary::new(eval, breakpoints)
}

/// First integer passage times `B_i = inf{t : b(t) > i - 1}` for
/// `i = 1..=ceil(b(1))`.
///
/// Each time is bracketed by bisection to width `tol`. When a known
/// breakpoint falls inside the bracket the exact breakpoint is returned, so
/// step boundaries are recovered without error.
pub fn first_passage_times(b: &MonotoneBoundary, tol: f64) -> Result<DiscreteBounds> {
    if !(tol > 0.0) {
        return Err(invalid(format!("passage tolerance must be positive, got {tol}")));
    }
    let top = b.terminal_value();
    if !(top > 0.0) {
        return DiscreteBounds::new(Vec::new());
    }
    if !top.is_finite() {
        return Err(invalid("boundary must be finite at t = 1"));
    }
    let count = top.ceil() as usize;
    let mut out = Vec::with_capacity(count);
    let mut lo = 0.0;
    for i in 1..=count {
        let level = (i - 1) as f64;
        if b.evaluate(0.0) > level {
            out.push(0.0);
            continue;
        }
        let mut hi = 1.0;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if b.evaluate(mid) > level {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(snap_to_breakpoint(b, level, lo, hi));
    }
    DiscreteBounds::new(out)
}

fn snap_to_breakpoint(b: &MonotoneBoundary, level: f64, lo: f64, hi: f64) -> f64 {
    let bps = b.breakpoints();
    let start = bps.partition_point(|&p| p < lo);
    let end = bps.partition_point(|&p| p <= hi);
    let inside = &bps[start..end];
    if inside.is_empty() {
        return hi;
    }
    let mut left = None;
    let mut right = None;
    for &p in inside {
        if b.evaluate(p) <= level {
            left = Some(p);
        } else if right.is_none() {
            right = Some(p);
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => {
            if b.evaluate(0.5 * (l + r)) > level {
                l
            } else {
                r
            }
        }
        (Some(l), None) => l,
        (None, Some(r)) => r,
        (None, None) => hi,
    }
}

/// Counting boundary `b(t) = #{i : B_i < t}`, with `b(1) = n` so that bounds
/// equal to 1 survive the round trip.
pub fn bounds_to_step_function(bounds: &DiscreteBounds) -> MonotoneBoundary {
    let sorted = bounds.as_slice().to_vec();
    let n = sorted.len() as f64;
    let breakpoints = sorted.clone();
    let mut step = MonotoneBoundary::new(move |t| sorted.partition_point(|&b| b < t) as f64, &breakpoints);
    step.terminal_value = n;
    step
}
