//! Block-jump propagation in O(n²).
//!
//! A block advances `Q⁽ⁱ⁾` straight to `Q⁽ⁱ⁺ᵏ⁾`. One long convolution moves
//! every path from `B_i` to `B_{i+k}` while ignoring the constraints in
//! between (`nc_bulk`); paths that first cross at some `B_j` inside the
//! block are then subtracted (`fc_joint`). A path first crossing at `j`
//! sits at count `j - 1` at both `B_{j-1}` and `B_j`, so its weight only
//! needs the diagonal `Q(j-1, j-1)`, which a small k×k run recovers.

use std::time::Instant;

use crate::boundary::DiscreteBounds;
use crate::error::{invalid, Error, Result};
use crate::numerics::PoissonKernel;
use crate::propagation::{self, convolve_kernel, fft_step, window_start, PropagationState};
use crate::{check_deadline, Method, ProbabilityResult};

/// A block is redone stepwise when more than this fraction of the bulk mass
/// had to be clamped away.
pub const CLAMP_TOLERANCE: f64 = 1e-6;

/// A block is redone stepwise when it keeps less than this fraction of the
/// bulk mass that lands inside the window.
pub const MIN_RETAINED_FRACTION: f64 = 1e-3;

/// Per-block data for the first-crossing correction.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockContext {
    /// Block start index.
    pub i: usize,
    /// Block length.
    pub k: usize,
    /// `Q(j, j)` for `j = i..=i+k-2`, on the scale of the starting state.
    pub diag: Vec<f64>,
    /// `B_i..=B_{i+k}` with sentinels.
    pub bounds: Vec<f64>,
}

impl BlockContext {
    pub fn new(state: &PropagationState, k: usize, bounds: &DiscreteBounds) -> Result<Self> {
        check_block(state, k, state.n(), bounds)?;
        let i = state.step();
        let window: Vec<f64> = (i..=i + k).map(|m| bounds.extended(m)).collect();
        let diag = in_block_diagonal(state.values(), &window, state.n())?;
        Ok(Self { i, k, diag, bounds: window })
    }

    /// Weight and shifted kernel of the paths first crossing at `B_j`:
    /// `FC(j, ℓ) = weight · kernel.get(ℓ - (j - 1))`.
    fn first_crossing(&self, j: usize, n: usize) -> Result<(f64, PoissonKernel)> {
        let d = j - self.i;
        let weight = self.diag[d - 1] * (-(n as f64) * (self.bounds[d] - self.bounds[d - 1])).exp();
        let kernel = PoissonKernel::new(n as f64 * (self.bounds[self.k] - self.bounds[d]), n + 1 - j)?;
        Ok((weight, kernel))
    }

    fn check(&self) -> Result<()> {
        let want = self.k.saturating_sub(1);
        if self.diag.len() != want || self.bounds.len() != self.k + 1 {
            return Err(Error::ContractViolation(format!(
                "block at {} of length {} needs {want} diagonal values, has {}",
                self.i,
                self.k,
                self.diag.len()
            )));
        }
        Ok(())
    }
}

fn check_block(state: &PropagationState, k: usize, n: usize, bounds: &DiscreteBounds) -> Result<()> {
    if state.n() != n || bounds.n() != n {
        return Err(invalid(format!(
            "sizes disagree: state has n = {}, bounds have n = {}, call uses n = {n}",
            state.n(),
            bounds.n()
        )));
    }
    if k == 0 {
        return Err(invalid("jump size must be at least 1"));
    }
    if state.step() + k > n + 1 {
        return Err(invalid(format!("block {}..{} runs past n + 1 = {}", state.step(), state.step() + k, n + 1)));
    }
    Ok(())
}

/// `Q(m, m)` for `m = i..=i+k-2`. Count `m` at step `m` only depends on
/// counts `i..=m` at step `i`, so the leading `k - 1` entries suffice.
fn in_block_diagonal(q: &[f64], window: &[f64], n: usize) -> Result<Vec<f64>> {
    let k = window.len() - 1;
    if k < 2 {
        return Ok(Vec::new());
    }
    let mut sub = q[..k - 1].to_vec();
    let mut diag = Vec::with_capacity(k - 1);
    diag.push(sub[0]);
    for m in 0..k - 2 {
        let kernel = PoissonKernel::new(n as f64 * (window[m + 1] - window[m]), sub.len() - 1)?;
        let mut next = convolve_kernel(&sub, &kernel, sub.len());
        next.remove(0);
        diag.push(next[0]);
        sub = next;
    }
    Ok(diag)
}

/// `Pr(ξ(B_{i+k}) = ℓ, no crossing up to B_i)` for `ℓ = i..=n`, on the scale of `state`.
pub fn nc_bulk(state: &PropagationState, k: usize, n: usize, bounds: &DiscreteBounds) -> Result<Vec<f64>> {
    check_block(state, k, n, bounds)?;
    let i = state.step();
    let q = state.values();
    let lambda = n as f64 * (bounds.extended(i + k) - bounds.extended(i));
    let kernel = PoissonKernel::new(lambda, q.len() - 1)?;
    Ok(convolve_kernel(q, &kernel, q.len()))
}

/// `Pr(first crossing at B_j, ξ(B_{i+k}) = ℓ)` as a dense matrix with rows
/// `j = i+1..=i+k-1` and columns `ℓ = min(i+k, n)..=n`.
pub fn fc_joint(ctx: &BlockContext, n: usize) -> Result<Vec<Vec<f64>>> {
    ctx.check()?;
    let t = window_start(n, ctx.i + ctx.k);
    let mut rows = Vec::with_capacity(ctx.k.saturating_sub(1));
    for j in ctx.i + 1..ctx.i + ctx.k {
        let (weight, kernel) = ctx.first_crossing(j, n)?;
        rows.push((t..=n).map(|l| weight * kernel.get(l + 1 - j)).collect());
    }
    Ok(rows)
}

/// Advances `state` from step `i` to step `i + k`.
pub fn block_advance(state: &PropagationState, k: usize, n: usize, bounds: &DiscreteBounds) -> Result<PropagationState> {
    let bulk = nc_bulk(state, k, n, bounds)?;
    let ctx = BlockContext::new(state, k, bounds)?;
    let i = state.step();
    let t = window_start(n, i + k);
    let mut out = bulk[t - i..].to_vec();
    for j in i + 1..i + k {
        let (weight, kernel) = ctx.first_crossing(j, n)?;
        if weight == 0.0 {
            continue;
        }
        // FC(j, ℓ) is kernel.values[idx] at ℓ = j - 1 + kernel.offset + idx.
        let base = j - 1 + kernel.offset;
        let skip = t.saturating_sub(base);
        for (l, &w) in (base + skip..=n).zip(kernel.values.iter().skip(skip)) {
            out[l - t] -= weight * w;
        }
    }

    let mut clamped = 0.0;
    for v in &mut out {
        if *v < 0.0 {
            clamped -= *v;
            *v = 0.0;
        }
    }
    let bulk_total: f64 = bulk.iter().sum();
    let bulk_kept: f64 = bulk[t - i..].iter().sum();
    let retained: f64 = out.iter().sum();
    if clamped > CLAMP_TOLERANCE * bulk_total || retained < MIN_RETAINED_FRACTION * bulk_kept {
        return stepwise(state, k, n, bounds);
    }

    let mut next = PropagationState::from_raw(n, i + k, out, state.log_scale());
    next.normalize();
    Ok(next)
}

fn stepwise(state: &PropagationState, k: usize, n: usize, bounds: &DiscreteBounds) -> Result<PropagationState> {
    let mut s = state.clone();
    for m in state.step()..state.step() + k {
        s = fft_step(&s, bounds.extended(m + 1) - bounds.extended(m), n)?;
    }
    Ok(s)
}

/// Default block length, `max(1, floor(sqrt(n)))`.
pub fn default_jump_size(n: usize) -> usize {
    ((n as f64).sqrt().floor() as usize).max(1)
}

/// Non-crossing probability by block jumps of length `k` (default
/// [`default_jump_size`]). Lengths above `n + 1` are clamped.
pub fn noncrossing_fast(bounds: &DiscreteBounds, k: Option<usize>) -> Result<ProbabilityResult> {
    noncrossing_fast_with(bounds, k, None)
}

pub fn noncrossing_fast_with(
    bounds: &DiscreteBounds,
    k: Option<usize>,
    deadline: Option<Instant>,
) -> Result<ProbabilityResult> {
    if k == Some(0) {
        return Err(invalid("jump size must be at least 1"));
    }
    if let Some(r) = propagation::trivial_result(bounds, Method::Fast) {
        return Ok(r);
    }
    let n = bounds.n();
    let k = k.unwrap_or_else(|| default_jump_size(n)).min(n + 1);
    let mut state = PropagationState::initial(n);
    while state.step() <= n {
        check_deadline(deadline)?;
        let len = k.min(n + 1 - state.step());
        state = block_advance(&state, len, n, bounds)?;
    }
    propagation::finalize(&state, n, Method::Fast)
}
