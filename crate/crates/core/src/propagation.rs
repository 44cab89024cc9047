//! Stepwise propagation of non-crossing probabilities over the bounds
//! `B_0 = 0 < B_1 <= ... <= B_n < B_{n+1} = 1`.
//!
//! The Poisson chains track `Q(i, j) = P(ξ(B_i) = j, ξ(B_l) >= l for l < i)`
//! for a rate-`n` Poisson process ξ and recover the empirical-process answer
//! by conditioning on `ξ(1) = n`. The binomial chain tracks the same
//! quantity for the empirical counting process directly.

use std::time::Instant;

use crate::boundary::DiscreteBounds;
use crate::error::{invalid, Error, Result};
use crate::numerics::{self, binomial_pmf_vector, poisson_pmf_vector, PoissonKernel};
use crate::{check_deadline, Method, ProbabilityResult};

/// Non-crossing probabilities at step `i`, stored for counts
/// `min(i, n)..=n` and scaled by `exp(log_scale)`. Every step rescales the
/// window by a power of two so that its largest entry lies in `[1, 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationState {
    n: usize,
    step: usize,
    q: Vec<f64>,
    log_scale: f64,
}

pub(crate) fn window_start(n: usize, step: usize) -> usize {
    step.min(n)
}

impl PropagationState {
    /// `Q(0, j) = δ(j, 0)` over counts `0..=n`.
    pub fn initial(n: usize) -> Self {
        let mut q = vec![0.0; n + 1];
        q[0] = 1.0;
        Self { n, step: 0, q, log_scale: 0.0 }
    }

    /// Builds a state from raw window values for counts `min(step, n)..=n`.
    pub fn from_parts(n: usize, step: usize, q: Vec<f64>, log_scale: f64) -> Result<Self> {
        if step > n + 1 {
            return Err(invalid(format!("step {step} is past n + 1 = {}", n + 1)));
        }
        let want = n - window_start(n, step) + 1;
        if q.len() != want {
            return Err(invalid(format!("state at step {step} needs {want} entries, got {}", q.len())));
        }
        if q.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(invalid("state entries must be finite and non-negative"));
        }
        Ok(Self { n, step, q, log_scale })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Count represented by `values()[0]`.
    pub fn first_count(&self) -> usize {
        window_start(self.n, self.step)
    }

    /// Scaled window values; multiply by `exp(log_scale())` for probabilities.
    pub fn values(&self) -> &[f64] {
        &self.q
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// Unscaled probability at `count`.
    pub fn probability(&self, count: usize) -> f64 {
        count
            .checked_sub(self.first_count())
            .and_then(|i| self.q.get(i))
            .map_or(0.0, |v| v * self.log_scale.exp())
    }

    /// Unscaled total mass of the window.
    pub fn total(&self) -> f64 {
        self.q.iter().sum::<f64>() * self.log_scale.exp()
    }

    pub(crate) fn from_raw(n: usize, step: usize, q: Vec<f64>, log_scale: f64) -> Self {
        debug_assert_eq!(q.len(), n - window_start(n, step) + 1);
        Self { n, step, q, log_scale }
    }

    /// Rescales the window by a power of two (exactly) so that its largest
    /// entry lies in `[1, 2)`.
    pub(crate) fn normalize(&mut self) {
        let mut max = self.q.iter().copied().fold(0.0, f64::max);
        if max == 0.0 || !max.is_finite() {
            return;
        }
        let mut shift = 0i32;
        if max < f64::MIN_POSITIVE {
            shift = 600;
            max *= 2f64.powi(600);
        }
        let e = ((max.to_bits() >> 52) & 0x7ff) as i32 - 1023;
        shift -= e;
        if shift == 0 {
            return;
        }
        // Two factors keep each one representable for shifts beyond ±1023.
        let (f1, f2) = (2f64.powi(shift / 2), 2f64.powi(shift - shift / 2));
        for v in &mut self.q {
            *v = *v * f1 * f2;
        }
        self.log_scale -= shift as f64 * std::f64::consts::LN_2;
    }

    fn expect_advanceable(&self, n: usize) -> Result<()> {
        if n != self.n {
            return Err(Error::ContractViolation(format!("state has n = {}, step called with n = {n}", self.n)));
        }
        if self.step > self.n {
            return Err(Error::ContractViolation(format!("state at step {} cannot advance past n + 1", self.step)));
        }
        Ok(())
    }

    /// Entries dropped by the truncation that enforces `ξ(B_{i+1}) >= i + 1`.
    fn drop_count(&self) -> usize {
        window_start(self.n, self.step + 1) - self.first_count()
    }

    fn advanced(&self, mut conv: Vec<f64>) -> Self {
        conv.drain(..self.drop_count());
        let mut next = Self { n: self.n, step: self.step + 1, q: conv, log_scale: self.log_scale };
        next.normalize();
        next
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(invalid(format!("bound increment must be finite and non-negative, got {delta}")));
    }
    Ok(())
}

/// First `out_len` coefficients of `q ⋆ kernel`.
pub(crate) fn convolve_kernel(q: &[f64], kernel: &PoissonKernel, out_len: usize) -> Vec<f64> {
    let mut out = vec![0.0; out_len];
    if kernel.offset < out_len {
        numerics::convolve_into(q, &kernel.values, &mut out[kernel.offset..]);
    }
    out
}

/// One Poisson transition by direct summation over the full window.
pub fn poisson_step(state: &PropagationState, delta: f64, n: usize) -> Result<PropagationState> {
    state.expect_advanceable(n)?;
    check_delta(delta)?;
    let len = state.q.len();
    if delta == 0.0 {
        return Ok(state.advanced(state.q.clone()));
    }
    let pmf = poisson_pmf_vector(n as f64 * delta, len - 1)?.into_inner();
    let q = &state.q;
    let mut conv = vec![0.0; len];
    for (t, c) in conv.iter_mut().enumerate().skip(state.drop_count()) {
        *c = (0..=t).map(|u| q[u] * pmf[t - u]).sum();
    }
    Ok(state.advanced(conv))
}

/// One Poisson transition as a truncated linear convolution.
pub fn fft_step(state: &PropagationState, delta: f64, n: usize) -> Result<PropagationState> {
    state.expect_advanceable(n)?;
    check_delta(delta)?;
    let len = state.q.len();
    if delta == 0.0 {
        return Ok(state.advanced(state.q.clone()));
    }
    let kernel = PoissonKernel::new(n as f64 * delta, len - 1)?;
    Ok(state.advanced(convolve_kernel(&state.q, &kernel, len)))
}

/// One binomial transition of the empirical counting process, where `p` is
/// the conditional probability that a point above `B_i` lands below
/// `B_{i+1}`.
pub fn binomial_step(state: &PropagationState, p: f64, n: usize) -> Result<PropagationState> {
    state.expect_advanceable(n)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("transition probability must lie in [0, 1], got {p}")));
    }
    let len = state.q.len();
    let first = state.first_count();
    let mut conv = vec![0.0; len];
    for (u, &s) in state.q.iter().enumerate() {
        if s == 0.0 {
            continue;
        }
        let pmf = binomial_pmf_vector(n - (first + u), p)?;
        for (c, &w) in conv[u..].iter_mut().zip(&pmf) {
            *c += s * w;
        }
    }
    Ok(state.advanced(conv))
}

/// Conditions a Poisson chain at step `n + 1` on `ξ(1) = n`.
pub fn finalize(state: &PropagationState, n: usize, method: Method) -> Result<ProbabilityResult> {
    if state.n != n || state.step != n + 1 {
        return Err(Error::ContractViolation(format!(
            "finalize needs a state at step n + 1 = {}, got step {} of n = {}",
            n + 1,
            state.step,
            state.n
        )));
    }
    let value = state.q[0];
    if value == 0.0 {
        return Ok(ProbabilityResult::exact(0.0, method));
    }
    let log_prob = value.ln() + state.log_scale - numerics::ln_poisson_pmf_at_mean(n);
    Ok(ProbabilityResult::from_log(log_prob, method))
}

pub(crate) fn trivial_result(bounds: &DiscreteBounds, method: Method) -> Option<ProbabilityResult> {
    if bounds.is_empty() {
        Some(ProbabilityResult::exact(1.0, method))
    } else if bounds.forces_zero() {
        Some(ProbabilityResult::exact(0.0, method))
    } else {
        None
    }
}

fn poisson_chain(
    bounds: &DiscreteBounds,
    method: Method,
    deadline: Option<Instant>,
    step: fn(&PropagationState, f64, usize) -> Result<PropagationState>,
) -> Result<ProbabilityResult> {
    if let Some(r) = trivial_result(bounds, method) {
        return Ok(r);
    }
    let n = bounds.n();
    let mut state = PropagationState::initial(n);
    for i in 0..=n {
        check_deadline(deadline)?;
        state = step(&state, bounds.extended(i + 1) - bounds.extended(i), n)?;
    }
    finalize(&state, n, method)
}

/// Stepwise Poisson propagation with direct summation, O(n³).
pub fn noncrossing_poisson(bounds: &DiscreteBounds) -> Result<ProbabilityResult> {
    noncrossing_poisson_with(bounds, None)
}

pub fn noncrossing_poisson_with(bounds: &DiscreteBounds, deadline: Option<Instant>) -> Result<ProbabilityResult> {
    poisson_chain(bounds, Method::Poisson, deadline, poisson_step)
}

/// Stepwise Poisson propagation with FFT convolutions, O(n² log n).
pub fn noncrossing_fft(bounds: &DiscreteBounds) -> Result<ProbabilityResult> {
    noncrossing_fft_with(bounds, None)
}

pub fn noncrossing_fft_with(bounds: &DiscreteBounds, deadline: Option<Instant>) -> Result<ProbabilityResult> {
    poisson_chain(bounds, Method::Fft, deadline, fft_step)
}

/// Stepwise binomial propagation, O(n³). Needs no final normalization.
pub fn noncrossing_binomial(bounds: &DiscreteBounds) -> Result<ProbabilityResult> {
    noncrossing_binomial_with(bounds, None)
}

pub fn noncrossing_binomial_with(bounds: &DiscreteBounds, deadline: Option<Instant>) -> Result<ProbabilityResult> {
    let method = Method::Binomial;
    if let Some(r) = trivial_result(bounds, method) {
        return Ok(r);
    }
    let n = bounds.n();
    let mut state = PropagationState::initial(n);
    for i in 0..=n {
        check_deadline(deadline)?;
        let (lo, hi) = (bounds.extended(i), bounds.extended(i + 1));
        let p = if lo < 1.0 { ((hi - lo) / (1.0 - lo)).clamp(0.0, 1.0) } else { 0.0 };
        state = binomial_step(&state, p, n)?;
    }
    let value = state.q[0];
    if value == 0.0 {
        return Ok(ProbabilityResult::exact(0.0, method));
    }
    Ok(ProbabilityResult::from_log(value.ln() + state.log_scale, method))
}
