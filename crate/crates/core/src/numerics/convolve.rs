use std::cell::RefCell;

use realfft::num_complex::Complex;
use realfft::RealFftPlanner;

use crate::error::{invalid, Result};

/// Below this length (of the shorter operand) convolutions are summed directly.
pub const DIRECT_THRESHOLD: usize = 64;

/// Products with at most this many multiply-adds are also summed directly.
pub const DIRECT_WORK: usize = 1 << 16;

thread_local! {
    static PLANNER: RefCell<RealFftPlanner<f64>> = RefCell::new(RealFftPlanner::new());
}

/// Smallest even `2^a 3^b` that is at least `min_len`.
pub(crate) fn fft_len(min_len: usize) -> usize {
    let mut best = usize::MAX;
    let mut p3 = 1usize;
    while p3 < 2 * min_len.max(1) {
        let mut n = 2 * p3;
        while n < min_len {
            n *= 2;
        }
        best = best.min(n);
        p3 *= 3;
    }
    best
}

/// First `out_len` coefficients of the linear convolution of `a` and `b`.
///
/// Negative FFT round-off is clamped to zero: every operand in this crate is a
/// probability vector.
pub fn linear_convolve(a: &[f64], b: &[f64], out_len: usize) -> Result<Vec<f64>> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("cannot convolve an empty sequence"));
    }
    if out_len > a.len() + b.len() - 1 {
        return Err(invalid(format!(
            "requested {out_len} coefficients but the full convolution has {}",
            a.len() + b.len() - 1
        )));
    }
    let mut out = vec![0.0; out_len];
    convolve_into(a, b, &mut out);
    Ok(out)
}

pub(crate) fn convolve_into(a: &[f64], b: &[f64], out: &mut [f64]) {
    let out_len = out.len();
    let a = &a[..a.len().min(out_len)];
    let b = &b[..b.len().min(out_len)];
    out.fill(0.0);
    if a.is_empty() || b.is_empty() {
        return;
    }
    if a.len().min(b.len()) < DIRECT_THRESHOLD || a.len() * b.len() <= DIRECT_WORK {
        convolve_direct(a, b, out);
    } else {
        convolve_fft(a, b, out);
    }
}

fn convolve_direct(a: &[f64], b: &[f64], out: &mut [f64]) {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let out_len = out.len();
    for (s, &w) in short.iter().enumerate() {
        if s >= out_len {
            break;
        }
        if w == 0.0 {
            continue;
        }
        let end = out_len.min(s + long.len());
        for (o, &x) in out[s..end].iter_mut().zip(long) {
            *o += w * x;
        }
    }
}

fn convolve_fft(a: &[f64], b: &[f64], out: &mut [f64]) {
    let size = fft_len(a.len() + b.len() - 1);
    let (r2c, c2r) = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(size), p.plan_fft_inverse(size))
    });

    let mut buf_a = r2c.make_input_vec();
    buf_a[..a.len()].copy_from_slice(a);
    let mut buf_b = r2c.make_input_vec();
    buf_b[..b.len()].copy_from_slice(b);
    let mut spec_a = r2c.make_output_vec();
    let mut spec_b = r2c.make_output_vec();
    r2c.process(&mut buf_a, &mut spec_a).expect("forward transform length");
    r2c.process(&mut buf_b, &mut spec_b).expect("forward transform length");

    for (x, y) in spec_a.iter_mut().zip(&spec_b) {
        *x *= *y;
    }
    spec_a[0].im = 0.0;
    if let Some(last) = spec_a.last_mut() {
        *last = Complex::new(last.re, 0.0);
    }
    c2r.process(&mut spec_a, &mut buf_a).expect("inverse transform length");

    let scale = 1.0 / size as f64;
    for (o, &x) in out.iter_mut().zip(&buf_a) {
        *o = (x * scale).max(0.0);
    }
}
