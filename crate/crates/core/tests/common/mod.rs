#![allow(dead_code)]

use ncprob_core::gof;
use ncprob_core::DiscreteBounds;
use rand::Rng;

/// Normalized bounds from one of several families, chosen at random:
/// sorted uniforms, powers of sorted uniforms, statistic level sets, and
/// sets with ties, zeros of width and trailing ones.
pub fn random_bounds(rng: &mut impl Rng, n: usize) -> DiscreteBounds {
    if n == 0 {
        return DiscreteBounds::new(Vec::new()).unwrap();
    }
    let sorted = |rng: &mut dyn FnMut() -> f64| {
        let mut v: Vec<f64> = (0..n).map(|_| rng()).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let raw = match rng.gen_range(0..5) {
        0 => sorted(&mut || rng.gen::<f64>()),
        1 => {
            let gamma = rng.gen_range(0.1..1.0);
            sorted(&mut || rng.gen::<f64>().powf(gamma))
        }
        2 => {
            let d = rng.gen_range(0.3..2.5) / (n as f64).sqrt();
            return gof::bounds_for_level(&gof::ks_minus(), n, d.min(1.0)).unwrap();
        }
        3 => {
            let s = rng.gen_range(0.001..0.3);
            return gof::bounds_for_level(&gof::berk_jones_plus(), n, s).unwrap();
        }
        _ => {
            // Ties: repeat a few random levels, then finish with ones.
            let mut v = sorted(&mut || (rng.gen::<f64>() * 8.0).ceil() / 8.0);
            let ones = rng.gen_range(0..=n / 3);
            for b in v.iter_mut().rev().take(ones) {
                *b = 1.0;
            }
            v
        }
    };
    DiscreteBounds::new(raw).unwrap()
}

/// `|a - b| <= rel·max(|a|, |b|)`.
pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
