//! Fixtures shared by the benchmarks.

use ncprob_core::gof::{self, berk_jones_plus};
use ncprob_core::DiscreteBounds;

/// Berk–Jones `M⁺` bounds at (approximately) the 5% level for size `n`.
pub fn berk_jones_bounds(n: usize) -> DiscreteBounds {
    let spec = berk_jones_plus();
    let level = gof::threshold(&spec, n, 0.05, 1e-4).expect("threshold exists");
    gof::bounds_for_level(&spec, n, level).expect("valid level")
}

/// A smooth probability vector of length `len` for convolution benchmarks.
pub fn bump(len: usize) -> Vec<f64> {
    let mid = len as f64 / 2.0;
    let width = (len as f64 / 6.0).max(1.0);
    (0..len).map(|i| (-((i as f64 - mid) / width).powi(2)).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures() {
        let b = berk_jones_bounds(50);
        assert_eq!(b.n(), 50);
        let p = 1.0 - ncprob_core::ncprob(&b, &Default::default()).unwrap().prob;
        assert!((p - 0.05).abs() < 2e-4);
        assert_eq!(bump(7).len(), 7);
    }
}
