mod common;

use ncprob_core::boundary::{reflect_lower_to_upper, suffix_min_normalize};
use ncprob_core::fastpath::noncrossing_fast;
use ncprob_core::gof::{self, berk_jones_plus, higher_criticism, ks_minus, ks_plus};
use ncprob_core::numerics::{reg_inc_beta, reg_inc_beta_inv};
use ncprob_core::oracle::quadrature_ncprob;
use ncprob_core::{ncprob, AlternativeTransform, DiscreteBounds, Method, NcOptions};
use proptest::prelude::*;
use rand::SeedableRng;

use common::rel_diff;

fn prob(bounds: &DiscreteBounds, method: Method) -> f64 {
    ncprob(bounds, &NcOptions::with_method(method)).unwrap().prob
}

fn sorted(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..=1.0, 1..=max_len).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v
    })
}

/// Sorted bounds from a power of uniforms, so that tight and loose sets both occur.
fn shaped(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    (sorted(max_len), 0.1f64..1.0).prop_map(|(v, g)| v.into_iter().map(|x| x.powf(g)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn methods_agree(raw in shaped(80)) {
        let b = DiscreteBounds::new(raw).unwrap();
        let reference = prob(&b, Method::Binomial);
        for method in [Method::Poisson, Method::Fft, Method::Fast] {
            let p = prob(&b, method);
            prop_assert!(rel_diff(p, reference) <= 1e-10, "{method}: {p} vs {reference}");
        }
    }

    #[test]
    fn methods_agree_with_quadrature(raw in shaped(7)) {
        let b = DiscreteBounds::new(raw).unwrap();
        let exact = quadrature_ncprob(&b).unwrap();
        for method in Method::ALL {
            let p = prob(&b, method);
            prop_assert!((p - exact).abs() <= 1e-10, "{method}: {p} vs {exact}");
        }
    }

    #[test]
    fn raising_a_bound_never_lowers_the_probability(raw in shaped(60), pick in 0.0f64..1.0, t in 0.0f64..=1.0) {
        let i = ((pick * raw.len() as f64) as usize).min(raw.len() - 1);
        let cap = raw.get(i + 1).copied().unwrap_or(1.0);
        let mut raised = raw.clone();
        raised[i] += t * (cap - raw[i]);
        let (lo, hi) = (DiscreteBounds::new(raw).unwrap(), DiscreteBounds::new(raised).unwrap());
        for method in [Method::Fast, Method::Binomial] {
            let (a, b) = (prob(&lo, method), prob(&hi, method));
            prop_assert!(b >= a * (1.0 - 1e-12), "{method}: {a} -> {b}");
        }
    }

    #[test]
    fn probabilities_are_probabilities(raw in shaped(120)) {
        let b = DiscreteBounds::new(raw).unwrap();
        for method in Method::ALL {
            let r = ncprob(&b, &NcOptions::with_method(method)).unwrap();
            prop_assert!((0.0..=1.0).contains(&r.prob));
            prop_assert!(r.log_prob <= 0.0);
            if r.prob > 0.0 {
                prop_assert!((r.log_prob.exp() - r.prob).abs() <= 1e-15 * r.prob.max(1e-300));
            }
            prop_assert_eq!(r.method, method);
        }
    }

    #[test]
    fn raw_input_is_read_through_its_suffix_minimum(raw in proptest::collection::vec(0.0f64..=1.0, 1..40)) {
        let direct = DiscreteBounds::new(raw.clone()).unwrap();
        let normalized = suffix_min_normalize(&raw).unwrap();
        prop_assert_eq!(direct.as_slice(), normalized.as_slice());
        prop_assert!(direct.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn reflection_is_an_involution(v in sorted(50)) {
        let once = reflect_lower_to_upper(&v).unwrap();
        let twice = reflect_lower_to_upper(once.as_slice()).unwrap();
        for (x, y) in twice.as_slice().iter().zip(&v) {
            prop_assert!((x - y).abs() <= 1e-15);
        }
        let n = v.len();
        for (j, b) in once.as_slice().iter().enumerate() {
            prop_assert_eq!(*b, 1.0 - v[n - 1 - j]);
        }
    }

    #[test]
    fn jump_size_does_not_matter(raw in shaped(250), k in 1usize..300) {
        let b = DiscreteBounds::new(raw).unwrap();
        let reference = noncrossing_fast(&b, Some(1)).unwrap().prob;
        let p = noncrossing_fast(&b, Some(k)).unwrap().prob;
        prop_assert!(rel_diff(p, reference) <= 1e-9, "k={k}: {p} vs {reference}");
    }

    #[test]
    fn incomplete_beta_round_trip(a in 0.5f64..2000.0, b in 0.5f64..2000.0, t in 1usize..100) {
        let y = t as f64 / 100.0;
        let x = reg_inc_beta_inv(a, b, y).unwrap();
        prop_assert!((0.0..=1.0).contains(&x));
        prop_assert!((reg_inc_beta(a, b, x).unwrap() - y).abs() <= 1e-10);
    }

    #[test]
    fn incomplete_beta_is_monotone(a in 0.5f64..500.0, b in 0.5f64..500.0) {
        let mut prev = reg_inc_beta(a, b, 0.0).unwrap();
        prop_assert_eq!(prev, 0.0);
        for t in 1..=200 {
            let v = reg_inc_beta(a, b, t as f64 / 200.0).unwrap();
            prop_assert!(v >= prev - 1e-15);
            prev = v;
        }
        prop_assert_eq!(prev, 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ks_plus_and_ks_minus_are_equal_in_law(n in 1usize..=500, t in 0.05f64..2.0) {
        let d = (t / (n as f64).sqrt()).min(1.0);
        let minus = gof::pvalue(&ks_minus(), n, d).unwrap();
        let plus = gof::pvalue(&ks_plus(), n, d).unwrap();
        prop_assert!((minus - plus).abs() <= 1e-10, "{minus} vs {plus}");
    }

    #[test]
    fn identity_power_is_the_pvalue(n in 1usize..200, level in 0.001f64..0.5, which in 0usize..3) {
        let spec = vec![berk_jones_plus(), ks_minus(), higher_criticism()].swap_remove(which);
        let s = match which {
            0 => level,
            1 => level.sqrt(),
            _ => 8.0 * level,
        };
        let p = gof::pvalue(&spec, n, s).unwrap();
        prop_assert_eq!(gof::power(&spec, n, s, &AlternativeTransform::identity()).unwrap(), p);
    }
}

fn check_monotone(values: &[f64], increasing: bool) {
    for w in values.windows(2) {
        let ok = if increasing { w[1] >= w[0] - 1e-12 } else { w[1] <= w[0] + 1e-12 };
        assert!(ok, "{values:?}");
    }
}

#[test]
fn pvalues_are_monotone_in_the_level() {
    for n in [1usize, 7, 60, 300] {
        let grid = |lo: f64, hi: f64| (0..=40).map(move |t| lo + (hi - lo) * t as f64 / 40.0);
        // Max forms reject for large values, the min form for small ones.
        let ks: Vec<f64> = grid(0.0, 1.0).map(|s| gof::pvalue(&ks_minus(), n, s).unwrap()).collect();
        check_monotone(&ks, false);
        let hc_low = higher_criticism().range(n).0.max(-1.0);
        let hc: Vec<f64> = grid(hc_low, 6.0).map(|s| gof::pvalue(&higher_criticism(), n, s).unwrap()).collect();
        check_monotone(&hc, false);
        let bj: Vec<f64> = grid(1e-6, 0.5).map(|s| gof::pvalue(&berk_jones_plus(), n, s).unwrap()).collect();
        check_monotone(&bj, true);
    }
}

#[test]
fn random_families_agree_across_methods() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    for n in (0..=150).step_by(5) {
        let b = common::random_bounds(&mut rng, n);
        let reference = prob(&b, Method::Binomial);
        for method in [Method::Poisson, Method::Fft, Method::Fast] {
            assert!(rel_diff(prob(&b, method), reference) <= 1e-10, "n={n} {method}");
        }
    }
}
