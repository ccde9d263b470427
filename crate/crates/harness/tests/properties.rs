use l3blind_harness::config::Method;
use l3blind_harness::report::stats;
use l3blind_harness::seeds::{scenario_seed, solver_seed};
use proptest::prelude::*;

proptest! {
    #[test]
    fn summary_statistics_are_ordered(values in prop::collection::vec(-1e6f64..1e6, 2..60)) {
        let s = stats(&values);
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let slack = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
        prop_assert_eq!(s.n, values.len());
        prop_assert!(s.mean >= lo - slack && s.mean <= hi + slack);
        prop_assert!(s.median >= lo && s.median <= hi);
        prop_assert!(s.ci_half >= 0.0);
    }

    #[test]
    fn constant_samples_have_zero_width(v in -1e3f64..1e3, n in 2usize..40) {
        let s = stats(&vec![v; n]);
        prop_assert!((s.mean - v).abs() <= 1e-12 * (1.0 + v.abs()));
        prop_assert!(s.ci_half.abs() < 1e-9);
    }

    #[test]
    fn trial_seeds_differ_from_neighbours(base in any::<u64>(), sweep in 0usize..1000, trial in 0usize..100_000) {
        let s = scenario_seed(base, sweep, trial);
        prop_assert_ne!(s, scenario_seed(base, sweep, trial + 1));
        prop_assert_ne!(s, scenario_seed(base, sweep + 1, trial));
        prop_assert_ne!(s, scenario_seed(base.wrapping_add(1), sweep, trial));
        prop_assert_ne!(solver_seed(s, Method::L3), solver_seed(s, Method::L4));
    }
}
