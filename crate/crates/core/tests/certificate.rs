use std::f64::consts::LN_2;

use lgasym_core::certificate::{default_target, find_cutoff, gronwall_certificate, verify_certificate};
use lgasym_core::oracle::Fixture;
use lgasym_core::volterra::{solve_exponential, ExprForcing, FnForcing, SolveOptions, Weight};
use proptest::prelude::*;

#[test]
fn fixtures_verify() {
    for nu in [0.0, 1.0, 1.5, 3.0] {
        let split = Fixture::ModifiedBessel { nu }.split_at_infinity().unwrap();
        let g = ExprForcing::new(split.g().clone());
        let a = find_cutoff(&g, 1.0, default_target(), Weight::Abs).unwrap();
        let cert = gronwall_certificate(&g, a, Weight::Abs).unwrap();
        assert!(cert.holds() && cert.disk_radius() < 1.0);
        // tail = |c|/a for g = c/x^2
        let c = (4.0 * nu * nu - 1.0) / 4.0;
        assert!((cert.g_l1_tail - c.abs() / a).abs() < 1e-10);
        let sol = solve_exponential(&g, &SolveOptions::new(a).tail_tol(1e-6)).unwrap();
        let report = verify_certificate(&cert, &sol);
        assert!(report.passed(), "nu = {nu}: {:?}", report.checks);
        assert_eq!(report.envelope_violations, 0);
    }
}

#[test]
fn cutoff_meets_the_target_on_the_lattice() {
    let g = FnForcing::new(|x: f64| 5.0 / (x * x));
    let a = find_cutoff(&g, 1.0, LN_2, Weight::Abs).unwrap();
    // The exact threshold is 5 / log 2 = 7.2135; the lattice step there is 0.01.
    assert!((a - 7.22).abs() < 1e-12, "{a}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn cutoff_is_monotone_in_left(c in 0.1f64..10.0, k in 0.2f64..3.0, l1 in 0.0f64..20.0, l2 in 0.0f64..20.0) {
        let g = FnForcing::new(move |x: f64| c * (-k * x).exp() + c / (1.0 + x * x));
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        let a_lo = find_cutoff(&g, lo, default_target(), Weight::Abs).unwrap();
        let a_hi = find_cutoff(&g, hi, default_target(), Weight::Abs).unwrap();
        prop_assert!(a_lo <= a_hi);
        prop_assert!(a_lo >= lo && a_hi >= hi);
    }

    #[test]
    fn certified_radius_is_below_one(c in 0.1f64..10.0, p in 1.2f64..4.0, left in 0.5f64..5.0) {
        let g = FnForcing::new(move |x: f64| c * x.powf(-p));
        let a = find_cutoff(&g, left, default_target(), Weight::Abs).unwrap();
        let cert = gronwall_certificate(&g, a, Weight::Abs).unwrap();
        prop_assert!(cert.holds());
        prop_assert!(cert.disk_radius() < 1.0);
        prop_assert!(cert.g_l1_tail <= default_target() * (1.0 + 1e-9));
        let exact = c * a.powf(1.0 - p) / (p - 1.0);
        prop_assert!((cert.g_l1_tail - exact).abs() <= 1e-9 * exact);
    }
}
