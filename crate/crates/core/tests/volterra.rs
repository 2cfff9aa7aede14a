use lgasym_core::certificate::{default_target, find_cutoff};
use lgasym_core::oracle::integrate_ivp;
use lgasym_core::transform::Regime;
use lgasym_core::volterra::{
    second_solution, solve_algebraic, solve_exponential, solve_oscillatory, AlgebraicBranch, Branch, ExponentialBranch,
    FnForcing, SolveOptions, Weight,
};
use proptest::prelude::*;

fn forcing(c: f64, k: f64, d: f64) -> impl Fn(f64) -> f64 {
    move |s: f64| c * (-k * s).exp() + d / ((s + 1.0) * (s + 1.0))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn gronwall_envelope_holds(c in -3.0f64..3.0, k in 0.5f64..2.0, d in -2.0f64..2.0) {
        let g = FnForcing::new(forcing(c, k, d));
        let a = find_cutoff(&g, 0.0, default_target(), Weight::Abs).unwrap();
        let sol = solve_exponential(&g, &SolveOptions::new(a).x_max(a + 200.0).tail_tol(1e-4)).unwrap();
        let bound = sol.g_l1.exp_m1();
        prop_assert!(sol.envelope_ratio() <= 1.0);
        prop_assert!(sol.running_l1_zg <= bound + 1e-8);
        prop_assert!((sol.z_infinity - 1.0).norm() <= bound + sol.tail_error);
        prop_assert!(bound < 1.0);
    }

    #[test]
    fn oscillatory_runs_are_conjugate(c in -3.0f64..3.0, k in 0.5f64..2.0, d in -2.0f64..2.0) {
        let g = FnForcing::new(forcing(c, k, d));
        let a = find_cutoff(&g, 0.0, default_target(), Weight::Abs).unwrap();
        let osc = solve_oscillatory(&g, &SolveOptions::new(a).x_max(a + 200.0).tail_tol(1e-4)).unwrap();
        let cf = osc.coeffs;
        prop_assert!((cf.xi1 - cf.eta2.conj()).norm() <= 1e-8);
        prop_assert!((cf.xi2 - cf.eta1.conj()).norm() <= 1e-8);
        prop_assert!(cf.well_separated());
        prop_assert!(osc.plus.envelope_ratio() <= 1.0 && osc.minus.envelope_ratio() <= 1.0);
    }
}

#[test]
fn second_order_convergence() {
    let g = FnForcing::new(|s: f64| (-s).exp());
    let z = |h: f64| solve_exponential(&g, &SolveOptions::new(0.0).x_max(20.0).step(h)).unwrap().z_infinity.re;
    let (z1, z2, z3) = (z(0.04), z(0.02), z(0.01));
    let ratio = (z1 - z2) / (z2 - z3);
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn algebraic_kernel_against_the_oracle() {
    // u'' = s^{-4} u, u = s z, z(1) = 1, z'(1) = 0.
    let g = FnForcing::new(|s: f64| s.powi(-4));
    let sol = solve_algebraic(&g, &SolveOptions::new(1.0).x_max(2000.0).step(1e-3)).unwrap();
    let reference = integrate_ivp(|s| s.powi(-4), 1.0, 1.0, 1.0, 1e3, 1e-12).unwrap();
    let z_oracle = reference.last().u / 1e3;
    let z = sol.z_at(1e3).re;
    assert!((z - z_oracle).abs() <= 1e-6 * z_oracle.abs(), "{z} vs {z_oracle}");
    // u' -> z_inf.
    assert!((sol.z_infinity.re - reference.last().du).abs() < 1e-5);
}

#[test]
fn algebraic_second_solution_has_unit_wronskian() {
    let g = FnForcing::new(|s: f64| s.powi(-4));
    let sol = solve_algebraic(&g, &SolveOptions::new(1.0).x_max(2000.0).step(1e-3)).unwrap();
    let u1 = AlgebraicBranch::normalized(&sol);
    for x in [2.0, 10.0] {
        let (u2, _) = second_solution(&u1, x, Regime::AlgebraicInfinity).unwrap();
        // u2' by a central difference, so the check does not reuse the identity.
        let d = 1e-4;
        let du2 = (second_solution(&u1, x + d, Regime::AlgebraicInfinity).unwrap().0
            - second_solution(&u1, x - d, Regime::AlgebraicInfinity).unwrap().0)
            / (2.0 * d);
        let w = u1.value(x).unwrap() * du2 - u1.derivative(x).unwrap() * u2;
        assert!((w + 1.0).abs() < 1e-6, "W = {w} at {x}");
    }
}

#[test]
fn half_order_second_solution_is_the_decaying_exponential() {
    // nu = 1/2: g = 0, u1 = e^{y - a}, u2 = e^{-(y - a)}.
    let g = FnForcing::new(|_| 0.0);
    let sol = solve_exponential(&g, &SolveOptions::new(1.0).x_max(40.0)).unwrap();
    let u1 = ExponentialBranch::normalized(&sol);
    let (u2, du2) = second_solution(&u1, 30.0, Regime::ConstantFExp).unwrap();
    let expected = (-(30.0f64 - 1.0)).exp();
    assert!((u2 / expected - 1.0).abs() < 1e-6);
    assert!((du2 / expected + 1.0).abs() < 1e-6);
}

#[test]
fn exponential_second_solution_matches_the_oracle() {
    // nu = 1 modified Bessel tail: g = 3/(4 y^2).
    let gf = |y: f64| 0.75 / (y * y);
    let g = FnForcing::new(gf);
    let a = find_cutoff(&g, 1.0, default_target(), Weight::Abs).unwrap();
    let sol = solve_exponential(&g, &SolveOptions::new(a)).unwrap();
    let u1 = ExponentialBranch::normalized(&sol);
    // The recessive branch is propagated backwards, where it is dominant.
    let x0 = a + 10.0;
    let (u2, du2) = second_solution(&u1, x0, Regime::ConstantFExp).unwrap();
    let traj = integrate_ivp(|y| 1.0 + gf(y), x0, u2, du2, a + 1.0, 1e-12).unwrap();
    let end = traj.samples[0];
    let (v, dv) = second_solution(&u1, end.x, Regime::ConstantFExp).unwrap();
    assert!((end.u / v - 1.0).abs() < 1e-6, "{} vs {v}", end.u);
    assert!((end.du / dv - 1.0).abs() < 1e-6);
    let w = u1.value(end.x).unwrap() * end.du - u1.derivative(end.x).unwrap() * end.u;
    assert!((w + 2.0).abs() < 1e-6, "W = {w}");
}
