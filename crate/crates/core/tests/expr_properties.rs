use lgasym_core::expr::{parse, BinaryOp, Expr, UnaryOp};
use proptest::prelude::*;

// Trees built so that every node is smooth and finite on [0.5, 2.5].
fn smooth_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::Var),
        (-3.0f64..3.0).prop_map(|c| Expr::Const((c * 100.0).round() / 100.0)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinaryOp::Add, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinaryOp::Sub, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinaryOp::Mul, a, b)),
            // a / (1 + b^2)
            (inner.clone(), inner.clone()).prop_map(|(a, b)| {
                Expr::div(a, Expr::add(Expr::Const(1.0), Expr::pow(b, 2.0)))
            }),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Sin, a)),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Cos, a)),
            inner.clone().prop_map(|a| Expr::neg(a)),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Exp, Expr::unary(UnaryOp::Sin, a))),
            inner.clone().prop_map(|a| {
                Expr::unary(UnaryOp::Log, Expr::add(Expr::Const(1.0), Expr::pow(a, 2.0)))
            }),
            inner.clone().prop_map(|a| {
                Expr::unary(UnaryOp::Sqrt, Expr::add(Expr::Const(2.0), Expr::unary(UnaryOp::Cos, a)))
            }),
            (inner, 0usize..3).prop_map(|(a, k)| Expr::pow(a, [2.0, 3.0, -1.0][k]))
                .prop_map(|e| match e {
                    // keep negative powers away from zero
                    Expr::Pow(b, p) if p < 0.0 => Expr::pow(Expr::add(Expr::Const(2.0), Expr::unary(UnaryOp::Sin, *b)), p),
                    e => e,
                }),
        ]
    })
}

fn points() -> Vec<f64> {
    (0..20).map(|k| 0.5 + 2.0 * k as f64 / 19.0).collect()
}

// Richardson-extrapolated central difference.
fn numeric_derivative(e: &Expr, x: f64) -> f64 {
    let d = |h: f64| (e.eval_or_nan(x + h) - e.eval_or_nan(x - h)) / (2.0 * h);
    let h = 1e-3;
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 50, ..ProptestConfig::default() })]

    #[test]
    fn derivative_matches_finite_differences(e in smooth_expr()) {
        let de = e.derivative();
        for x in points() {
            let exact = de.eval(x).expect("derivative of a smooth tree evaluates");
            let numeric = numeric_derivative(&e, x);
            prop_assert!(
                (exact - numeric).abs() <= 1e-5 * (1.0 + exact.abs()),
                "{e} at {x}: {exact} vs {numeric}"
            );
        }
    }

    #[test]
    fn printing_round_trips(e in smooth_expr()) {
        let once = parse(&e.to_string()).unwrap();
        let twice = parse(&once.to_string()).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(once.to_string(), twice.to_string());
        for x in points() {
            let (a, b) = (e.eval_or_nan(x), once.eval_or_nan(x));
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{e}: {a} vs {b}");
        }
    }

    #[test]
    fn differentiation_is_total(e in smooth_expr(), n in 1usize..4) {
        // Never panics and always yields a printable, re-parsable tree.
        let d = e.nth_derivative(n);
        prop_assert!(parse(&d.to_string()).is_ok());
    }
}

#[test]
fn abs_and_sign_differentiate() {
    let e = parse("abs(x - 1)").unwrap();
    let d = e.derivative();
    assert_eq!(d.eval(2.0).unwrap(), 1.0);
    assert_eq!(d.eval(0.5).unwrap(), -1.0);
    assert_eq!(parse("sign(x)").unwrap().derivative().eval(0.3).unwrap(), 0.0);
}

