use proptest::prelude::*;
use semibif_core::expr::{differentiate, parse, BinaryOp, Expr, UnaryOp};

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        3 => Just(Expr::Var),
        2 => (0.25f64..4.0).prop_map(Expr::Const),
        1 => Just(Expr::Pi),
        1 => Just(Expr::E),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Neg, a)),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Exp, a)),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Ln, a)),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Sqrt, a)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinaryOp::Add, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinaryOp::Sub, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinaryOp::Mul, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinaryOp::Div, a, b)),
            (inner.clone(), -3i32..4).prop_map(|(a, k)| {
                let c = Expr::Const(k.abs() as f64 * 0.5);
                let c = if k < 0 { Expr::unary(UnaryOp::Neg, c) } else { c };
                Expr::binary(BinaryOp::Pow, a, c)
            }),
        ]
    })
}

/// Value and neighbours used by the centered difference, if all are tame.
fn sample(e: &Expr, u: f64, h: f64) -> Option<(f64, f64, f64)> {
    let v = e.eval_at(u).ok()?;
    let lo = e.eval_at(u - h).ok()?;
    let hi = e.eval_at(u + h).ok()?;
    (v.abs() < 1e3 && lo.abs() < 1e3 && hi.abs() < 1e3).then_some((v, lo, hi))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, max_global_rejects: 100_000, ..ProptestConfig::default() })]

    #[test]
    fn first_derivative_matches_finite_difference(e in arb_expr(), u in 0.1f64..10.0) {
        let h = 1e-6;
        let Some((_, lo, hi)) = sample(&e, u, h) else { return Err(TestCaseError::reject("domain")) };
        let d = differentiate(&e, 1).unwrap();
        let Ok(exact) = d.eval_at(u) else { return Err(TestCaseError::reject("derivative domain")) };
        // Keep away from kinks of sqrt/ln at the domain boundary.
        prop_assume!(exact.abs() < 1e3);
        let second = differentiate(&e, 2).unwrap().eval_at(u).unwrap_or(f64::INFINITY);
        prop_assume!(second.abs() < 1e4);
        let fd = (hi - lo) / (2.0 * h);
        prop_assert!((exact - fd).abs() <= 1e-5 * (1.0 + exact.abs()), "{e}: {exact} vs {fd}");
    }

    #[test]
    fn print_parse_round_trip(e in arb_expr(), us in proptest::collection::vec(0.1f64..10.0, 50)) {
        let back = parse(&e.to_string()).unwrap();
        prop_assert_eq!(&back, &e);
        for u in us {
            match (e.eval_at(u), back.eval_at(u)) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
                (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
            }
        }
    }

    #[test]
    fn differentiation_is_deterministic(e in arb_expr()) {
        prop_assert_eq!(differentiate(&e, 1).unwrap(), differentiate(&e, 1).unwrap());
        prop_assert_eq!(differentiate(&e, 2).unwrap(), differentiate(&e, 2).unwrap());
    }

    #[test]
    fn derivatives_round_trip_through_text(e in arb_expr()) {
        let d = differentiate(&e, 2).unwrap();
        prop_assert_eq!(parse(&d.to_string()).unwrap(), d);
    }
}
