//! Symbolic differentiation with respect to `u`.
//!
//! The builders below fold numeric constants and drop additive/multiplicative
//! identities; nothing else is simplified. Folded negative constants are
//! stored as `Neg(Const)` so printed derivatives reparse to the same tree.

use thiserror::Error;

use super::eval;
use super::{BinaryOp, Expr, UnaryOp};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffError {
    #[error("abs is not differentiable; the nonlinearity must be C2")]
    NonSmooth,
    #[error("derivative order must be 1 or 2, got {0}")]
    Order(u32),
}

/// Exact symbolic derivative of order 1 or 2.
pub fn differentiate(expr: &Expr, order: u32) -> Result<Expr, DiffError> {
    match order {
        1 => d(expr),
        2 => d(&d(expr)?),
        n => Err(DiffError::Order(n)),
    }
}

fn constant(v: f64) -> Expr {
    if v < 0.0 {
        Expr::unary(UnaryOp::Neg, Expr::Const(-v))
    } else {
        Expr::Const(v.abs())
    }
}

fn as_const(e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(c) => Some(*c),
        Expr::Unary(UnaryOp::Neg, a) => match **a {
            Expr::Const(c) => Some(-c),
            _ => None,
        },
        _ => None,
    }
}

fn folded(v: f64) -> Option<Expr> {
    v.is_finite().then(|| constant(v))
}

fn neg(a: Expr) -> Expr {
    match (as_const(&a), a) {
        (Some(c), _) => constant(-c),
        (None, Expr::Unary(UnaryOp::Neg, inner)) => *inner,
        (None, a) => Expr::unary(UnaryOp::Neg, a),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => folded(x + y).unwrap_or_else(|| Expr::binary(BinaryOp::Add, a, b)),
        (Some(0.0), _) => b,
        (_, Some(0.0)) => a,
        _ => Expr::binary(BinaryOp::Add, a, b),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => folded(x - y).unwrap_or_else(|| Expr::binary(BinaryOp::Sub, a, b)),
        (Some(0.0), _) => neg(b),
        (_, Some(0.0)) => a,
        _ => Expr::binary(BinaryOp::Sub, a, b),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => folded(x * y).unwrap_or_else(|| Expr::binary(BinaryOp::Mul, a, b)),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::Const(0.0),
        (Some(1.0), _) => b,
        (_, Some(1.0)) => a,
        (Some(-1.0), _) => neg(b),
        (_, Some(-1.0)) => neg(a),
        _ => Expr::binary(BinaryOp::Mul, a, b),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) if y != 0.0 => folded(x / y).unwrap_or_else(|| Expr::binary(BinaryOp::Div, a, b)),
        (Some(0.0), _) => Expr::Const(0.0),
        (_, Some(1.0)) => a,
        _ => Expr::binary(BinaryOp::Div, a, b),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => match eval::pow(x, y) {
            Ok(v) => constant(v),
            Err(_) => Expr::binary(BinaryOp::Pow, a, b),
        },
        (_, Some(0.0)) => Expr::Const(1.0),
        (_, Some(1.0)) => a,
        _ => Expr::binary(BinaryOp::Pow, a, b),
    }
}

fn d(e: &Expr) -> Result<Expr, DiffError> {
    Ok(match e {
        Expr::Const(_) | Expr::Param(_) | Expr::Pi | Expr::E => Expr::Const(0.0),
        Expr::Var => Expr::Const(1.0),
        Expr::Unary(op, a) => {
            let da = d(a)?;
            let a = (**a).clone();
            match op {
                UnaryOp::Neg => neg(da),
                UnaryOp::Exp => mul(Expr::unary(UnaryOp::Exp, a), da),
                UnaryOp::Ln => div(da, a),
                UnaryOp::Sqrt => div(da, mul(Expr::Const(2.0), Expr::unary(UnaryOp::Sqrt, a))),
                UnaryOp::Abs => return Err(DiffError::NonSmooth),
            }
        }
        Expr::Binary(op, a, b) => {
            let da = d(a)?;
            let db = d(b)?;
            let (a, b) = ((**a).clone(), (**b).clone());
            match op {
                BinaryOp::Add => add(da, db),
                BinaryOp::Sub => sub(da, db),
                BinaryOp::Mul => add(mul(da, b.clone()), mul(a, db)),
                BinaryOp::Div => div(sub(mul(da, b.clone()), mul(a, db)), pow(b, Expr::Const(2.0))),
                BinaryOp::Pow if !b.depends_on_u() => {
                    let lowered = sub(b.clone(), Expr::Const(1.0));
                    mul(mul(b, pow(a, lowered)), da)
                }
                BinaryOp::Pow if !a.depends_on_u() => {
                    mul(mul(Expr::binary(BinaryOp::Pow, a.clone(), b), Expr::unary(UnaryOp::Ln, a)), db)
                }
                BinaryOp::Pow => {
                    let whole = Expr::binary(BinaryOp::Pow, a.clone(), b.clone());
                    let log_part = mul(db, Expr::unary(UnaryOp::Ln, a.clone()));
                    let power_part = div(mul(b, da), a);
                    mul(whole, add(log_part, power_part))
                }
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, ParamBindings};

    fn at(e: &Expr, u: f64, b: &ParamBindings) -> f64 {
        e.eval(u, &b.restricted_to(&e.params())).unwrap()
    }

    #[test]
    fn derivative_of_ln() {
        let e = parse("ln(u)").unwrap();
        let d1 = differentiate(&e, 1).unwrap();
        assert_eq!(d1, parse("1/u").unwrap());
        let d2 = differentiate(&e, 2).unwrap();
        for u in [0.3, 1.0, 7.5] {
            let b = ParamBindings::new();
            assert!((at(&d2, u, &b) + 1.0 / (u * u)).abs() < 1e-14);
        }
    }

    #[test]
    fn second_derivative_inverse_sqrt() {
        let e = parse("sigma - 1/sqrt(u)").unwrap();
        let d2 = differentiate(&e, 2).unwrap();
        let b = ParamBindings::new().with("sigma", 1.3);
        for u in [0.2f64, 1.0, 4.0, 30.0] {
            let want = -0.75 * u.powf(-2.5);
            assert!((at(&d2, u, &b) - want).abs() <= 1e-13 * want.abs());
        }
    }

    #[test]
    fn power_rules() {
        let b = ParamBindings::new().with("p", 0.4);
        // parameter exponent
        let d = differentiate(&parse("u^(-p)").unwrap(), 1).unwrap();
        assert!((at(&d, 2.0, &b) + 0.4 * 2f64.powf(-1.4)).abs() < 1e-15);
        // variable exponent
        let d = differentiate(&parse("u^u").unwrap(), 1).unwrap();
        let u = 1.7f64;
        assert!((at(&d, u, &ParamBindings::new()) - u.powf(u) * (u.ln() + 1.0)).abs() < 1e-13);
        // constant base
        let d = differentiate(&parse("2^u").unwrap(), 1).unwrap();
        assert!((at(&d, u, &ParamBindings::new()) - 2f64.powf(u) * 2f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn folding_keeps_trees_small() {
        let d = differentiate(&parse("3*u + 2").unwrap(), 1).unwrap();
        assert_eq!(d, Expr::Const(3.0));
        let d = differentiate(&parse("u^3").unwrap(), 2).unwrap();
        assert_eq!(d.to_string(), "3.0 * (2.0 * u)");
    }

    #[test]
    fn abs_is_rejected() {
        assert_eq!(differentiate(&parse("abs(u - 1)").unwrap(), 1), Err(DiffError::NonSmooth));
        assert_eq!(differentiate(&parse("u").unwrap(), 3), Err(DiffError::Order(3)));
    }

    #[test]
    fn structural_determinism() {
        let e = parse("a + b*u - c*exp(-u)").unwrap();
        assert_eq!(differentiate(&e, 2).unwrap(), differentiate(&e, 2).unwrap());
    }
}
