use std::f64::consts;

use thiserror::Error;

use super::{BinaryOp, Expr, ParamBindings, UnaryOp};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("ln of non-positive argument {0}")]
    LnDomain(f64),
    #[error("sqrt of negative argument {0}")]
    SqrtDomain(f64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-integer power {exponent} of non-positive base {base}")]
    PowDomain { base: f64, exponent: f64 },
    #[error("result is not finite ({0})")]
    NonFinite(f64),
    #[error("parameter `{0}` has no value")]
    UnboundParam(String),
}

fn finite(v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite(v))
    }
}

pub(crate) fn pow(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        if base == 0.0 && exponent < 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        return finite(base.powi(exponent as i32));
    }
    if base <= 0.0 {
        return Err(EvalError::PowDomain { base, exponent });
    }
    finite(base.powf(exponent))
}

impl Expr {
    /// Evaluates at `u` with parameter values taken from `bindings`, which
    /// must cover exactly the tree's parameters.
    pub fn eval(&self, u: f64, bindings: &ParamBindings) -> Result<f64, EvalError> {
        if let Err(e) = bindings.check_covers(&self.params()) {
            return Err(match e {
                super::BindError::Missing(name) => EvalError::UnboundParam(name),
                super::BindError::Unused { name, .. } => EvalError::UnboundParam(name),
            });
        }
        self.eval_with(u, &|name| bindings.get(name))
    }

    /// Evaluates a tree that has no free parameters.
    pub fn eval_at(&self, u: f64) -> Result<f64, EvalError> {
        self.eval_with(u, &|_| None)
    }

    fn eval_with(&self, u: f64, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, EvalError> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var => Ok(u),
            Expr::Pi => Ok(consts::PI),
            Expr::E => Ok(consts::E),
            Expr::Param(name) => lookup(name).ok_or_else(|| EvalError::UnboundParam(name.clone())),
            Expr::Unary(op, a) => {
                let x = a.eval_with(u, lookup)?;
                match op {
                    UnaryOp::Neg => Ok(-x),
                    UnaryOp::Abs => Ok(x.abs()),
                    UnaryOp::Exp => finite(x.exp()),
                    UnaryOp::Ln if x > 0.0 => Ok(x.ln()),
                    UnaryOp::Ln => Err(EvalError::LnDomain(x)),
                    UnaryOp::Sqrt if x >= 0.0 => Ok(x.sqrt()),
                    UnaryOp::Sqrt => Err(EvalError::SqrtDomain(x)),
                }
            }
            Expr::Binary(op, a, b) => {
                let x = a.eval_with(u, lookup)?;
                let y = b.eval_with(u, lookup)?;
                match op {
                    BinaryOp::Add => finite(x + y),
                    BinaryOp::Sub => finite(x - y),
                    BinaryOp::Mul => finite(x * y),
                    BinaryOp::Div if y == 0.0 => Err(EvalError::DivisionByZero),
                    BinaryOp::Div => finite(x / y),
                    BinaryOp::Pow => pow(x, y),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn none() -> ParamBindings {
        ParamBindings::new()
    }

    #[test]
    fn ln_at_e() {
        let v = parse("ln(u)").unwrap().eval(consts::E, &none()).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parameterized_root() {
        let e = parse("sigma - 1/sqrt(u)").unwrap();
        let v = e.eval(4.0, &none().with("sigma", 1.0)).unwrap();
        assert_eq!(v, 0.5);
    }

    #[test]
    fn cubic_product() {
        let v = parse("(1-u^2)*(u-3)").unwrap().eval(2.0, &none()).unwrap();
        assert_eq!(v, 3.0);
    }

    #[test]
    fn domain_violations_are_typed() {
        assert_eq!(parse("ln(u)").unwrap().eval(0.0, &none()), Err(EvalError::LnDomain(0.0)));
        assert_eq!(parse("1/(u-1)").unwrap().eval(1.0, &none()), Err(EvalError::DivisionByZero));
        assert!(matches!(parse("sqrt(u)").unwrap().eval(-1.0, &none()), Err(EvalError::SqrtDomain(_))));
        assert!(matches!(parse("u^0.5").unwrap().eval(0.0, &none()), Err(EvalError::PowDomain { .. })));
        assert!(matches!(parse("u^(-2)").unwrap().eval(0.0, &none()), Err(EvalError::DivisionByZero)));
        assert!(matches!(parse("exp(u)").unwrap().eval(1000.0, &none()), Err(EvalError::NonFinite(_))));
    }

    #[test]
    fn integer_powers_accept_negative_bases() {
        let v = parse("u^3").unwrap().eval(-2.0, &none()).unwrap();
        assert_eq!(v, -8.0);
    }

    #[test]
    fn bindings_must_match() {
        let e = parse("a*u").unwrap();
        assert_eq!(e.eval(1.0, &none()), Err(EvalError::UnboundParam("a".into())));
        assert!(e.eval(1.0, &none().with("a", 1.0).with("zz", 2.0)).is_err());
    }
}
