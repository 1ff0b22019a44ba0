//! Expression front end for user-supplied nonlinearities.
//!
//! Expressions are parsed into an immutable [`Expr`] tree over a single
//! variable `u`, the constants `pi` and `e`, and any number of named
//! parameters that are bound to values at evaluation time. Trees can be
//! printed back to text, evaluated with typed domain errors, and
//! differentiated symbolically with respect to `u`.

mod diff;
mod eval;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use diff::{differentiate, DiffError};
pub use eval::EvalError;
pub use parse::{parse, parse_with_params, ParseError, FUNCTIONS};

/// Unary operators and elementary functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }
}

/// Expression tree over the variable `u`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Param(String),
    Pi,
    E,
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BindError {
    #[error("parameter `{0}` has no value")]
    Missing(String),
    #[error("parameter `{name}` is not used by the expression (parameters: {})", known.join(", "))]
    Unused { name: String, known: Vec<String> },
}

/// Parameter values keyed by name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamBindings(BTreeMap<String, f64>);

impl ParamBindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.insert(name, value);
        self
    }

    pub fn insert(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_owned(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Keep only the entries named in `names`.
    pub fn restricted_to(&self, names: &BTreeSet<String>) -> ParamBindings {
        ParamBindings(
            self.0.iter().filter(|(k, _)| names.contains(*k)).map(|(k, v)| (k.clone(), *v)).collect(),
        )
    }

    /// Checks that the bindings cover exactly `names`.
    pub fn check_covers(&self, names: &BTreeSet<String>) -> Result<(), BindError> {
        if let Some(missing) = names.iter().find(|n| !self.0.contains_key(*n)) {
            return Err(BindError::Missing(missing.clone()));
        }
        if let Some(extra) = self.0.keys().find(|k| !names.contains(*k)) {
            return Err(BindError::Unused { name: extra.clone(), known: names.iter().cloned().collect() });
        }
        Ok(())
    }
}

impl FromIterator<(String, f64)> for ParamBindings {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        ParamBindings(iter.into_iter().collect())
    }
}

impl Expr {
    pub fn var() -> Expr {
        Expr::Var
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_owned())
    }

    pub fn unary(op: UnaryOp, arg: Expr) -> Expr {
        Expr::Unary(op, Box::new(arg))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Names of all parameters referenced by the tree.
    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Param(name) => {
                out.insert(name.clone());
            }
            Expr::Unary(_, a) => a.collect_params(out),
            Expr::Binary(_, a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
            Expr::Const(_) | Expr::Var | Expr::Pi | Expr::E => {}
        }
    }

    pub fn depends_on_u(&self) -> bool {
        match self {
            Expr::Var => true,
            Expr::Unary(_, a) => a.depends_on_u(),
            Expr::Binary(_, a, b) => a.depends_on_u() || b.depends_on_u(),
            Expr::Const(_) | Expr::Param(_) | Expr::Pi | Expr::E => false,
        }
    }

    pub fn contains_op(&self, op: UnaryOp) -> bool {
        match self {
            Expr::Unary(o, a) => *o == op || a.contains_op(op),
            Expr::Binary(_, a, b) => a.contains_op(op) || b.contains_op(op),
            _ => false,
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Unary(_, a) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
            _ => 1,
        }
    }

    /// Replaces every parameter by its bound value. The bindings must cover
    /// exactly the tree's parameter set.
    pub fn bind(&self, bindings: &ParamBindings) -> Result<Expr, BindError> {
        bindings.check_covers(&self.params())?;
        Ok(self.substitute(bindings))
    }

    fn substitute(&self, bindings: &ParamBindings) -> Expr {
        match self {
            Expr::Param(name) => match bindings.get(name) {
                Some(v) => Expr::Const(v),
                None => self.clone(),
            },
            Expr::Unary(op, a) => Expr::unary(*op, a.substitute(bindings)),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.substitute(bindings), b.substitute(bindings)),
            _ => self.clone(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            Expr::Unary(UnaryOp::Neg, _) => 3,
            Expr::Binary(BinaryOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Prints in a form that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.is_sign_negative() {
                    write!(f, "(-{:?})", -c)
                } else {
                    write!(f, "{c:?}")
                }
            }
            Expr::Var => f.write_str("u"),
            Expr::Param(name) => f.write_str(name),
            Expr::Pi => f.write_str("pi"),
            Expr::E => f.write_str("e"),
            Expr::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                write_operand(f, a, a.precedence() < 3)
            }
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(BinaryOp::Pow, a, b) => {
                write_operand(f, a, a.precedence() <= 4)?;
                f.write_str("^")?;
                write_operand(f, b, b.precedence() < 3)
            }
            Expr::Binary(op, a, b) => {
                let p = self.precedence();
                write_operand(f, a, a.precedence() < p)?;
                write!(f, " {} ", op.symbol())?;
                write_operand(f, b, b.precedence() <= p)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_are_collected() {
        let e = parse("sigma*u - u^(-p) + sigma").unwrap();
        let names: Vec<_> = e.params().into_iter().collect();
        assert_eq!(names, vec!["p".to_string(), "sigma".to_string()]);
    }

    #[test]
    fn bind_requires_exact_cover() {
        let e = parse("a*u + b").unwrap();
        let partial = ParamBindings::new().with("a", 1.0);
        assert_eq!(e.bind(&partial), Err(BindError::Missing("b".into())));
        let extra = ParamBindings::new().with("a", 1.0).with("b", 2.0).with("c", 3.0);
        assert!(matches!(e.bind(&extra), Err(BindError::Unused { .. })));
        let ok = ParamBindings::new().with("a", 1.0).with("b", 2.0);
        assert!(e.bind(&ok).unwrap().params().is_empty());
    }

    #[test]
    fn display_parenthesizes_only_when_needed() {
        let cases = [
            ("-u^2", "-u^2.0"),
            ("(-u)^2", "(-u)^2.0"),
            ("u^-p", "u^-p"),
            ("a - (b - c)", "a - (b - c)"),
            ("a - b - c", "a - b - c"),
            ("(u^2)^3", "(u^2.0)^3.0"),
            ("u^2^3", "u^2.0^3.0"),
            ("ln(u)/(1 + u)", "ln(u) / (1.0 + u)"),
        ];
        for (src, printed) in cases {
            assert_eq!(parse(src).unwrap().to_string(), printed, "{src}");
        }
    }

    #[test]
    fn negative_constants_print_parenthesized() {
        let e = Expr::binary(BinaryOp::Pow, Expr::Var, Expr::Const(-0.5));
        let back = parse(&e.to_string()).unwrap();
        assert_eq!(back.eval(4.0, &ParamBindings::new()).unwrap(), 0.5);
    }
}
