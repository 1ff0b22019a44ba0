use serde::Serialize;
use thiserror::Error;

use crate::calculus::{estimate_limit_at_zero, gauss_legendre, integrate, LimitKind, ProbeSpec, Singular};
use crate::expr::{differentiate, BindError, DiffError, Expr, ParamBindings};

/// Relative width below which `F(b) - F(a)` is integrated directly instead of
/// differenced.
const GAP_SWITCH: f64 = 0.02;
const NUMERIC_F_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FMode {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("nonlinearity: {0}")]
    Bind(#[from] BindError),
    #[error("antiderivative: {0}")]
    AntiderivativeBind(BindError),
    #[error("{0}")]
    Diff(#[from] DiffError),
    #[error("u_max must be positive and finite, got {0}")]
    BadUmax(f64),
    #[error("F(u) = ∫₀ᵘ f diverges at 0⁺ (f is not integrable at the origin), so (P2) fails")]
    FDivergent,
    #[error("supplied antiderivative does not match f: F'({u}) ≈ {fd} but f({u}) = {f}")]
    AntiderivativeMismatch { u: f64, fd: f64, f: f64 },
    #[error("supplied antiderivative does not vanish at 0⁺ (F(0⁺) ≈ {0})")]
    AntiderivativeNotNormalized(f64),
}

/// A nonlinearity with parameters bound, its exact derivatives and an
/// antiderivative normalized by `F(0⁺) = 0`.
///
/// Evaluation methods return NaN outside the natural domain.
#[derive(Debug, Clone)]
pub struct Nonlinearity {
    f: Expr,
    df: Expr,
    d2f: Expr,
    antiderivative: Option<Expr>,
    u_max: f64,
}

impl Nonlinearity {
    pub fn build(
        ast: &Expr,
        bindings: &ParamBindings,
        closed_form_f: Option<&Expr>,
        u_max: f64,
    ) -> Result<Nonlinearity, BuildError> {
        if !(u_max > 0.0 && u_max.is_finite()) {
            return Err(BuildError::BadUmax(u_max));
        }
        let f = ast.bind(bindings)?;
        let df = differentiate(&f, 1)?;
        let d2f = differentiate(&df, 1)?;
        let antiderivative = match closed_form_f {
            Some(big_f) => {
                let own = bindings.restricted_to(&big_f.params());
                Some(big_f.bind(&own).map_err(BuildError::AntiderivativeBind)?)
            }
            None => None,
        };
        let nl = Nonlinearity { f, df, d2f, antiderivative, u_max };
        match nl.antiderivative {
            Some(_) => nl.check_antiderivative()?,
            None => {
                let r = integrate(|u| nl.f(u), 0.0, u_max.min(1.0), NUMERIC_F_TOL, Singular::AtA);
                if r.diverged_to.is_some() {
                    return Err(BuildError::FDivergent);
                }
            }
        }
        Ok(nl)
    }

    fn check_antiderivative(&self) -> Result<(), BuildError> {
        for frac in [0.013, 0.11, 0.37, 0.61, 0.89] {
            let u = frac * self.u_max;
            let h = 1e-6 * u;
            let fd = (self.big_f(u + h) - self.big_f(u - h)) / (2.0 * h);
            let f = self.f(u);
            if fd.is_finite() && f.is_finite() && (fd - f).abs() > 1e-5 * (1.0 + f.abs()) {
                return Err(BuildError::AntiderivativeMismatch { u, fd, f });
            }
        }
        if let Ok(est) = estimate_limit_at_zero(|u| self.big_f(u), ProbeSpec::AT_ZERO) {
            let at_zero = match est.kind {
                LimitKind::Finite(v) if v.abs() > 1e-6 => v,
                LimitKind::PosInfinity => f64::INFINITY,
                LimitKind::NegInfinity => f64::NEG_INFINITY,
                _ => return Ok(()),
            };
            return Err(BuildError::AntiderivativeNotNormalized(at_zero));
        }
        Ok(())
    }

    pub fn expr(&self) -> &Expr {
        &self.f
    }

    pub fn antiderivative_expr(&self) -> Option<&Expr> {
        self.antiderivative.as_ref()
    }

    pub fn f_mode(&self) -> FMode {
        if self.antiderivative.is_some() {
            FMode::ClosedForm
        } else {
            FMode::Numeric
        }
    }

    /// Upper end of the numeric scan domain `(0, u_max)`.
    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn f(&self, u: f64) -> f64 {
        self.f.eval_at(u).unwrap_or(f64::NAN)
    }

    pub fn df(&self, u: f64) -> f64 {
        self.df.eval_at(u).unwrap_or(f64::NAN)
    }

    pub fn d2f(&self, u: f64) -> f64 {
        self.d2f.eval_at(u).unwrap_or(f64::NAN)
    }

    pub fn big_f(&self, u: f64) -> f64 {
        match &self.antiderivative {
            Some(e) => e.eval_at(u).unwrap_or(f64::NAN),
            None if u <= 0.0 => f64::NAN,
            None => {
                let r = integrate(|t| self.f(t), 0.0, u, NUMERIC_F_TOL, Singular::AtA);
                if r.diverged_to.is_some() {
                    f64::NAN
                } else {
                    r.value
                }
            }
        }
    }

    /// F(u) integrated directly to near full relative precision, for small
    /// `u` where a closed form such as `exp(u) - 1 - c*u` cancels.
    pub fn big_f_small(&self, u: f64) -> f64 {
        let scale = (u * self.f(u).abs()).max(f64::MIN_POSITIVE);
        integrate(|t| self.f(t), 0.0, u, 1e-15 * scale, Singular::AtA).value
    }

    pub fn g(&self, u: f64) -> f64 {
        self.f(u) / u
    }

    /// g′(u) = (u f′ − f)/u² = −θ′(u)/u².
    pub fn dg(&self, u: f64) -> f64 {
        (u * self.df(u) - self.f(u)) / (u * u)
    }

    /// θ(u) = 2F(u) − u f(u).
    pub fn theta(&self, u: f64) -> f64 {
        2.0 * self.big_f(u) - u * self.f(u)
    }

    /// θ′(u) = f(u) − u f′(u).
    pub fn dtheta(&self, u: f64) -> f64 {
        self.f(u) - u * self.df(u)
    }

    /// θ″(u) = −u f″(u).
    pub fn d2theta(&self, u: f64) -> f64 {
        -u * self.d2f(u)
    }

    /// q(u) = −u θ′(u)/θ(u).
    pub fn q(&self, u: f64) -> f64 {
        -u * self.dtheta(u) / self.theta(u)
    }

    /// [u f′(u)/f(u)]′, whose sign decides geometric concavity.
    pub fn log_elasticity_slope(&self, u: f64) -> f64 {
        let (f, df, d2f) = (self.f(u), self.df(u), self.d2f(u));
        (df + u * d2f) / f - u * df * df / (f * f)
    }

    /// F(b) − F(b − d) for `0 < d ≤ b`, accurate when `d ≪ b`.
    pub fn f_gap(&self, b: f64, d: f64) -> f64 {
        self.f_between(b - d, b, d)
    }

    /// F(b) − F(a) where `d = b − a` is supplied exactly.
    pub fn f_between(&self, a: f64, b: f64, d: f64) -> f64 {
        if d <= GAP_SWITCH * b {
            return gauss_legendre(|s| self.f(b - s), 0.0, d);
        }
        match self.antiderivative {
            Some(_) => self.big_f(b) - self.big_f(a),
            None => integrate(|t| self.f(t), a, b, NUMERIC_F_TOL, Singular::AtA).value,
        }
    }

    /// θ(b) − θ(b − d), accurate when `d ≪ b`.
    pub fn theta_gap(&self, b: f64, d: f64) -> f64 {
        self.theta_between(b - d, b, d)
    }

    /// θ(b) − θ(a) where `d = b − a` is supplied exactly.
    pub fn theta_between(&self, a: f64, b: f64, d: f64) -> f64 {
        if d <= GAP_SWITCH * b {
            return gauss_legendre(|s| self.dtheta(b - s), 0.0, d);
        }
        2.0 * self.f_between(a, b, d) - (b * self.f(b) - a * self.f(a))
    }
}
