//! The time map T(α), its derivative and the curve endpoints λ̂, G, κ.

mod endpoints;

pub use endpoints::{
    big_g, curve_endpoints, kappa, lambda_hat, parse_limit_class, CurveEndpoints, EndpointOptions,
    EndpointValue, GValue, LimitKey, LimitOverrides, OverrideError, DEFAULT_TAU,
};

use serde::Serialize;
use thiserror::Error;

use crate::calculus::{integrate_with_distances, QuadratureResult, Singular};
use crate::problem::{Landmarks, Nonlinearity};

pub const DEFAULT_TOL: f64 = 1e-10;
/// Interior points at which F(α) − F(u) > 0 is checked before integrating.
const DOMAIN_CHECKS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeMapPoint {
    pub alpha: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "T_prime")]
    pub t_prime: Option<f64>,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimeMapError {
    #[error("T undefined at α = {alpha}: F(α) = {big_f} ≤ 0")]
    NonPositiveEnergy { alpha: f64, big_f: f64 },
    #[error("α = {alpha} lies outside (η, β₂) = ({eta}, {beta2}); T(α) may not be well-defined")]
    OutsideCurve { alpha: f64, eta: f64, beta2: f64 },
    #[error("T undefined at α = {alpha}: F(α) − F(u) ≤ 0 at u = {u}")]
    NotMaximal { alpha: f64, u: f64 },
    #[error("no η: F < 0 on the scanned domain, so the curve does not exist")]
    NoEta,
    #[error("{what}: quadrature did not converge (estimate {value}, error {err:e})")]
    Quadrature { what: String, value: f64, err: f64 },
    #[error("{what}: integral diverges")]
    Divergent { what: String },
    #[error("G: quadrature inconclusive (estimate {value}, error {err:e}, shell sums {shells:?})")]
    GUnresolved { value: f64, err: f64, shells: Vec<f64> },
    #[error("{0}")]
    Unresolved(String),
}

fn check_domain(nl: &Nonlinearity, lm: &Landmarks, alpha: f64) -> Result<(), TimeMapError> {
    let big_f = nl.big_f(alpha);
    if !(alpha > 0.0 && alpha.is_finite()) || !(big_f > 0.0) {
        return Err(TimeMapError::NonPositiveEnergy { alpha, big_f });
    }
    let eta = lm.eta.ok_or(TimeMapError::NoEta)?;
    if alpha <= eta || alpha >= lm.beta2 {
        return Err(TimeMapError::OutsideCurve { alpha, eta, beta2: lm.beta2 });
    }
    for k in 1..DOMAIN_CHECKS {
        let u = alpha * k as f64 / DOMAIN_CHECKS as f64;
        if !(nl.f_between(u, alpha, alpha - u) > 0.0) {
            return Err(TimeMapError::NotMaximal { alpha, u });
        }
    }
    Ok(())
}

fn settle(r: QuadratureResult, what: impl Fn() -> String) -> Result<f64, TimeMapError> {
    if r.diverged_to.is_some() {
        return Err(TimeMapError::Divergent { what: what() });
    }
    if !r.converged {
        return Err(TimeMapError::Quadrature { what: what(), value: r.value, err: r.abs_error_estimate });
    }
    Ok(r.value)
}

/// T(α) without the domain check.
fn raw_t(nl: &Nonlinearity, alpha: f64, tol: f64) -> Result<f64, TimeMapError> {
    let r = integrate_with_distances(
        |u, _, db| 1.0 / nl.f_between(u, alpha, db).sqrt(),
        0.0,
        alpha,
        tol,
        Singular::Both,
    );
    Ok(settle(r, || format!("T({alpha})"))? / std::f64::consts::SQRT_2)
}

/// T′(α) through θ(α) − θ(u) = 2B − A, which keeps the integrand of order
/// (α − u)^(-1/2) at the upper end.
fn raw_t_prime(nl: &Nonlinearity, alpha: f64, tol: f64) -> Result<f64, TimeMapError> {
    let r = integrate_with_distances(
        |u, _, db| nl.theta_between(u, alpha, db) / nl.f_between(u, alpha, db).powf(1.5),
        0.0,
        alpha,
        tol,
        Singular::Both,
    );
    let scale = 2.0 * std::f64::consts::SQRT_2 * alpha;
    Ok(settle(r, || format!("T′({alpha})"))? / scale)
}

/// T(α) and λ = T². `t_prime` is left empty; see [`time_map_point`].
pub fn time_map(
    nl: &Nonlinearity,
    lm: &Landmarks,
    alpha: f64,
    tol: f64,
) -> Result<TimeMapPoint, TimeMapError> {
    check_domain(nl, lm, alpha)?;
    let t = raw_t(nl, alpha, tol)?;
    Ok(TimeMapPoint { alpha, t, t_prime: None, lambda: t * t })
}

pub fn time_map_derivative(
    nl: &Nonlinearity,
    lm: &Landmarks,
    alpha: f64,
    tol: f64,
) -> Result<f64, TimeMapError> {
    check_domain(nl, lm, alpha)?;
    raw_t_prime(nl, alpha, tol)
}

/// T, λ and, when its quadrature converges, T′.
pub fn time_map_point(
    nl: &Nonlinearity,
    lm: &Landmarks,
    alpha: f64,
    tol: f64,
) -> Result<TimeMapPoint, TimeMapError> {
    let mut p = time_map(nl, lm, alpha, tol)?;
    p.t_prime = raw_t_prime(nl, alpha, tol).ok();
    Ok(p)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::expr::{parse, ParamBindings};
    use crate::problem::locate_landmarks;

    pub(super) fn setup(f: &str, big_f: &str, b: ParamBindings) -> (Nonlinearity, Landmarks) {
        let nl = Nonlinearity::build(&parse(f).unwrap(), &b, Some(&parse(big_f).unwrap()), 50.0).unwrap();
        let lm = locate_landmarks(&nl).unwrap();
        (nl, lm)
    }

    #[test]
    fn log_time_map_matches_oracle() {
        let (nl, lm) = setup("ln(u)", "u*ln(u) - u", ParamBindings::new());
        let p = time_map(&nl, &lm, 5.0, DEFAULT_TOL).unwrap();
        assert!((p.t - 2.729_783_505_099_556_7).abs() < 1e-9, "{}", p.t);
        assert_eq!(p.lambda, p.t * p.t);
    }

    #[test]
    fn domain_errors() {
        let (nl, lm) = setup("ln(u)", "u*ln(u) - u", ParamBindings::new());
        assert!(matches!(time_map(&nl, &lm, 2.0, DEFAULT_TOL), Err(TimeMapError::NonPositiveEnergy { .. })));
        let (nl, lm) = setup("(1-u^2)*(u-3)", "u*(u-2)*(-u^2+2*u+6)/4", ParamBindings::new());
        let e = time_map(&nl, &lm, 3.5, DEFAULT_TOL).unwrap_err();
        assert!(e.to_string().contains("may not be well-defined"), "{e}");
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let (nl, lm) = setup("ln(u)", "u*ln(u) - u", ParamBindings::new());
        for alpha in [3.0, 5.0, 12.0, 30.0] {
            let h = 1e-4;
            let fd = (time_map(&nl, &lm, alpha + h, 1e-12).unwrap().t
                - time_map(&nl, &lm, alpha - h, 1e-12).unwrap().t)
                / (2.0 * h);
            let d = time_map_derivative(&nl, &lm, alpha, 1e-12).unwrap();
            assert!((d - fd).abs() < 1e-6, "α = {alpha}: {d} vs {fd}");
        }
    }

    #[test]
    fn h1_fixture_decreases() {
        let b = ParamBindings::new().with("sigma", 1.0).with("p", 0.5);
        let (nl, lm) = setup("sigma*u - u^(-p)", "sigma/2*u^2 - u^(1-p)/(1-p)", b);
        for alpha in [2.6, 4.0, 10.0, 40.0] {
            assert!(time_map_derivative(&nl, &lm, alpha, DEFAULT_TOL).unwrap() < 0.0);
        }
    }
}
