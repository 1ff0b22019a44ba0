use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use super::{time_map, TimeMapError, DEFAULT_TOL};
use crate::calculus::{
    estimate_limit_at_infinity, estimate_limit_at_zero, integrate_with_distances, LimitKind, ProbeSpec,
    Singular,
};
use crate::problem::{Landmarks, Nonlinearity};

/// Exponents tried for lim u^p g(u) at 0⁺.
const LA_EXPONENTS: [f64; 3] = [0.9, 0.5, 0.1];
pub const DEFAULT_TAU: f64 = 3.0;
/// Fraction of η below which F is integrated from 0 rather than evaluated.
const SMALL_U: f64 = 0.02;
const KAPPA_LEVELS: std::ops::RangeInclusive<i32> = 4..=14;

/// A limit the user may assert instead of letting it be probed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitKey {
    /// lim g(u), u → 0⁺.
    G0,
    /// lim u^p g(u), u → 0⁺, for some p ∈ (0, 1).
    UpG0,
    /// lim g(u), u → ∞.
    GInf,
    /// f(0⁺).
    F0,
    /// lim u^(1/3) f(u), u → 0⁺.
    U13F0,
    /// lim f(u)/(β₂ − u), u → β₂⁻.
    Fb2,
    /// lim f(u)/((β₂ − u)[−ln(β₂ − u)]^τ), u → β₂⁻.
    Fb2Log,
    /// λ̂ itself.
    LambdaHat,
}

impl LimitKey {
    pub const ALL: [LimitKey; 8] = [
        LimitKey::G0,
        LimitKey::UpG0,
        LimitKey::GInf,
        LimitKey::F0,
        LimitKey::U13F0,
        LimitKey::Fb2,
        LimitKey::Fb2Log,
        LimitKey::LambdaHat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LimitKey::G0 => "g0",
            LimitKey::UpG0 => "upg0",
            LimitKey::GInf => "ginf",
            LimitKey::F0 => "f0",
            LimitKey::U13F0 => "u13f0",
            LimitKey::Fb2 => "fb2",
            LimitKey::Fb2Log => "fb2log",
            LimitKey::LambdaHat => "lambda-hat",
        }
    }
}

impl fmt::Display for LimitKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OverrideError {
    #[error("unknown limit key '{0}' (expected one of g0, upg0, ginf, f0, u13f0, fb2, fb2log, lambda-hat)")]
    Key(String),
    #[error("unknown limit class '{0}' (expected zero, pos-divergent, neg-divergent or finite:<v>)")]
    Class(String),
    #[error("expected KEY=CLASS, got '{0}'")]
    Syntax(String),
}

impl FromStr for LimitKey {
    type Err = OverrideError;

    fn from_str(s: &str) -> Result<LimitKey, OverrideError> {
        LimitKey::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| OverrideError::Key(s.to_string()))
    }
}

pub fn parse_limit_class(s: &str) -> Result<LimitKind, OverrideError> {
    match s {
        "zero" => Ok(LimitKind::Zero),
        "pos-divergent" => Ok(LimitKind::PosInfinity),
        "neg-divergent" => Ok(LimitKind::NegInfinity),
        _ => s
            .strip_prefix("finite:")
            .and_then(|v| v.parse::<f64>().ok())
            .filter(|v| v.is_finite())
            .map(LimitKind::from_value)
            .ok_or_else(|| OverrideError::Class(s.to_string())),
    }
}

/// User-asserted limit classes keyed by [`LimitKey`].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LimitOverrides(BTreeMap<LimitKey, LimitKind>);

impl LimitOverrides {
    pub fn new() -> LimitOverrides {
        LimitOverrides::default()
    }

    pub fn insert(&mut self, key: LimitKey, kind: LimitKind) {
        self.0.insert(key, kind);
    }

    /// Parses and records `KEY=CLASS`.
    pub fn assert_str(&mut self, s: &str) -> Result<(), OverrideError> {
        let (k, c) = s.split_once('=').ok_or_else(|| OverrideError::Syntax(s.to_string()))?;
        self.insert(k.trim().parse()?, parse_limit_class(c.trim())?);
        Ok(())
    }

    pub fn get(&self, key: LimitKey) -> Option<LimitKind> {
        self.0.get(&key).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (LimitKey, LimitKind)> + '_ {
        self.0.iter().map(|(k, v)| (*k, *v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndpointOptions {
    pub tol: f64,
    pub tau: f64,
    pub overrides: LimitOverrides,
}

impl Default for EndpointOptions {
    fn default() -> EndpointOptions {
        EndpointOptions { tol: DEFAULT_TOL, tau: DEFAULT_TAU, overrides: LimitOverrides::new() }
    }
}

impl EndpointOptions {
    /// The overridden class for `key`, else the probed one.
    fn limit(&self, key: LimitKey, probe: impl FnOnce() -> LimitKind) -> LimitKind {
        self.overrides.get(key).unwrap_or_else(probe)
    }
}

/// λ̂ or κ with the branch that decided it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndpointValue {
    /// `None` when the branch could not be decided.
    pub value: Option<f64>,
    pub abs_error: f64,
    pub provenance: String,
}

impl EndpointValue {
    fn exact(value: f64, provenance: impl Into<String>) -> EndpointValue {
        EndpointValue { value: Some(value), abs_error: 0.0, provenance: provenance.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GValue {
    /// Quadrature estimate, `-inf` when the integral diverges, `None` when
    /// it could not be evaluated.
    pub value: Option<f64>,
    pub abs_error: f64,
    pub converged: bool,
    /// The Theorem T0 condition that proves G < 0, if any.
    pub certified_negative: Option<String>,
    pub shells: Vec<f64>,
}

impl GValue {
    /// `Some(true)` for G < 0, `Some(false)` for G ≥ 0 within the error bar.
    pub fn is_negative(&self) -> Option<bool> {
        if self.certified_negative.is_some() {
            return Some(true);
        }
        match self.value {
            Some(v) if self.converged => Some(v < -self.abs_error),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveEndpoints {
    pub lambda_hat: EndpointValue,
    pub kappa: EndpointValue,
    #[serde(rename = "G")]
    pub g: GValue,
    pub warnings: Vec<String>,
}

fn fmt_kind(k: LimitKind) -> String {
    match k {
        LimitKind::Finite(v) => format!("{v:.6}"),
        LimitKind::PosInfinity => "+∞".into(),
        LimitKind::NegInfinity => "−∞".into(),
        LimitKind::Zero => "0".into(),
        LimitKind::Inconclusive => "inconclusive".into(),
    }
}

fn at_zero(f: impl Fn(f64) -> f64) -> LimitKind {
    estimate_limit_at_zero(f, ProbeSpec::AT_ZERO).map_or(LimitKind::Inconclusive, |e| e.kind)
}

/// −F(u) on (0, η). Below η/2 F(η) = 0 is used exactly, since its rounding
/// residual would swamp −F(u) for tiny u.
fn neg_f(nl: &Nonlinearity, eta: f64, u: f64, d: f64) -> f64 {
    if u < SMALL_U * eta {
        -nl.big_f_small(u)
    } else if u < 0.5 * eta {
        -nl.big_f(u)
    } else {
        nl.f_between(u, eta, d)
    }
}

/// θ(η) − θ(u) on (0, η), with θ(η) = −ηf(η).
fn theta_drop(nl: &Nonlinearity, eta: f64, u: f64, d: f64) -> f64 {
    if u < 0.5 * eta {
        -eta * nl.f(eta) - nl.theta(u)
    } else {
        nl.theta_between(u, eta, d)
    }
}

fn above_neg_infinity(k: LimitKind) -> bool {
    matches!(k, LimitKind::Zero | LimitKind::Finite(_) | LimitKind::PosInfinity)
}

pub fn lambda_hat(
    nl: &Nonlinearity,
    lm: &Landmarks,
    opts: &EndpointOptions,
) -> Result<EndpointValue, TimeMapError> {
    let eta = lm.eta.ok_or(TimeMapError::NoEta)?;
    match opts.overrides.get(LimitKey::LambdaHat) {
        Some(LimitKind::PosInfinity) => {
            return Ok(EndpointValue::exact(f64::INFINITY, "asserted: λ̂ = ∞"));
        }
        Some(LimitKind::Finite(v)) if v > 0.0 => {
            return Ok(EndpointValue::exact(v, format!("asserted: λ̂ = {v}")));
        }
        _ => {}
    }

    let g0 = opts.limit(LimitKey::G0, || at_zero(|u| nl.g(u)));
    if matches!(g0, LimitKind::Zero) || matches!(g0, LimitKind::Finite(v) if v <= 0.0) {
        let how = if opts.overrides.get(LimitKey::G0).is_some() { "(asserted)" } else { "∈ (−∞, 0]" };
        return Ok(EndpointValue::exact(f64::INFINITY, format!("La: lim g(0⁺) = {} {how}", fmt_kind(g0))));
    }
    let negative =
        |k: LimitKind| matches!(k, LimitKind::NegInfinity) || matches!(k, LimitKind::Finite(v) if v < 0.0);
    let hit = match opts.overrides.get(LimitKey::UpG0) {
        Some(k) => negative(k).then(|| format!("La: lim u^p g(0⁺) = {} (asserted)", fmt_kind(k))),
        None => LA_EXPONENTS.iter().find_map(|&p| {
            let k = at_zero(|u| u.powf(p - 1.0) * nl.f(u));
            negative(k).then(|| format!("La: lim u^{p} g(0⁺) = {} ∈ [−∞, 0)", fmt_kind(k)))
        }),
    };
    let Some(provenance) = hit else {
        return Err(TimeMapError::Unresolved(format!(
            "cannot classify λ̂ branch: lim g(0⁺) is {} and no u^p g probe is negative; \
             assert g0 or upg0",
            fmt_kind(g0)
        )));
    };

    let r = integrate_with_distances(
        |u, _, db| 1.0 / neg_f(nl, eta, u, db).sqrt(),
        0.0,
        eta,
        opts.tol,
        Singular::Both,
    );
    if r.diverged_to.is_some() {
        return Ok(EndpointValue::exact(f64::INFINITY, format!("{provenance}; integral diverges")));
    }
    if !r.converged {
        return Err(TimeMapError::Quadrature {
            what: "λ̂".into(),
            value: 0.5 * r.value * r.value,
            err: r.value * r.abs_error_estimate,
        });
    }
    Ok(EndpointValue {
        value: Some(0.5 * r.value * r.value),
        abs_error: r.value.abs() * r.abs_error_estimate,
        provenance,
    })
}

pub fn big_g(nl: &Nonlinearity, lm: &Landmarks, opts: &EndpointOptions) -> Result<GValue, TimeMapError> {
    let eta = lm.eta.ok_or(TimeMapError::NoEta)?;
    let u13 = opts.limit(LimitKey::U13F0, || at_zero(|u| u.cbrt() * nl.f(u)));
    let f0 = opts.limit(LimitKey::F0, || at_zero(|u| nl.f(u)));
    let certified = if above_neg_infinity(f0) {
        Some(format!("T0(c): f(0⁺) = {} > −∞", fmt_kind(f0)))
    } else if above_neg_infinity(u13) {
        Some(format!("T0(b): lim u^(1/3) f(u) = {} > −∞", fmt_kind(u13)))
    } else if nl.dtheta(eta) <= 0.0 {
        Some("T0(a): f(η) − ηf′(η) ≤ 0".to_string())
    } else {
        None
    };

    let r = integrate_with_distances(
        |u, _, db| theta_drop(nl, eta, u, db) / neg_f(nl, eta, u, db).powf(1.5),
        0.0,
        eta,
        opts.tol,
        Singular::Both,
    );
    if let Some(sign) = r.diverged_to {
        return Ok(GValue {
            value: Some(sign.infinity()),
            abs_error: 0.0,
            converged: true,
            certified_negative: certified,
            shells: r.shells,
        });
    }
    if !r.converged && certified.is_none() {
        return Err(TimeMapError::GUnresolved {
            value: r.value,
            err: r.abs_error_estimate,
            shells: r.shells,
        });
    }
    Ok(GValue {
        value: Some(r.value),
        abs_error: r.abs_error_estimate,
        converged: r.converged,
        certified_negative: certified,
        shells: r.shells,
    })
}

/// λ = T² at α approaching β₂, extrapolated by Aitken's Δ². The error bar is
/// the last increment of the raw sequence.
fn extrapolate_kappa(nl: &Nonlinearity, lm: &Landmarks, tol: f64) -> Result<(f64, f64), TimeMapError> {
    let eta = lm.eta.ok_or(TimeMapError::NoEta)?;
    let alphas: Vec<f64> = KAPPA_LEVELS
        .map(|k| if lm.beta2_is_finite() { lm.beta2 - lm.beta2 * 2f64.powi(-k) } else { 2f64.powi(k) })
        .filter(|a| *a > eta)
        .collect();
    let lambdas = alphas
        .iter()
        .map(|&a| time_map(nl, lm, a, tol).map(|p| p.lambda))
        .collect::<Result<Vec<f64>, _>>()?;
    let n = lambdas.len();
    if n < 3 {
        return Err(TimeMapError::Unresolved("too few points between η and β₂ to extrapolate κ".into()));
    }
    let (x0, x1, x2) = (lambdas[n - 3], lambdas[n - 2], lambdas[n - 1]);
    let denom = x2 - 2.0 * x1 + x0;
    let value = if denom != 0.0 { x2 - (x2 - x1).powi(2) / denom } else { x2 };
    let value = if value.is_finite() && value > 0.0 { value } else { x2 };
    Ok((value, (x2 - x1).abs()))
}

pub fn kappa(
    nl: &Nonlinearity,
    lm: &Landmarks,
    opts: &EndpointOptions,
) -> Result<(EndpointValue, Vec<String>), TimeMapError> {
    let mut warnings = Vec::new();
    let finite_branch = if lm.beta2_is_finite() {
        let b2 = lm.beta2;
        let start = (0.01 * (b2 - lm.beta1)).min(0.5);
        let probes = ProbeSpec { start, ratio: 0.5, count: 20 };
        let probe = |h: &dyn Fn(f64) -> f64| {
            estimate_limit_at_zero(h, probes).map_or(LimitKind::Inconclusive, |e| e.kind)
        };
        let fb2 = opts.limit(LimitKey::Fb2, || probe(&|d| nl.f(b2 - d) / d));
        if matches!(fb2, LimitKind::Zero) || matches!(fb2, LimitKind::Finite(v) if v >= 0.0) {
            return Ok((
                EndpointValue::exact(
                    f64::INFINITY,
                    format!("Lb: lim f(u)/(β₂−u) = {} ∈ [0, ∞)", fmt_kind(fb2)),
                ),
                warnings,
            ));
        }
        let tau = opts.tau;
        let fb2log = opts.limit(LimitKey::Fb2Log, || probe(&|d| nl.f(b2 - d) / (d * (-d.ln()).powf(tau))));
        if matches!(fb2log, LimitKind::PosInfinity) || matches!(fb2log, LimitKind::Finite(v) if v > 0.0) {
            warnings.push(
                "κ finite by the log-weighted limit in (0, ∞] (Theorem T1); Lemma L4(ii) states \
                 this branch with the limit equal to 0 instead"
                    .into(),
            );
            format!("Lb: lim f(u)/((β₂−u)[−ln(β₂−u)]^{tau}) = {} ∈ (0, ∞]", fmt_kind(fb2log))
        } else {
            return Err(TimeMapError::Unresolved(format!(
                "κ branch unresolved: lim f(u)/(β₂−u) = {}, log-weighted limit = {}; \
                 assert fb2 or fb2log",
                fmt_kind(fb2),
                fmt_kind(fb2log)
            )));
        }
    } else {
        let ginf = opts.limit(LimitKey::GInf, || {
            estimate_limit_at_infinity(|u| nl.g(u), ProbeSpec::AT_INFINITY)
                .map_or(LimitKind::Inconclusive, |e| e.kind)
        });
        match ginf {
            LimitKind::Zero => {
                return Ok((EndpointValue::exact(f64::INFINITY, "Lc: lim g(∞) = 0"), warnings));
            }
            LimitKind::PosInfinity => {
                return Ok((EndpointValue::exact(0.0, "Lc: lim g(∞) = ∞"), warnings));
            }
            LimitKind::Finite(v) if v > 0.0 => format!("Lc: lim g(∞) = {v:.6} ∈ (0, ∞)"),
            k => {
                return Err(TimeMapError::Unresolved(format!(
                    "κ branch unresolved: lim g(∞) = {}; assert ginf",
                    fmt_kind(k)
                )));
            }
        }
    };
    let (value, abs_error) = extrapolate_kappa(nl, lm, opts.tol)?;
    Ok((EndpointValue { value: Some(value), abs_error, provenance: finite_branch }, warnings))
}

/// λ̂, κ and G together; failures become unresolved values plus warnings.
pub fn curve_endpoints(
    nl: &Nonlinearity,
    lm: &Landmarks,
    opts: &EndpointOptions,
) -> Result<CurveEndpoints, TimeMapError> {
    lm.eta.ok_or(TimeMapError::NoEta)?;
    let mut warnings = Vec::new();
    let unresolved =
        |e: &TimeMapError| EndpointValue { value: None, abs_error: f64::INFINITY, provenance: e.to_string() };
    let lambda_hat = lambda_hat(nl, lm, opts).unwrap_or_else(|e| {
        warnings.push(e.to_string());
        unresolved(&e)
    });
    let kappa = match kappa(nl, lm, opts) {
        Ok((v, w)) => {
            warnings.extend(w);
            v
        }
        Err(e) => {
            warnings.push(e.to_string());
            unresolved(&e)
        }
    };
    let g = big_g(nl, lm, opts).unwrap_or_else(|e| {
        warnings.push(e.to_string());
        let (value, abs_error, shells) = match e {
            TimeMapError::GUnresolved { value, err, shells } => (Some(value), err, shells),
            _ => (None, f64::INFINITY, Vec::new()),
        };
        GValue { value, abs_error, converged: false, certified_negative: None, shells }
    });
    Ok(CurveEndpoints { lambda_hat, kappa, g, warnings })
}

#[cfg(test)]
mod tests {
    use super::super::tests::setup;
    use super::*;
    use crate::expr::ParamBindings;
    use std::f64::consts::PI;

    fn opts() -> EndpointOptions {
        EndpointOptions::default()
    }

    fn value(v: &EndpointValue) -> f64 {
        v.value.unwrap()
    }

    #[test]
    fn log_endpoints() {
        let (nl, lm) = setup("ln(u)", "u*ln(u) - u", ParamBindings::new());
        let lh = lambda_hat(&nl, &lm, &opts()).unwrap();
        assert!((value(&lh) - 8.539_734_222_673_568).abs() < 1e-8, "{lh:?}");
        let (k, _) = kappa(&nl, &lm, &opts()).unwrap();
        assert_eq!(value(&k), f64::INFINITY);
        let g = big_g(&nl, &lm, &opts()).unwrap();
        assert!(g.certified_negative.as_deref().unwrap().starts_with("T0(b)"));
        assert_eq!(g.is_negative(), Some(true));
    }

    #[test]
    fn inverse_sqrt_endpoints() {
        for sigma in [1.0, 2.0] {
            let b = ParamBindings::new().with("sigma", sigma);
            let (nl, lm) = setup("sigma - 1/sqrt(u)", "sigma*u - 2*sqrt(u)", b);
            let lh = value(&lambda_hat(&nl, &lm, &opts()).unwrap());
            let exact = 2.0 * PI * PI / sigma.powi(3);
            assert!((lh - exact).abs() < 1e-8 * exact, "{lh} vs {exact}");
            let g = big_g(&nl, &lm, &opts()).unwrap();
            assert!(g.value.unwrap().abs() < 1e-6, "{g:?}");
            assert_eq!(g.is_negative(), Some(false));
        }
    }

    #[test]
    fn concave_convex_g() {
        let (nl, lm) =
            setup("4 - sqrt(u) - 1/sqrt(u)", "-(2/3)*sqrt(u)*(u - 6*sqrt(u) + 3)", ParamBindings::new());
        let g = big_g(&nl, &lm, &opts()).unwrap();
        assert!((g.value.unwrap() - 0.150988056044054).abs() < 1e-8, "{g:?}");
        let lh = value(&lambda_hat(&nl, &lm, &opts()).unwrap());
        assert!((lh - 0.445647821300013).abs() < 1e-8, "{lh}");
        // f(β₂⁻)/(β₂−u) → −f′(β₂) > 0 finite, so κ = ∞.
        assert_eq!(value(&kappa(&nl, &lm, &opts()).unwrap().0), f64::INFINITY);
    }

    #[test]
    fn cubic_endpoints() {
        let (nl, lm) = setup("(1-u^2)*(u-3)", "u*(u-2)*(-u^2+2*u+6)/4", ParamBindings::new());
        let lh = value(&lambda_hat(&nl, &lm, &opts()).unwrap());
        assert!((lh - 3.043_565_475_527_991_7).abs() < 1e-8, "{lh}");
        let g = big_g(&nl, &lm, &opts()).unwrap();
        assert!(g.certified_negative.as_deref().unwrap().starts_with("T0(c)"));
        assert_eq!(g.value, Some(f64::NEG_INFINITY));
    }

    #[test]
    fn power_kappa_is_extrapolated() {
        let b = ParamBindings::new().with("sigma", 1.0).with("p", 0.5);
        let (nl, lm) = setup("sigma*u - u^(-p)", "sigma/2*u^2 - u^(1-p)/(1-p)", b);
        let (k, _) = kappa(&nl, &lm, &opts()).unwrap();
        assert!(k.provenance.starts_with("Lc"));
        // Linear growth at infinity: T → π/(2√σ).
        assert!((value(&k) - PI * PI / 4.0).abs() < 1e-5, "{k:?}");
    }

    #[test]
    fn exponential_kappa_is_zero() {
        let b = ParamBindings::new().with("c", 2.0);
        let (nl, lm) = setup("exp(u) - c", "exp(u) - 1 - c*u", b);
        assert_eq!(value(&kappa(&nl, &lm, &opts()).unwrap().0), 0.0);
        assert!(value(&lambda_hat(&nl, &lm, &opts()).unwrap()).is_finite());
    }

    #[test]
    fn overrides_parse_and_apply() {
        let mut o = LimitOverrides::new();
        o.assert_str("g0=finite:-1.5").unwrap();
        o.assert_str("lambda-hat=pos-divergent").unwrap();
        assert_eq!(o.get(LimitKey::G0), Some(LimitKind::Finite(-1.5)));
        assert!(o.assert_str("h=zero").is_err());
        assert!(o.assert_str("g0=big").is_err());
        assert!(o.assert_str("g0").is_err());
        let (nl, lm) = setup("ln(u)", "u*ln(u) - u", ParamBindings::new());
        let opts = EndpointOptions { overrides: o, ..opts() };
        assert_eq!(value(&lambda_hat(&nl, &lm, &opts).unwrap()), f64::INFINITY);
    }
}
