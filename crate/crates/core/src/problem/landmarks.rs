use serde::Serialize;
use thiserror::Error;

use super::Nonlinearity;
use crate::calculus::find_root;

pub const SCAN_POINTS: usize = 2048;
pub const SCAN_EPS: f64 = 1e-12;
const ROOT_TOL: f64 = 1e-14;

/// Characteristic points of the nonlinearity. `beta2` is `+∞` when `f`
/// stayed positive on the scanned part of `(β₁, u_max)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Landmarks {
    pub beta1: f64,
    pub beta2: f64,
    /// Zero of F in (β₁, β₂); absent when F < 0 on the whole scan, i.e. (P2) fails.
    pub eta: Option<f64>,
    /// Critical point of g = f/u where g′ turns from positive to negative.
    pub sigma: Option<f64>,
    /// Zero of θ in (σ, β₂).
    pub rho: Option<f64>,
    /// Zero of θ′.
    pub gamma: Option<f64>,
    pub xi: f64,
    /// End of the scanned domain.
    pub scan_limit: f64,
    pub diagnostics: Vec<String>,
}

impl Landmarks {
    pub fn beta2_is_finite(&self) -> bool {
        self.beta2.is_finite()
    }

    /// Upper end of the numerically usable α range.
    pub fn upper(&self) -> f64 {
        self.beta2.min(self.scan_limit)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LandmarkError {
    #[error("f has no sign change on (0, {0}); (P1) cannot be verified")]
    NoSignChange(f64),
    #[error("f is positive near 0⁺, so the problem is not semipositone; (P1) fails")]
    NotSemipositone,
    #[error("f changes sign {0} times on the scan; (P1) allows at most two")]
    TooManySignChanges(usize),
}

/// Geometric points on `[ε, min(1, u_max)]` followed by linear points up to
/// `u_max`.
pub fn scan_grid(u_max: f64) -> Vec<f64> {
    let knee = u_max.min(1.0);
    let n_geo = if u_max > 1.0 { SCAN_POINTS / 2 } else { SCAN_POINTS };
    let ratio = (knee / SCAN_EPS).powf(1.0 / (n_geo - 1) as f64);
    let mut grid: Vec<f64> = (0..n_geo).map(|k| SCAN_EPS * ratio.powi(k as i32)).collect();
    *grid.last_mut().unwrap() = knee;
    if u_max > 1.0 {
        let n_lin = SCAN_POINTS - n_geo;
        let step = (u_max - 1.0) / n_lin as f64;
        grid.extend((1..=n_lin).map(|k| 1.0 + step * k as f64));
        *grid.last_mut().unwrap() = u_max;
    }
    grid
}

/// A sign change of a sampled function between two grid points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignChange {
    pub lo: f64,
    pub hi: f64,
    /// True when the function goes from negative to positive.
    pub rising: bool,
}

/// Sign changes of `f` along `grid`, skipping points where `f` is not finite
/// or exactly zero.
pub fn sign_changes(f: impl Fn(f64) -> f64, grid: &[f64]) -> Vec<SignChange> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &u in grid {
        let v = f(u);
        if !v.is_finite() || v == 0.0 {
            continue;
        }
        if let Some((pu, pv)) = prev {
            if pv.signum() != v.signum() {
                out.push(SignChange { lo: pu, hi: u, rising: v > 0.0 });
            }
        }
        prev = Some((u, v));
    }
    out
}

fn refine(f: impl Fn(f64) -> f64, c: SignChange) -> f64 {
    find_root(f, c.lo, c.hi, ROOT_TOL).map_or(0.5 * (c.lo + c.hi), |r| r.root)
}

pub fn locate_landmarks(nl: &Nonlinearity) -> Result<Landmarks, LandmarkError> {
    let u_max = nl.u_max();
    let grid = scan_grid(u_max);
    let mut diagnostics = Vec::new();

    let f_changes = sign_changes(|u| nl.f(u), &grid);
    let first = *f_changes.first().ok_or(LandmarkError::NoSignChange(u_max))?;
    if !first.rising {
        return Err(LandmarkError::NotSemipositone);
    }
    if f_changes.len() > 2 {
        return Err(LandmarkError::TooManySignChanges(f_changes.len()));
    }
    let beta1 = refine(|u| nl.f(u), first);
    let beta2 = match f_changes.get(1) {
        Some(c) => refine(|u| nl.f(u), *c),
        None => {
            diagnostics.push(format!("β₂ = ∞ up to u_max = {u_max}: f > 0 on (β₁, u_max]"));
            f64::INFINITY
        }
    };
    let upper = beta2.min(u_max);

    let eta = {
        let big_f = |u: f64| nl.big_f(u);
        let changes: Vec<_> = sign_changes(big_f, &grid)
            .into_iter()
            .filter(|c| c.rising && c.lo >= beta1 * (1.0 - 1e-12) && c.hi <= upper)
            .collect();
        match changes.first() {
            Some(c) => Some(refine(big_f, SignChange { lo: c.lo.max(beta1), ..*c })),
            None => {
                diagnostics.push(format!("F ≤ 0 on (β₁, {upper}]: no η, (P2) fails"));
                None
            }
        }
    };

    let below_upper: Vec<f64> = grid.iter().copied().filter(|u| *u < upper).collect();
    let sigma = sign_changes(|u| nl.dg(u), &below_upper)
        .into_iter()
        .find(|c| !c.rising)
        .map(|c| refine(|u| nl.dg(u), c));
    let gamma = sign_changes(|u| nl.dtheta(u), &grid).first().map(|c| refine(|u| nl.dtheta(u), *c));
    let rho = {
        let from = sigma.unwrap_or(0.0);
        let tail: Vec<f64> = below_upper.iter().copied().filter(|u| *u > from).collect();
        sign_changes(|u| nl.theta(u), &tail)
            .into_iter()
            .find(|c| c.rising)
            .map(|c| refine(|u| nl.theta(u), c))
    };

    // θ(β₂⁻) > 0 exactly when θ has crossed zero on (σ, β₂).
    let theta_end = nl.theta(upper * (1.0 - 1e-9));
    let xi = match rho {
        Some(r) if theta_end > 0.0 => r,
        _ => beta2,
    };

    Ok(Landmarks { beta1, beta2, eta, sigma, rho, gamma, xi, scan_limit: u_max, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, ParamBindings};

    fn build(f: &str, big_f: &str, u_max: f64) -> Nonlinearity {
        Nonlinearity::build(&parse(f).unwrap(), &ParamBindings::new(), Some(&parse(big_f).unwrap()), u_max)
            .unwrap()
    }

    #[test]
    fn grid_shape() {
        let g = scan_grid(50.0);
        assert_eq!(g.len(), SCAN_POINTS);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g[0], SCAN_EPS);
        assert_eq!(*g.last().unwrap(), 50.0);
        let g = scan_grid(0.5);
        assert_eq!(g.len(), SCAN_POINTS);
        assert_eq!(*g.last().unwrap(), 0.5);
    }

    #[test]
    fn log_landmarks() {
        let lm = locate_landmarks(&build("ln(u)", "u*ln(u) - u", 50.0)).unwrap();
        assert!((lm.beta1 - 1.0).abs() < 1e-12);
        assert_eq!(lm.beta2, f64::INFINITY);
        let e = std::f64::consts::E;
        assert!((lm.eta.unwrap() - e).abs() < 1e-10);
        assert!((lm.sigma.unwrap() - e).abs() < 1e-10);
        assert!((lm.rho.unwrap() - e * e).abs() < 1e-9);
    }

    #[test]
    fn concave_convex_landmarks() {
        let lm =
            locate_landmarks(&build("4 - sqrt(u) - 1/sqrt(u)", "-(2/3)*sqrt(u)*(u - 6*sqrt(u) + 3)", 50.0))
                .unwrap();
        let s3 = 3f64.sqrt();
        assert!((lm.beta1 - (7.0 - 4.0 * s3)).abs() < 1e-10);
        assert!((lm.beta2 - (7.0 + 4.0 * s3)).abs() < 1e-8);
        assert!((lm.eta.unwrap() - (3.0 - 6f64.sqrt()).powi(2)).abs() < 1e-10);
        assert!((lm.sigma.unwrap() - (29.0 - 8.0 * 13f64.sqrt())).abs() < 1e-10);
    }

    #[test]
    fn curve_missing_when_f_never_recovers() {
        let lm = locate_landmarks(&build("-(u - 1)*(u - 2)", "u*(-u^2/3 + 3/2*u - 2)", 50.0)).unwrap();
        assert_eq!(lm.eta, None);
        assert!((lm.beta2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn appendix_gamma() {
        let lm = locate_landmarks(&build("-u^2 + 21/10*u - 1", "-u^3/3 + 21/20*u^2 - u", 1.02)).unwrap();
        assert!((lm.gamma.unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(lm.eta, None);
    }

    #[test]
    fn positive_f_is_rejected() {
        let nl = build("u + 1", "u^2/2 + u", 50.0);
        assert!(matches!(locate_landmarks(&nl), Err(LandmarkError::NoSignChange(_))));
    }
}
