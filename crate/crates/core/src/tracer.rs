//! Sampling of the bifurcation curve S = {(T(α)², α)}.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::calculus::{find_root, RootError};
use crate::classify::{empirical_shape, Shape, ShapeClass};
use crate::problem::{Landmarks, Nonlinearity};
use crate::timemap::{time_map, time_map_derivative, time_map_point, TimeMapError, TimeMapPoint};

pub const MIN_POINTS: usize = 8;
/// Closest approach to β₂, as a fraction of β₂ − η.
const END_GAP: f64 = 1.0 / 16384.0;
/// Closest approach to η, as a fraction of the traced width.
const START_GAP: f64 = 1.0 / 16777216.0;
/// Width of each endpoint cluster, as a fraction of the traced width.
const CLUSTER: f64 = 1.0 / 16.0;
/// With β₂ = ∞ the trace stops at min(u_max, this · η).
const INFINITE_REACH: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    GeometricNearEndpoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinPoint {
    pub alpha: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveTrace {
    pub points: Vec<TimeMapPoint>,
    pub alpha_grid_spec: String,
    pub min_point: Option<MinPoint>,
    pub empirical: ShapeClass,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("need at least {MIN_POINTS} points, got {0}")]
    TooFewPoints(usize),
    #[error("T undefined for α ≤ γ={}: F(α) ≤ 0 there, so the curve does not exist", fmt_sig(*.0))]
    UndefinedUpToGamma(f64),
    #[error("no η: F < 0 on the scanned domain, so the curve does not exist")]
    NoCurve,
    #[error("at α = {alpha}: {source}")]
    TimeMap { alpha: f64, source: TimeMapError },
    #[error("T′ does not change sign on [{lo}, {hi}]")]
    NoMinimum { lo: f64, hi: f64 },
}

/// Shortest representation after rounding to 9 significant digits.
fn fmt_sig(v: f64) -> String {
    let rounded: f64 = format!("{v:.8e}").parse().unwrap_or(v);
    format!("{rounded}")
}

/// The α grid over (η, β₂).
pub fn alpha_grid(
    nl: &Nonlinearity,
    lm: &Landmarks,
    n: usize,
    spacing: Spacing,
) -> Result<(Vec<f64>, String), TraceError> {
    if n < MIN_POINTS {
        return Err(TraceError::TooFewPoints(n));
    }
    let Some(eta) = lm.eta else {
        return Err(match lm.gamma {
            Some(g) => TraceError::UndefinedUpToGamma(g),
            None => TraceError::NoCurve,
        });
    };
    let (hi, finite) = if lm.beta2_is_finite() {
        (lm.beta2 - (lm.beta2 - eta) * END_GAP, true)
    } else {
        (nl.u_max().min(INFINITE_REACH * eta), false)
    };
    let w = hi - eta;
    let geometric =
        |from: f64, to: f64, k: usize, m: usize| from * (to / from).powf(k as f64 / (m - 1) as f64);
    let mut grid = Vec::with_capacity(n);
    let spec;
    match spacing {
        Spacing::Linear => {
            let lo = eta + w * START_GAP;
            grid.extend((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64));
            spec = format!("linear, {n} points on [η + {START_GAP:e}·w, {hi}]");
        }
        Spacing::GeometricNearEndpoints => {
            let n_lo = n / 4;
            let n_hi = if finite { n / 4 } else { n - n_lo };
            let n_mid = n - n_lo - n_hi;
            let c = w * CLUSTER;
            grid.extend((0..n_lo).map(|k| eta + geometric(w * START_GAP, c, k, n_lo)));
            if finite {
                let span = w - 2.0 * c;
                grid.extend((1..=n_mid).map(|k| eta + c + span * k as f64 / (n_mid + 1) as f64));
                let gap = lm.beta2 - hi;
                grid.extend((0..n_hi).map(|k| lm.beta2 - geometric(c + gap, gap, k, n_hi)));
                spec = format!(
                    "{n_lo} points geometric near η, {n_mid} uniform, {n_hi} geometric near β₂, \
                     last at β₂ − (β₂−η)·2⁻¹⁴"
                );
            } else {
                let from = eta + c;
                grid.extend((1..=n_hi).map(|k| geometric(from, hi, k, n_hi + 1)));
                spec =
                    format!("{n_lo} points geometric near η, {n_hi} geometric up to min(u_max, 10³η) = {hi}");
            }
        }
    }
    debug_assert!(grid.windows(2).all(|p| p[0] < p[1]), "{grid:?}");
    Ok((grid, spec))
}

pub fn trace(
    nl: &Nonlinearity,
    lm: &Landmarks,
    n: usize,
    spacing: Spacing,
    tol: f64,
) -> Result<CurveTrace, TraceError> {
    let (grid, alpha_grid_spec) = alpha_grid(nl, lm, n, spacing)?;
    let points = grid
        .par_iter()
        .map(|&alpha| {
            time_map_point(nl, lm, alpha, tol).map_err(|source| TraceError::TimeMap { alpha, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let empirical = empirical_shape(&points);
    let min_point = if empirical.shape == Shape::SubsetShaped {
        let i = (1..points.len() - 1).min_by(|a, b| points[*a].t.total_cmp(&points[*b].t)).unwrap_or(1);
        Some(locate_minimum(nl, lm, (points[i - 1].alpha, points[i + 1].alpha), tol)?)
    } else {
        None
    };
    Ok(CurveTrace { points, alpha_grid_spec, min_point, empirical })
}

/// The zero of T′ in `bracket`, i.e. the turning point of a ⊂-shaped curve.
pub fn locate_minimum(
    nl: &Nonlinearity,
    lm: &Landmarks,
    bracket: (f64, f64),
    tol: f64,
) -> Result<MinPoint, TraceError> {
    let (lo, hi) = bracket;
    let width = lm.beta2.min(nl.u_max()) - lm.eta.unwrap_or(0.0);
    let root_tol = 1e-8 * width / (1.0 + hi.abs());
    let dt = |a: f64| time_map_derivative(nl, lm, a, tol).unwrap_or(f64::NAN);
    let r = match find_root(dt, lo, hi, root_tol) {
        Ok(r) => r,
        Err(RootError::MaxIterations { bracket }) => crate::calculus::BracketedRoot {
            root: 0.5 * (bracket.0 + bracket.1),
            bracket,
            residual: f64::NAN,
        },
        Err(_) => return Err(TraceError::NoMinimum { lo, hi }),
    };
    let p = time_map(nl, lm, r.root, tol).map_err(|source| TraceError::TimeMap { alpha: r.root, source })?;
    Ok(MinPoint { alpha: r.root, lambda: p.lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, ParamBindings};
    use crate::problem::locate_landmarks;
    use crate::timemap::DEFAULT_TOL;

    fn setup(f: &str, big_f: &str, b: ParamBindings, u_max: f64) -> (Nonlinearity, Landmarks) {
        let nl = Nonlinearity::build(&parse(f).unwrap(), &b, Some(&parse(big_f).unwrap()), u_max).unwrap();
        let lm = locate_landmarks(&nl).unwrap();
        (nl, lm)
    }

    #[test]
    fn log_trace_has_one_minimum() {
        let (nl, lm) = setup("ln(u)", "u*ln(u) - u", ParamBindings::new(), 50.0);
        let tr = trace(&nl, &lm, 64, Spacing::GeometricNearEndpoints, DEFAULT_TOL).unwrap();
        assert_eq!(tr.points.len(), 64);
        assert_eq!(tr.empirical.shape, Shape::SubsetShaped);
        let m = tr.min_point.unwrap();
        let d = time_map_derivative(&nl, &lm, m.alpha, 1e-12).unwrap();
        assert!(d.abs() < 1e-7, "{d}");
        assert!((tr.points[0].lambda / 8.539_734_222_673_568 - 1.0).abs() < 0.01);
    }

    #[test]
    fn power_trace_decreases() {
        let b = ParamBindings::new().with("sigma", 1.0).with("p", 0.5);
        let (nl, lm) = setup("sigma*u - u^(-p)", "sigma/2*u^2 - u^(1-p)/(1-p)", b, 50.0);
        let tr = trace(&nl, &lm, 64, Spacing::GeometricNearEndpoints, DEFAULT_TOL).unwrap();
        assert_eq!(tr.empirical.shape, Shape::MonotoneDecreasing);
        assert!(tr.points.windows(2).all(|w| w[1].lambda < w[0].lambda));
        assert!(tr.min_point.is_none());
        let e = locate_minimum(&nl, &lm, (3.0, 10.0), DEFAULT_TOL).unwrap_err();
        assert!(matches!(e, TraceError::NoMinimum { .. }));
    }

    #[test]
    fn preconditions() {
        let (nl, lm) = setup("ln(u)", "u*ln(u) - u", ParamBindings::new(), 50.0);
        assert_eq!(
            trace(&nl, &lm, 4, Spacing::Linear, DEFAULT_TOL).unwrap_err(),
            TraceError::TooFewPoints(4)
        );
        let (nl, lm) = setup("-u^2 + 21/10*u - 1", "-u^3/3 + 21/20*u^2 - u", ParamBindings::new(), 1.02);
        let e = trace(&nl, &lm, 64, Spacing::GeometricNearEndpoints, DEFAULT_TOL).unwrap_err();
        assert_eq!(e.to_string().split(':').next().unwrap(), "T undefined for α ≤ γ=1");
    }

    #[test]
    fn finite_beta2_grid_ends_near_beta2() {
        let (nl, lm) = setup("(1-u^2)*(u-3)", "u*(u-2)*(-u^2+2*u+6)/4", ParamBindings::new(), 50.0);
        let (g, _) = alpha_grid(&nl, &lm, 64, Spacing::GeometricNearEndpoints).unwrap();
        assert_eq!(g.len(), 64);
        let last = *g.last().unwrap();
        assert!((last - (3.0 - 1.0 / 16384.0)).abs() < 1e-9, "{last}");
        let (g, _) = alpha_grid(&nl, &lm, 33, Spacing::Linear).unwrap();
        assert_eq!(g.len(), 33);
    }
}
