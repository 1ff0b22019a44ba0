//! Independent check of (λ, α) pairs: integrate u″ = −λ f(u) from the
//! maximum u(0) = α, u′(0) = 0 and look at u(1).

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::problem::Nonlinearity;
use crate::timemap::TimeMapPoint;

/// Integration stops once u falls below this; f may be singular at 0⁺.
pub const U_FLOOR: f64 = 1e-9;
pub const DEFAULT_RTOL: f64 = 1e-10;
pub const RESIDUAL_TOL: f64 = 1e-5;
pub const DRIFT_TOL: f64 = 1e-7;
const MIN_STEP: f64 = 1e-14;
const MAX_STEPS: usize = 200_000;

// Dormand–Prince 5(4) tableau. The equation is autonomous, so the nodes c_i
// are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotResult {
    pub alpha: f64,
    pub lambda: f64,
    /// u(1); extrapolated linearly from the stopping point when u reached
    /// the floor (or 0) before x = 1.
    pub u_at_1: f64,
    pub min_u: f64,
    /// max |u′²/2 + λF(u) − λF(α)| over the accepted steps.
    pub energy_drift: f64,
    /// λF(α), the conserved energy.
    pub energy: f64,
    /// u′ < 0 at every accepted step.
    pub decreasing: bool,
    pub x_stop: f64,
}

impl ShotResult {
    pub fn relative_drift(&self) -> f64 {
        self.energy_drift / (1.0 + self.energy.abs())
    }

    pub fn passed(&self) -> bool {
        self.u_at_1.abs() <= RESIDUAL_TOL && self.relative_drift() <= DRIFT_TOL
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShootError {
    #[error("shooting needs α > 0 and λ > 0, got α = {alpha}, λ = {lambda}")]
    BadInput { alpha: f64, lambda: f64 },
    #[error("step size underflow at x = {x}, u = {u} (α = {alpha}, λ = {lambda})")]
    StepUnderflow { alpha: f64, lambda: f64, x: f64, u: f64 },
    #[error("no points to verify")]
    Empty,
}

type State = [f64; 2];

fn rhs(nl: &Nonlinearity, lambda: f64, y: State) -> Option<State> {
    if !(y[0] > 0.0) {
        return None;
    }
    let f = nl.f(y[0]);
    f.is_finite().then_some([y[1], -lambda * f])
}

/// One Dormand–Prince step; `None` when a stage leaves the domain.
fn dp_step(nl: &Nonlinearity, lambda: f64, y: State, h: f64) -> Option<(State, State)> {
    let mut k = [[0.0; 2]; 7];
    for s in 0..7 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(s) {
            ys[0] += h * A[s][j] * kj[0];
            ys[1] += h * A[s][j] * kj[1];
        }
        k[s] = rhs(nl, lambda, ys)?;
    }
    let mut y5 = y;
    let mut err = [0.0; 2];
    for s in 0..7 {
        for i in 0..2 {
            y5[i] += h * B5[s] * k[s][i];
            err[i] += h * (B5[s] - B4[s]) * k[s][i];
        }
    }
    Some((y5, err))
}

/// Integrates the half-interval initial value problem on [0, 1] with
/// relative tolerance `rtol`.
pub fn shoot(nl: &Nonlinearity, alpha: f64, lambda: f64, rtol: f64) -> Result<ShotResult, ShootError> {
    if !(alpha > 0.0 && lambda > 0.0 && alpha.is_finite() && lambda.is_finite()) {
        return Err(ShootError::BadInput { alpha, lambda });
    }
    let energy = lambda * nl.big_f(alpha);
    let slope_scale = (2.0 * energy.abs()).sqrt().max(1.0);
    let atol = [rtol * 1e-3 * alpha, rtol * 1e-3 * slope_scale];

    let mut y: State = [alpha, 0.0];
    let mut x: f64 = 0.0;
    let mut h: f64 = 1e-3;
    let mut min_u = alpha;
    let mut drift: f64 = 0.0;
    let mut decreasing = true;
    let mut steps = 0;
    while x < 1.0 && y[0] >= U_FLOOR && steps < MAX_STEPS {
        steps += 1;
        h = h.min(1.0 - x);
        if h < MIN_STEP {
            if y[0] < 1e-6 * alpha {
                // u reached 0 before x = 1; report the residual at exit.
                break;
            }
            return Err(ShootError::StepUnderflow { alpha, lambda, x, u: y[0] });
        }
        let Some((y_new, e)) = dp_step(nl, lambda, y, h) else {
            h *= 0.25;
            continue;
        };
        let norm = (0..2)
            .map(|i| e[i].abs() / (atol[i] + rtol * y[i].abs().max(y_new[i].abs())))
            .fold(0.0, f64::max);
        if !(norm <= 1.0) || !(y_new[0] > 0.0) {
            let factor = if norm.is_finite() { (0.9 * norm.powf(-0.2)).clamp(0.1, 0.5) } else { 0.25 };
            h *= factor;
            continue;
        }
        x += h;
        y = y_new;
        min_u = min_u.min(y[0]);
        decreasing &= y[1] < 0.0;
        let e_now = 0.5 * y[1] * y[1] + lambda * nl.big_f(y[0]);
        if e_now.is_finite() {
            drift = drift.max((e_now - energy).abs());
        }
        let grow = if norm > 0.0 { 0.9 * norm.powf(-0.2) } else { 5.0 };
        h *= grow.clamp(0.2, 5.0);
    }
    let u_at_1 = if x >= 1.0 { y[0] } else { y[0] + y[1] * (1.0 - x) };
    Ok(ShotResult { alpha, lambda, u_at_1, min_u, energy_drift: drift, energy, decreasing, x_stop: x })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub shots: Vec<ShotResult>,
    pub worst_residual: f64,
    pub worst_relative_drift: f64,
    pub passed: bool,
}

/// Shoots every point of a trace in parallel.
pub fn verify_trace(
    nl: &Nonlinearity,
    points: &[TimeMapPoint],
    rtol: f64,
) -> Result<Verification, ShootError> {
    if points.is_empty() {
        return Err(ShootError::Empty);
    }
    let shots =
        points.par_iter().map(|p| shoot(nl, p.alpha, p.lambda, rtol)).collect::<Result<Vec<_>, _>>()?;
    let worst_residual = shots.iter().map(|s| s.u_at_1.abs()).fold(0.0, f64::max);
    let worst_relative_drift = shots.iter().map(|s| s.relative_drift()).fold(0.0, f64::max);
    let passed = shots.iter().all(|s| s.passed());
    Ok(Verification { shots, worst_residual, worst_relative_drift, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, ParamBindings};
    use crate::problem::locate_landmarks;
    use crate::timemap::{time_map, DEFAULT_TOL};

    fn build(f: &str, big_f: &str, b: ParamBindings) -> Nonlinearity {
        Nonlinearity::build(&parse(f).unwrap(), &b, Some(&parse(big_f).unwrap()), 50.0).unwrap()
    }

    #[test]
    fn log_time_map_pair_solves_the_bvp() {
        let nl = build("ln(u)", "u*ln(u) - u", ParamBindings::new());
        let lm = locate_landmarks(&nl).unwrap();
        let p = time_map(&nl, &lm, 5.0, DEFAULT_TOL).unwrap();
        let s = shoot(&nl, 5.0, p.lambda, DEFAULT_RTOL).unwrap();
        assert!(s.u_at_1.abs() <= 1e-6, "{s:?}");
        assert!(s.relative_drift() <= DRIFT_TOL, "{s:?}");
        assert!(s.decreasing);
        let wrong = shoot(&nl, 5.0, 1.2 * p.lambda, DEFAULT_RTOL).unwrap();
        assert!(wrong.u_at_1.abs() > 0.01, "{wrong:?}");
    }

    #[test]
    fn inverse_sqrt_curve_start() {
        let b = ParamBindings::new().with("sigma", 1.0);
        let nl = build("sigma - 1/sqrt(u)", "sigma*u - 2*sqrt(u)", b);
        let lambda = 2.0 * std::f64::consts::PI.powi(2);
        let s = shoot(&nl, 4.0, lambda, DEFAULT_RTOL).unwrap();
        assert!(s.u_at_1.abs() <= 1e-5, "{s:?}");
    }

    #[test]
    fn empty_trace_is_an_error() {
        let nl = build("ln(u)", "u*ln(u) - u", ParamBindings::new());
        assert_eq!(verify_trace(&nl, &[], DEFAULT_RTOL), Err(ShootError::Empty));
    }
}
