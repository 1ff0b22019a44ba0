//! Numeric limit probing at 0⁺ and +∞.
//!
//! A function is sampled along a geometric sequence approaching the limit
//! point and the tail of the samples is classified. The thresholds are
//! heuristics; slowly varying functions can fool them, which is why callers
//! accept explicit overrides.

use serde::Serialize;
use thiserror::Error;

/// Samples considered by the tail tests.
const TAIL: usize = 8;
const MIN_SAMPLES: usize = 4;
const HUGE: f64 = 1e8;
const TINY: f64 = 1e-12;
const CAUCHY_RTOL: f64 = 1e-3;
const CAUCHY_WINDOW: usize = 5;

/// Geometric probe sequence `start·ratio^k`, `k = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeSpec {
    pub start: f64,
    pub ratio: f64,
    pub count: usize,
}

impl ProbeSpec {
    pub const AT_ZERO: ProbeSpec = ProbeSpec { start: 1e-2, ratio: 0.5, count: 30 };
    pub const AT_INFINITY: ProbeSpec = ProbeSpec { start: 10.0, ratio: 2.0, count: 30 };

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.count).map(|k| self.start * self.ratio.powi(k as i32))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", content = "value", rename_all = "kebab-case")]
pub enum LimitKind {
    Finite(f64),
    PosInfinity,
    NegInfinity,
    Zero,
    Inconclusive,
}

impl LimitKind {
    /// Numeric value of the limit, when the class pins one down.
    pub fn value(self) -> Option<f64> {
        match self {
            LimitKind::Finite(v) => Some(v),
            LimitKind::Zero => Some(0.0),
            LimitKind::PosInfinity => Some(f64::INFINITY),
            LimitKind::NegInfinity => Some(f64::NEG_INFINITY),
            LimitKind::Inconclusive => None,
        }
    }

    pub fn from_value(v: f64) -> LimitKind {
        if v == f64::INFINITY {
            LimitKind::PosInfinity
        } else if v == f64::NEG_INFINITY {
            LimitKind::NegInfinity
        } else if v == 0.0 {
            LimitKind::Zero
        } else {
            LimitKind::Finite(v)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub kind: LimitKind,
    pub samples: Vec<(f64, f64)>,
}

impl LimitEstimate {
    /// A limit class supplied by the user rather than probed.
    pub fn asserted(kind: LimitKind) -> LimitEstimate {
        LimitEstimate { kind, samples: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LimitError {
    #[error("function could not be evaluated at any probe point")]
    AllFailed,
}

/// Limit of `f` as `u → 0⁺`; non-finite values count as failed probes.
pub fn estimate_limit_at_zero(
    f: impl Fn(f64) -> f64,
    probes: ProbeSpec,
) -> Result<LimitEstimate, LimitError> {
    estimate(f, probes)
}

/// Limit of `f` as `u → ∞`.
pub fn estimate_limit_at_infinity(
    f: impl Fn(f64) -> f64,
    probes: ProbeSpec,
) -> Result<LimitEstimate, LimitError> {
    estimate(f, probes)
}

fn estimate(f: impl Fn(f64) -> f64, probes: ProbeSpec) -> Result<LimitEstimate, LimitError> {
    let samples: Vec<(f64, f64)> =
        probes.points().map(|u| (u, f(u))).filter(|(_, v)| v.is_finite()).collect();
    if samples.is_empty() {
        return Err(LimitError::AllFailed);
    }
    let values: Vec<f64> = samples.iter().map(|s| s.1).collect();
    Ok(LimitEstimate { kind: classify(&values), samples })
}

fn classify(values: &[f64]) -> LimitKind {
    if values.len() < MIN_SAMPLES {
        return LimitKind::Inconclusive;
    }
    let tail = &values[values.len().saturating_sub(TAIL)..];
    if tail.iter().all(|v| *v == 0.0) {
        return LimitKind::Zero;
    }
    let last = *tail.last().unwrap();
    let one_sign = tail.iter().all(|v| *v != 0.0 && v.signum() == last.signum());
    let mags: Vec<f64> = tail.iter().map(|v| v.abs()).collect();
    let diffs: Vec<f64> = tail.windows(2).map(|w| (w[1] - w[0]).abs()).collect();

    let growing = mags.windows(2).all(|w| w[1] > w[0]);
    let not_settling = diffs.windows(2).all(|w| w[1] >= 0.999 * w[0]);
    if one_sign && growing && (mags[mags.len() - 1] > HUGE || not_settling) {
        return if last > 0.0 { LimitKind::PosInfinity } else { LimitKind::NegInfinity };
    }

    let shrinking = mags.windows(2).all(|w| w[1] <= 0.999 * w[0]);
    if one_sign && shrinking {
        let a_last = mags[mags.len() - 1];
        if a_last < TINY || aitken(tail).is_some_and(|l| l.abs() <= 0.05 * a_last) {
            return LimitKind::Zero;
        }
    }

    let window = &tail[tail.len().saturating_sub(CAUCHY_WINDOW + 1)..];
    let cauchy =
        window.windows(2).all(|w| (w[1] - w[0]).abs() <= CAUCHY_RTOL * w[1].abs().max(f64::MIN_POSITIVE));
    if cauchy {
        return LimitKind::Finite(last);
    }
    LimitKind::Inconclusive
}

/// Aitken Δ² extrapolation from the last three values.
fn aitken(v: &[f64]) -> Option<f64> {
    let n = v.len();
    if n < 3 {
        return None;
    }
    let (x0, x1, x2) = (v[n - 3], v[n - 2], v[n - 1]);
    let denom = x2 - 2.0 * x1 + x0;
    (denom != 0.0).then(|| x2 - (x2 - x1).powi(2) / denom)
}
