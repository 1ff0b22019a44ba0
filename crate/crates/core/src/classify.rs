//! Shape of the bifurcation curve from the theorems, and from sampled T.

use std::fmt;

use serde::Serialize;

use crate::calculus::LimitKind;
use crate::problem::{ConditionReport, Landmarks, Nonlinearity, Verdict};
use crate::timemap::{CurveEndpoints, TimeMapPoint};

/// Relative dead-band for successive differences of sampled T.
const DEAD_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Shape {
    MonotoneDecreasing,
    MonotoneIncreasing,
    SubsetShaped,
    CurveDoesNotExist,
    NotCovered,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeClass {
    pub shape: Shape,
    /// The theorem or corollary that decided the shape, e.g. "T2(ii)+G<0".
    pub rule_fired: Option<String>,
}

impl ShapeClass {
    fn new(shape: Shape, rule: impl Into<String>) -> ShapeClass {
        ShapeClass { shape, rule_fired: Some(rule.into()) }
    }

    fn uncovered() -> ShapeClass {
        ShapeClass { shape: Shape::NotCovered, rule_fired: None }
    }
}

/// A point `(λ, α)` of the (λ, ‖u‖∞) plane; λ may be infinite or unknown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveEnd {
    pub lambda: Option<f64>,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSummary {
    pub shape: ShapeClass,
    pub start: Option<CurveEnd>,
    pub end: Option<CurveEnd>,
    pub notes: Vec<String>,
}

fn g_branch(ep: &CurveEndpoints) -> Result<(Shape, &'static str), String> {
    match ep.g.is_negative() {
        Some(true) => Ok((Shape::SubsetShaped, "G<0")),
        Some(false) => Ok((Shape::MonotoneIncreasing, "G≥0")),
        None => Err("the sign of G could not be resolved".into()),
    }
}

/// Applies the theorems in the fixed order C2, T2(i), T2(ii), C0. C2 goes
/// first so that convex nonlinearities, which also satisfy (H1), report the
/// corollary that describes their endpoints.
pub fn classify(
    nl: &Nonlinearity,
    lm: &Landmarks,
    cond: &ConditionReport,
    ep: Option<&CurveEndpoints>,
) -> CurveSummary {
    let mut notes = Vec::new();
    let summary = |shape: ShapeClass, notes: Vec<String>| {
        let (start, end) = match (lm.eta, ep) {
            (Some(eta), Some(ep)) => (
                Some(CurveEnd { lambda: ep.lambda_hat.value, alpha: eta }),
                Some(CurveEnd { lambda: ep.kappa.value, alpha: lm.beta2 }),
            ),
            _ => (None, None),
        };
        CurveSummary { shape, start, end, notes }
    };

    if cond.p1 == Verdict::Fails {
        notes.push("(P1) fails; the theorems do not apply".into());
        return summary(ShapeClass::uncovered(), notes);
    }
    if cond.p2 == Verdict::Fails || lm.eta.is_none() {
        return summary(ShapeClass::new(Shape::CurveDoesNotExist, "P2 fails"), notes);
    }
    let Some(ep) = ep else {
        notes.push("curve endpoints were not computed".into());
        return summary(ShapeClass::uncovered(), notes);
    };
    let conflicting = [cond.h1, cond.h2].iter().all(|v| v.holds());
    if conflicting {
        notes.push("conflicting verdicts: (H1) and (H2) both reported true".into());
        return summary(ShapeClass::uncovered(), notes);
    }

    if cond.convex.holds() && !lm.beta2_is_finite() {
        c2_endpoint_notes(nl, cond, ep, &mut notes);
        return summary(ShapeClass::new(Shape::MonotoneDecreasing, "C2"), notes);
    }
    if cond.h1.holds() {
        return summary(ShapeClass::new(Shape::MonotoneDecreasing, "T2(i)"), notes);
    }

    let t2 = cond.h2.holds() && (cond.h3.holds() || cond.h4.holds());
    let c0 = lm.beta2_is_finite() && cond.h4.holds();
    if !(t2 || c0) {
        notes.push(uncovered_reason(lm, cond));
        return summary(ShapeClass::uncovered(), notes);
    }
    let rule = if t2 { "T2(ii)" } else { "C0" };
    let f0_finite = matches!(cond.f0_limit.kind, LimitKind::Finite(_) | LimitKind::Zero);
    let c1_hyp = (cond.h2.holds() && cond.h3.holds()) || c0;
    let c1 =
        c1_hyp && f0_finite && ep.g.certified_negative.as_deref().is_some_and(|c| c.starts_with("T0(c)"));
    if c1 {
        return summary(ShapeClass::new(Shape::SubsetShaped, "C1"), notes);
    }
    match g_branch(ep) {
        Ok((shape, sign)) => summary(ShapeClass::new(shape, format!("{rule}+{sign}")), notes),
        Err(e) => {
            notes.push(format!("{rule} hypotheses hold but {e}"));
            summary(ShapeClass::uncovered(), notes)
        }
    }
}

fn uncovered_reason(lm: &Landmarks, cond: &ConditionReport) -> String {
    let undetermined = [cond.h1, cond.h2, cond.h3, cond.h4].contains(&Verdict::Undetermined);
    if undetermined {
        "some of (H1)–(H4) could not be decided numerically".into()
    } else if cond.h2.holds() {
        "(H2) holds without (H3) or (H4); the theorems say nothing about this case".into()
    } else if lm.beta2_is_finite() {
        "neither (H1), (H2) nor (H4) holds".into()
    } else {
        "neither (H1) nor (H2) holds and β₂ = ∞ rules out C0".into()
    }
}

/// Cross-checks the endpoint branches predicted by Corollary C2 against the
/// ones computed from Theorem T1.
fn c2_endpoint_notes(
    nl: &Nonlinearity,
    cond: &ConditionReport,
    ep: &CurveEndpoints,
    notes: &mut Vec<String>,
) {
    let lh_expected = match cond.f0_limit.kind {
        LimitKind::Zero => Some(true),
        LimitKind::Finite(v) if v < 0.0 => Some(false),
        _ => None,
    };
    if let (Some(inf), Some(v)) = (lh_expected, ep.lambda_hat.value) {
        if inf != v.is_infinite() {
            notes.push(format!("C2 predicts λ̂ {}, computed {v}", if inf { "= ∞" } else { "finite" }));
        }
    }
    let slope = nl.df(1e6);
    if let Some(k) = ep.kappa.value {
        let zero_expected = !slope.is_finite() || slope > 1e6;
        if zero_expected && k != 0.0 {
            notes.push(format!("C2 predicts κ = 0 (f′ → ∞), computed {k}"));
        }
    }
}

/// Shape read off sampled T: signs of successive differences outside a
/// relative dead-band of 1e-6.
pub fn empirical_shape(points: &[TimeMapPoint]) -> ShapeClass {
    let mut runs: Vec<bool> = Vec::new();
    for w in points.windows(2) {
        let d = w[1].t - w[0].t;
        if d.abs() <= DEAD_BAND * w[0].t.abs().max(w[1].t.abs()) {
            continue;
        }
        let up = d > 0.0;
        if runs.last() != Some(&up) {
            runs.push(up);
        }
    }
    let shape = match runs.as_slice() {
        [false] => Shape::MonotoneDecreasing,
        [true] => Shape::MonotoneIncreasing,
        [false, true] => Shape::SubsetShaped,
        _ => return ShapeClass::uncovered(),
    };
    ShapeClass::new(shape, "empirical")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(ts: &[f64]) -> Vec<TimeMapPoint> {
        ts.iter()
            .enumerate()
            .map(|(i, &t)| TimeMapPoint { alpha: i as f64 + 1.0, t, t_prime: None, lambda: t * t })
            .collect()
    }

    #[test]
    fn empirical_patterns() {
        let s = |ts: &[f64]| empirical_shape(&pts(ts)).shape;
        assert_eq!(s(&[5.0, 4.0, 3.0, 2.0]), Shape::MonotoneDecreasing);
        assert_eq!(s(&[1.0, 2.0, 3.0]), Shape::MonotoneIncreasing);
        assert_eq!(s(&[3.0, 2.0, 2.0 + 1e-9, 2.5]), Shape::SubsetShaped);
        assert_eq!(s(&[1.0, 2.0, 1.0]), Shape::NotCovered);
        assert_eq!(s(&[2.0, 1.0, 2.0, 1.0]), Shape::NotCovered);
    }
}
