use serde::Serialize;

use super::landmarks::scan_grid;
use super::{Landmarks, Nonlinearity};
use crate::calculus::{estimate_limit_at_zero, LimitEstimate, LimitKind, ProbeSpec};

const MAX_WITNESSES: usize = 8;
/// Fraction of failed evaluations above which a sampled verdict is withheld.
const MAX_FAILED_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Undetermined,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }

    fn from_bool(b: bool) -> Verdict {
        if b {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub condition: &'static str,
    pub note: String,
    pub witnesses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub p1: Verdict,
    pub p2: Verdict,
    pub h1: Verdict,
    pub h2: Verdict,
    pub h3: Verdict,
    pub h4: Verdict,
    /// f″ > 0 on the whole scan.
    pub convex: Verdict,
    pub f0_limit: LimitEstimate,
    pub diagnostics: Vec<Diagnostic>,
}

impl ConditionReport {
    /// Report for a nonlinearity whose landmarks could not be located.
    pub fn p1_failed(note: String) -> ConditionReport {
        ConditionReport {
            p1: Verdict::Fails,
            p2: Verdict::Undetermined,
            h1: Verdict::Undetermined,
            h2: Verdict::Undetermined,
            h3: Verdict::Undetermined,
            h4: Verdict::Undetermined,
            convex: Verdict::Undetermined,
            f0_limit: LimitEstimate::asserted(LimitKind::Inconclusive),
            diagnostics: vec![Diagnostic { condition: "P1", note, witnesses: Vec::new() }],
        }
    }
}

fn spread(points: &[f64]) -> Vec<f64> {
    if points.len() <= MAX_WITNESSES {
        return points.to_vec();
    }
    (0..MAX_WITNESSES).map(|k| points[k * (points.len() - 1) / (MAX_WITNESSES - 1)]).collect()
}

struct Sampled {
    points: Vec<(f64, f64)>,
    failed: usize,
}

impl Sampled {
    fn new(f: impl Fn(f64) -> f64, grid: &[f64]) -> Sampled {
        let mut points = Vec::with_capacity(grid.len());
        let mut failed = 0;
        for &u in grid {
            let v = f(u);
            if v.is_finite() {
                points.push((u, v));
            } else {
                failed += 1;
            }
        }
        Sampled { points, failed }
    }

    fn unreliable(&self) -> bool {
        let total = self.points.len() + self.failed;
        total == 0 || self.failed as f64 > MAX_FAILED_FRACTION * total as f64
    }

    /// Checks `ok` at every sample; returns the verdict and its witnesses.
    fn all(&self, ok: impl Fn(f64) -> bool) -> (Verdict, Vec<f64>) {
        if self.unreliable() {
            return (Verdict::Undetermined, Vec::new());
        }
        let bad: Vec<f64> = self.points.iter().filter(|p| !ok(p.1)).map(|p| p.0).collect();
        if bad.is_empty() {
            let all: Vec<f64> = self.points.iter().map(|p| p.0).collect();
            (Verdict::Holds, spread(&all))
        } else {
            (Verdict::Fails, spread(&bad))
        }
    }
}

pub fn check_conditions(nl: &Nonlinearity, lm: &Landmarks) -> ConditionReport {
    let grid = scan_grid(nl.u_max());
    let upper = lm.upper();
    let inside: Vec<f64> = grid.iter().copied().filter(|u| *u < upper).collect();
    let mut diagnostics = Vec::new();
    let upto = if lm.beta2_is_finite() { "β₂".to_string() } else { format!("u_max = {}", nl.u_max()) };

    let p2 = Verdict::from_bool(lm.eta.is_some());
    if let Some(eta) = lm.eta {
        diagnostics.push(Diagnostic { condition: "P2", note: "F(η) = 0".into(), witnesses: vec![eta] });
    }

    // (H1)/(H2): sign pattern of g′ on (0, β₂).
    let dg = Sampled::new(|u| nl.dg(u), &inside);
    let (h1, h2) = if dg.unreliable() {
        (Verdict::Undetermined, Verdict::Undetermined)
    } else {
        let mut runs: Vec<(bool, f64)> = Vec::new();
        for &(u, v) in &dg.points {
            if v == 0.0 {
                continue;
            }
            if runs.last().is_none_or(|r| r.0 != (v > 0.0)) {
                runs.push((v > 0.0, u));
            }
        }
        let pattern: Vec<bool> = runs.iter().map(|r| r.0).collect();
        let witnesses: Vec<f64> = runs.iter().map(|r| r.1).collect();
        match pattern.as_slice() {
            [true] => {
                diagnostics.push(Diagnostic {
                    condition: "H1",
                    note: format!("g′ > 0 at all {} samples up to {upto}", dg.points.len()),
                    witnesses: spread(&dg.points.iter().map(|p| p.0).collect::<Vec<_>>()),
                });
                (Verdict::Holds, Verdict::Fails)
            }
            [true, false] => {
                diagnostics.push(Diagnostic {
                    condition: "H2",
                    note: format!("g′ changes sign once, from + to −, at σ; sampled up to {upto}"),
                    witnesses: lm.sigma.into_iter().collect(),
                });
                (Verdict::Fails, Verdict::Holds)
            }
            _ => {
                let signs: String = pattern.iter().map(|p| if *p { '+' } else { '-' }).collect();
                diagnostics.push(Diagnostic {
                    condition: "H1/H2",
                    note: format!("neither H1 nor H2: g′ sign pattern {signs} (run starts as witnesses)"),
                    witnesses,
                });
                (Verdict::Fails, Verdict::Fails)
            }
        }
    };

    // (H3) through the criterion [u f′/f]′ ≤ 0 on (σ, β₂).
    let h3 = match (h2, lm.sigma) {
        (Verdict::Holds, Some(sigma)) => {
            let pts: Vec<f64> = inside.iter().copied().filter(|u| *u > sigma && nl.f(*u) > 0.0).collect();
            let samples = Sampled::new(|u| nl.log_elasticity_slope(u), &pts);
            let slack = |u: f64| {
                let (f, df, d2f) = (nl.f(u), nl.df(u), nl.d2f(u));
                1e-9 * (((df + u * d2f) / f).abs() + (u * df * df / (f * f)).abs())
            };
            let bad: Vec<f64> = samples.points.iter().filter(|(u, v)| *v > slack(*u)).map(|p| p.0).collect();
            let verdict = if samples.unreliable() || pts.is_empty() {
                Verdict::Undetermined
            } else {
                Verdict::from_bool(bad.is_empty())
            };
            let (note, witnesses) = if bad.is_empty() {
                (format!("[u f′/f]′ ≤ 0 at {} samples on (σ, {upto})", samples.points.len()), spread(&pts))
            } else {
                ("[u f′/f]′ > 0 at the witnesses".to_string(), spread(&bad))
            };
            diagnostics.push(Diagnostic { condition: "H3", note, witnesses });
            verdict
        }
        (Verdict::Undetermined, _) => Verdict::Undetermined,
        _ => Verdict::Fails,
    };

    let d2f = Sampled::new(|u| nl.d2f(u), &inside);
    let (h4, w) = d2f.all(|v| v < 0.0);
    diagnostics.push(Diagnostic {
        condition: "H4",
        note: match h4 {
            Verdict::Holds => format!("f″ < 0 on the samples up to {upto}"),
            Verdict::Fails => "f″ ≥ 0 at the witnesses".into(),
            Verdict::Undetermined => "f″ could not be sampled reliably".into(),
        },
        witnesses: w,
    });
    if h4.holds() {
        // Remark R1(ii): under H4 the limit of θ′ at β₂ decides H1 versus H2.
        let end = upper * (1.0 - 1e-9);
        diagnostics.push(Diagnostic {
            condition: "H4",
            note: format!("θ′ near {upto} = {:.6e}", nl.dtheta(end)),
            witnesses: vec![end],
        });
    }

    let all = Sampled::new(|u| nl.d2f(u), &grid);
    let (convex, _) = all.all(|v| v > 0.0);

    let f0_limit = estimate_limit_at_zero(|u| nl.f(u), ProbeSpec::AT_ZERO)
        .unwrap_or_else(|_| LimitEstimate::asserted(LimitKind::Inconclusive));

    ConditionReport { p1: Verdict::Holds, p2, h1, h2, h3, h4, convex, f0_limit, diagnostics }
}
