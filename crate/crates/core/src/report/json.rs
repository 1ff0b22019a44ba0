use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use super::{fmt_sig, JSON_DIGITS};
use crate::analysis::Analysis;
use crate::calculus::LimitKind;
use crate::classify::CurveEnd;
use crate::problem::{Diagnostic, Verdict};
use crate::shooting::Verification;
use crate::timemap::EndpointValue;
use crate::tracer::CurveTrace;

/// A float written with 17 significant digits; ±∞ become the strings
/// "inf"/"-inf" and NaN becomes null.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_nan() {
            return s.serialize_none();
        }
        if v.is_infinite() {
            return s.serialize_str(if v > 0.0 { "inf" } else { "-inf" });
        }
        let text = if v == 0.0 { "0.0".to_string() } else { fmt_sig(v, JSON_DIGITS) };
        RawValue::from_string(text).map_err(S::Error::custom)?.serialize(s)
    }
}

fn real(v: Option<f64>) -> Option<Real> {
    v.map(Real)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ErrorBar {
    Abs(Real),
    Exact(&'static str),
}

impl ErrorBar {
    fn of(err: f64) -> ErrorBar {
        if err == 0.0 {
            ErrorBar::Exact("exact")
        } else {
            ErrorBar::Abs(Real(err))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub value: Option<Real>,
    pub error: ErrorBar,
    pub provenance: String,
}

impl From<&EndpointValue> for Quantity {
    fn from(e: &EndpointValue) -> Quantity {
        Quantity { value: real(e.value), error: ErrorBar::of(e.abs_error), provenance: e.provenance.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Input {
    pub expression: String,
    pub antiderivative: Option<String>,
    pub f_mode: Option<String>,
    pub fixture: Option<String>,
    pub parameters: Vec<(String, Real)>,
    pub u_max: Real,
    pub tol: Real,
    pub tau: Real,
    pub asserted_limits: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandmarkReport {
    pub beta1: Real,
    pub beta2: Real,
    pub eta: Option<Real>,
    pub sigma: Option<Real>,
    pub rho: Option<Real>,
    pub gamma: Option<Real>,
    pub xi: Real,
    /// Relative bracket width of the root refinement.
    pub relative_error: Real,
    pub scan_limit: Real,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticReport {
    pub condition: &'static str,
    pub note: String,
    pub witnesses: Vec<Real>,
}

impl From<&Diagnostic> for DiagnosticReport {
    fn from(d: &Diagnostic) -> DiagnosticReport {
        DiagnosticReport {
            condition: d.condition,
            note: d.note.clone(),
            witnesses: d.witnesses.iter().copied().map(Real).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub class: &'static str,
    pub value: Option<Real>,
}

impl From<LimitKind> for LimitReport {
    fn from(k: LimitKind) -> LimitReport {
        let (class, value) = match k {
            LimitKind::Finite(v) => ("finite", Some(Real(v))),
            LimitKind::Zero => ("zero", Some(Real(0.0))),
            LimitKind::PosInfinity => ("pos-divergent", None),
            LimitKind::NegInfinity => ("neg-divergent", None),
            LimitKind::Inconclusive => ("inconclusive", None),
        };
        LimitReport { class, value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionsReport {
    pub p1: Verdict,
    pub p2: Verdict,
    pub h1: Verdict,
    pub h2: Verdict,
    pub h3: Verdict,
    pub h4: Verdict,
    pub convex: Verdict,
    pub f0_limit: LimitReport,
    pub diagnostics: Vec<DiagnosticReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GReport {
    pub value: Option<Real>,
    pub error: ErrorBar,
    pub converged: bool,
    pub certified_negative: Option<String>,
    pub shell_sums: Vec<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndpointsReport {
    pub lambda_hat: Quantity,
    pub kappa: Quantity,
    #[serde(rename = "G")]
    pub g: GReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndReport {
    pub lambda: Option<Real>,
    pub alpha: Real,
}

impl From<&CurveEnd> for EndReport {
    fn from(e: &CurveEnd) -> EndReport {
        EndReport { lambda: real(e.lambda), alpha: Real(e.alpha) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub shape: String,
    pub rule_fired: Option<String>,
    pub start: Option<EndReport>,
    pub end: Option<EndReport>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical_shape: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_point: Option<EndReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub points: usize,
    pub worst_residual: Real,
    pub worst_relative_energy_drift: Real,
    pub passed: bool,
}

impl From<&Verification> for VerificationReport {
    fn from(v: &Verification) -> VerificationReport {
        VerificationReport {
            points: v.shots.len(),
            worst_residual: Real(v.worst_residual),
            worst_relative_energy_drift: Real(v.worst_relative_drift),
            passed: v.passed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Files {
    pub csv: Option<String>,
    pub svg: Option<String>,
    pub json: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub input: Input,
    pub landmarks: Option<LandmarkReport>,
    pub conditions: ConditionsReport,
    pub endpoints: Option<EndpointsReport>,
    pub classification: ClassificationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
    pub warnings: Vec<String>,
    pub files: Files,
}

impl AnalysisReport {
    pub fn new(a: &Analysis) -> AnalysisReport {
        let inp = &a.input;
        let input = Input {
            expression: inp.expression.clone(),
            antiderivative: inp.antiderivative.clone(),
            f_mode: a.nonlinearity.as_ref().map(|nl| {
                serde_json::to_value(nl.f_mode())
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default()
            }),
            fixture: inp.fixture.clone(),
            parameters: inp.params.iter().map(|(k, v)| (k.to_string(), Real(v))).collect(),
            u_max: Real(inp.u_max),
            tol: Real(inp.options.tol),
            tau: Real(inp.options.tau),
            asserted_limits: inp
                .options
                .overrides
                .iter()
                .map(|(k, v)| {
                    let r = LimitReport::from(v);
                    let class = match r.value {
                        Some(x) if r.class == "finite" => format!("finite:{x:?}", x = x.0),
                        _ => r.class.to_string(),
                    };
                    (k.to_string(), class)
                })
                .collect(),
        };
        let landmarks = a.landmarks.as_ref().map(|lm| LandmarkReport {
            beta1: Real(lm.beta1),
            beta2: Real(lm.beta2),
            eta: real(lm.eta),
            sigma: real(lm.sigma),
            rho: real(lm.rho),
            gamma: real(lm.gamma),
            xi: Real(lm.xi),
            relative_error: Real(1e-14),
            scan_limit: Real(lm.scan_limit),
            diagnostics: lm.diagnostics.clone(),
        });
        let c = &a.conditions;
        let conditions = ConditionsReport {
            p1: c.p1,
            p2: c.p2,
            h1: c.h1,
            h2: c.h2,
            h3: c.h3,
            h4: c.h4,
            convex: c.convex,
            f0_limit: c.f0_limit.kind.into(),
            diagnostics: c.diagnostics.iter().map(DiagnosticReport::from).collect(),
        };
        let endpoints = a.endpoints.as_ref().map(|ep| EndpointsReport {
            lambda_hat: (&ep.lambda_hat).into(),
            kappa: (&ep.kappa).into(),
            g: GReport {
                value: real(ep.g.value),
                error: if ep.g.value.is_some_and(f64::is_infinite) {
                    ErrorBar::Exact("exact")
                } else {
                    ErrorBar::Abs(Real(ep.g.abs_error))
                },
                converged: ep.g.converged,
                certified_negative: ep.g.certified_negative.clone(),
                shell_sums: ep.g.shells.iter().copied().map(Real).collect(),
            },
        });
        let s = &a.summary;
        let classification = ClassificationReport {
            shape: s.shape.shape.to_string(),
            rule_fired: s.shape.rule_fired.clone(),
            start: s.start.as_ref().map(EndReport::from),
            end: s.end.as_ref().map(EndReport::from),
            notes: s.notes.clone(),
            empirical_shape: None,
            min_point: None,
        };
        AnalysisReport {
            input,
            landmarks,
            conditions,
            endpoints,
            classification,
            verification: None,
            warnings: a.warnings.clone(),
            files: Files::default(),
        }
    }

    /// Adds the sampled-curve cross-check.
    pub fn with_trace(mut self, trace: &CurveTrace) -> AnalysisReport {
        self.classification.empirical_shape = Some(trace.empirical.shape.to_string());
        self.classification.min_point =
            trace.min_point.map(|m| EndReport { lambda: Some(Real(m.lambda)), alpha: Real(m.alpha) });
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_encoding() {
        let v = [Real(f64::INFINITY), Real(f64::NEG_INFINITY), Real(f64::NAN), Real(0.0), Real(0.1)];
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"["inf","-inf",null,0.0,0.10000000000000001]"#);
        let text = serde_json::to_string(&[Real(1e-300), Real(6.02e23)]).unwrap();
        let back: Vec<Box<RawValue>> = serde_json::from_str(&text).unwrap();
        assert_eq!(back[0].get().parse::<f64>().unwrap(), 1e-300);
        assert_eq!(back[1].get().parse::<f64>().unwrap(), 6.02e23);
    }
}
