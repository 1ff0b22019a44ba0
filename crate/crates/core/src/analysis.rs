//! The end-to-end pipeline: build → landmarks → conditions → endpoints →
//! classification.

use thiserror::Error;

use crate::calculus::LimitEstimate;
use crate::classify::{classify, CurveSummary};
use crate::expr::{parse, ParamBindings, ParseError};
use crate::fixtures::Fixture;
use crate::problem::{
    check_conditions, locate_landmarks, BuildError, ConditionReport, Landmarks, Nonlinearity,
};
use crate::timemap::{curve_endpoints, CurveEndpoints, EndpointOptions, LimitKey};

pub const DEFAULT_U_MAX: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisInput {
    pub expression: String,
    pub antiderivative: Option<String>,
    pub fixture: Option<String>,
    pub params: ParamBindings,
    pub u_max: f64,
    pub options: EndpointOptions,
}

impl AnalysisInput {
    pub fn new(expression: &str) -> AnalysisInput {
        AnalysisInput {
            expression: expression.to_string(),
            antiderivative: None,
            fixture: None,
            params: ParamBindings::new(),
            u_max: DEFAULT_U_MAX,
            options: EndpointOptions::default(),
        }
    }

    /// A fixture with its default parameters, closed-form F and u_max.
    pub fn from_fixture(fx: &Fixture) -> AnalysisInput {
        AnalysisInput {
            expression: fx.f.to_string(),
            antiderivative: fx.big_f.map(str::to_string),
            fixture: Some(fx.name.to_string()),
            params: fx.default_bindings(),
            u_max: fx.u_max.unwrap_or(DEFAULT_U_MAX),
            options: EndpointOptions::default(),
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> AnalysisInput {
        self.params.insert(name, value);
        self
    }
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("cannot parse f: {0}")]
    Parse(ParseError),
    #[error("cannot parse the antiderivative: {0}")]
    ParseAntiderivative(ParseError),
    #[error(transparent)]
    Build(#[from] BuildError),
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub input: AnalysisInput,
    pub nonlinearity: Option<Nonlinearity>,
    pub landmarks: Option<Landmarks>,
    pub conditions: ConditionReport,
    pub endpoints: Option<CurveEndpoints>,
    pub summary: CurveSummary,
    pub warnings: Vec<String>,
}

pub fn build_nonlinearity(input: &AnalysisInput) -> Result<Nonlinearity, AnalysisError> {
    let ast = parse(&input.expression).map_err(AnalysisError::Parse)?;
    let big_f = match &input.antiderivative {
        Some(text) => Some(parse(text).map_err(AnalysisError::ParseAntiderivative)?),
        None => None,
    };
    Ok(Nonlinearity::build(&ast, &input.params, big_f.as_ref(), input.u_max)?)
}

pub fn analyze(input: &AnalysisInput) -> Result<Analysis, AnalysisError> {
    let nl = build_nonlinearity(input)?;
    let mut warnings = Vec::new();
    let landmarks = match locate_landmarks(&nl) {
        Ok(lm) => lm,
        Err(e) => {
            let conditions = ConditionReport::p1_failed(e.to_string());
            warnings.push(e.to_string());
            let summary = classify(&nl, &dummy_landmarks(&nl), &conditions, None);
            return Ok(Analysis {
                input: input.clone(),
                nonlinearity: Some(nl),
                landmarks: None,
                conditions,
                endpoints: None,
                summary,
                warnings,
            });
        }
    };
    let mut conditions = check_conditions(&nl, &landmarks);
    if let Some(k) = input.options.overrides.get(LimitKey::F0) {
        conditions.f0_limit = LimitEstimate::asserted(k);
    }
    let endpoints = match curve_endpoints(&nl, &landmarks, &input.options) {
        Ok(ep) => {
            warnings.extend(ep.warnings.iter().cloned());
            Some(ep)
        }
        Err(e) => {
            warnings.push(e.to_string());
            None
        }
    };
    let summary = classify(&nl, &landmarks, &conditions, endpoints.as_ref());
    Ok(Analysis {
        input: input.clone(),
        nonlinearity: Some(nl),
        landmarks: Some(landmarks),
        conditions,
        endpoints,
        summary,
        warnings,
    })
}

/// Placeholder landmarks for classifying a nonlinearity that failed (P1).
fn dummy_landmarks(nl: &Nonlinearity) -> Landmarks {
    Landmarks {
        beta1: f64::NAN,
        beta2: f64::NAN,
        eta: None,
        sigma: None,
        rho: None,
        gamma: None,
        xi: f64::NAN,
        scan_limit: nl.u_max(),
        diagnostics: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::Shape;
    use crate::fixtures::lookup;

    #[test]
    fn non_semipositone_is_not_covered() {
        let a = analyze(&AnalysisInput::new("u + 1")).unwrap();
        assert_eq!(a.summary.shape.shape, Shape::NotCovered);
        assert!(a.landmarks.is_none());
    }

    #[test]
    fn unbound_parameter_is_reported() {
        let e = analyze(&AnalysisInput::new("sigma - 1/sqrt(u)")).unwrap_err();
        assert!(e.to_string().contains("sigma"), "{e}");
    }

    #[test]
    fn log_fixture() {
        let a = analyze(&AnalysisInput::from_fixture(lookup("E1").unwrap())).unwrap();
        assert_eq!(a.summary.shape.shape, Shape::SubsetShaped);
        assert_eq!(a.summary.shape.rule_fired.as_deref(), Some("T2(ii)+G<0"));
    }
}
