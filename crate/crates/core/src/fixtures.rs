//! The example nonlinearities with their published results.

use serde::Serialize;

use crate::classify::Shape;
use crate::expr::ParamBindings;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fixture {
    pub name: &'static str,
    pub summary: &'static str,
    pub f: &'static str,
    /// Closed-form antiderivative with F(0⁺) = 0, when known.
    pub big_f: Option<&'static str>,
    pub params: &'static [(&'static str, f64)],
    pub u_max: Option<f64>,
    /// Published constants for the default parameters, as display strings.
    pub expected: &'static [(&'static str, &'static str)],
}

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "E1",
        summary: "f = ln u",
        f: "ln(u)",
        big_f: Some("u*ln(u) - u"),
        params: &[],
        u_max: None,
        expected: &[("shape", "SubsetShaped"), ("eta", "e"), ("lambda_hat", "≈ 8.539"), ("kappa", "∞")],
    },
    Fixture {
        name: "E2",
        summary: "f = σu − u^(−p), 0 < p < 1",
        f: "sigma*u - u^(-p)",
        big_f: Some("sigma/2*u^2 - u^(1-p)/(1-p)"),
        params: &[("sigma", 1.0), ("p", 0.5)],
        u_max: None,
        expected: &[("shape", "MonotoneDecreasing"), ("beta2", "∞"), ("kappa", "∈ (0, ∞)")],
    },
    Fixture {
        name: "E3",
        summary: "f = σ − 1/√u",
        f: "sigma - 1/sqrt(u)",
        big_f: Some("sigma*u - 2*sqrt(u)"),
        params: &[("sigma", 1.0)],
        u_max: None,
        expected: &[
            ("shape", "MonotoneIncreasing"),
            ("eta", "4/σ²"),
            ("lambda_hat", "2π²/σ³"),
            ("G", "0"),
            ("kappa", "∞"),
        ],
    },
    Fixture {
        name: "E4",
        summary: "f = 4 − √u − 1/√u",
        f: "4 - sqrt(u) - 1/sqrt(u)",
        big_f: Some("-(2/3)*sqrt(u)*(u - 6*sqrt(u) + 3)"),
        params: &[],
        u_max: None,
        expected: &[
            ("shape", "MonotoneIncreasing"),
            ("beta1", "7−4√3"),
            ("beta2", "7+4√3"),
            ("eta", "(3−√6)²"),
            ("G", "≈ 0.1497"),
            ("lambda_hat", "≈ 0.434"),
            ("kappa", "∞"),
        ],
    },
    Fixture {
        name: "E5",
        summary: "f = −(u − a)(u − b), b > a > 0; curve exists iff 3a < b",
        f: "-(u-a)*(u-b)",
        big_f: Some("u*(-u^2/3 + (a+b)/2*u - a*b)"),
        params: &[("a", 1.0), ("b", 4.0)],
        u_max: None,
        expected: &[
            ("shape", "SubsetShaped (3a < b), CurveDoesNotExist (3a ≥ b)"),
            ("eta", "3(a+b)/4 − √(3(a−3b)(3a−b))/4"),
            ("kappa", "∞"),
            ("beta2", "b"),
        ],
    },
    Fixture {
        name: "E6",
        summary: "f = e^u − c, c > 1",
        f: "exp(u) - c",
        big_f: Some("exp(u) - 1 - c*u"),
        params: &[("c", 2.0)],
        u_max: None,
        expected: &[("shape", "MonotoneDecreasing (C2)"), ("lambda_hat", "∈ (0, ∞)"), ("kappa", "0")],
    },
    Fixture {
        name: "E7",
        summary: "f = (1 − u²)(u − 3)",
        f: "(1-u^2)*(u-3)",
        big_f: Some("u*(u-2)*(-u^2+2*u+6)/4"),
        params: &[],
        u_max: None,
        expected: &[
            ("shape", "SubsetShaped"),
            ("eta", "2"),
            ("sigma", "≈ 1.910"),
            ("lambda_hat", "≈ 3.043"),
            ("kappa", "∞"),
        ],
    },
    Fixture {
        name: "E8",
        summary: "f = −15u⁴ + 140u³ − 450u² + 540u − 138",
        f: "-15*u^4 + 140*u^3 - 450*u^2 + 540*u - 138",
        big_f: Some("-u*(3*u^4 - 35*u^3 + 150*u^2 - 270*u + 138)"),
        params: &[],
        u_max: None,
        expected: &[
            ("shape", "SubsetShaped"),
            ("beta1", "≈ 0.344"),
            ("eta", "≈ 0.814"),
            ("sigma", "≈ 0.709"),
            ("beta2", "≈ 2.551"),
            ("lambda_hat", "≈ 0.038"),
            ("kappa", "∞"),
        ],
    },
    Fixture {
        name: "E9",
        summary: "f = a + bu − ce^(−u); (i) a ≤ 0 < b, (ii) a, b > 0, (iii) a > 0 = b",
        f: "a + b*u - c*exp(-u)",
        big_f: Some("a*u + b/2*u^2 + c*(exp(-u) - 1)"),
        params: &[("a", -1.0), ("b", 1.0), ("c", 2.0)],
        u_max: None,
        expected: &[
            ("shape", "MonotoneDecreasing (i), SubsetShaped (ii), SubsetShaped (iii)"),
            ("G", "< 0"),
            ("kappa", "∈ (0, ∞) if b > 0, ∞ if b = 0"),
        ],
    },
    Fixture {
        name: "appendix-counterexample",
        summary: "f = −u² + 2.1u − 1 on (0, 1.02); T undefined for α ≤ γ",
        f: "-u^2 + 21/10*u - 1",
        big_f: Some("-u^3/3 + 21/20*u^2 - u"),
        params: &[],
        u_max: Some(1.02),
        expected: &[("gamma", "1"), ("T", "undefined on (0, γ]")],
    },
];

pub fn lookup(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name.eq_ignore_ascii_case(name))
}

impl Fixture {
    pub fn default_bindings(&self) -> ParamBindings {
        self.params.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    /// The published shape for the given parameters, when one is published.
    pub fn expected_shape(&self, b: &ParamBindings) -> Option<Shape> {
        let p = |k: &str| b.get(k).unwrap_or(f64::NAN);
        match self.name {
            "E1" | "E7" | "E8" => Some(Shape::SubsetShaped),
            "E2" | "E6" => Some(Shape::MonotoneDecreasing),
            "E3" | "E4" => Some(Shape::MonotoneIncreasing),
            "E5" if 3.0 * p("a") < p("b") => Some(Shape::SubsetShaped),
            "E5" => Some(Shape::CurveDoesNotExist),
            "E9" if p("a") <= 0.0 => Some(Shape::MonotoneDecreasing),
            "E9" => Some(Shape::SubsetShaped),
            _ => None,
        }
    }
}
