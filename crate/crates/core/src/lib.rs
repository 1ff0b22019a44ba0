//! Analysis of the bifurcation curve of positive solutions of the
//! semipositone problem −u″ = λf(u) on (−1, 1), u(±1) = 0, via the time map
//! T(α).

pub mod analysis;
pub mod calculus;
pub mod classify;
pub mod expr;
pub mod fixtures;
pub mod problem;
pub mod report;
pub mod shooting;
pub mod timemap;
pub mod tracer;

pub use analysis::{analyze, Analysis, AnalysisError, AnalysisInput};
pub use classify::{Shape, ShapeClass};
pub use tracer::{trace, CurveTrace, Spacing};
