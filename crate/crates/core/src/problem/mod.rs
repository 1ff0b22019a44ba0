//! The nonlinearity bundle, its landmarks and the structural conditions
//! (P1), (P2), (H1)–(H4).

mod conditions;
mod landmarks;
mod nonlinearity;

pub use conditions::{check_conditions, ConditionReport, Diagnostic, Verdict};
pub use landmarks::{
    locate_landmarks, scan_grid, sign_changes, LandmarkError, Landmarks, SignChange, SCAN_EPS, SCAN_POINTS,
};
pub use nonlinearity::{BuildError, FMode, Nonlinearity};
