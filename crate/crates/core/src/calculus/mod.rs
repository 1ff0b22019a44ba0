//! Numerical engine shared by the analysis modules.

mod gauss;
pub mod limit;
pub mod quad;
pub mod root;

pub use gauss::gauss_legendre;
pub use limit::{
    estimate_limit_at_infinity, estimate_limit_at_zero, LimitError, LimitEstimate, LimitKind, ProbeSpec,
};
pub use quad::{integrate, integrate_with_distances, QuadratureResult, Sign, Singular};
pub use root::{find_root, BracketedRoot, RootError};
