//! Serialized outputs: the JSON analysis report, the trace CSV and the SVG
//! plot. All float formatting is fixed so output is byte-for-byte
//! reproducible.

mod json;
mod svg;

pub use json::{AnalysisReport, ErrorBar, Files, Quantity, Real, VerificationReport};
pub use svg::render_svg;

use std::fmt::Write;

use crate::tracer::CurveTrace;

pub const JSON_DIGITS: usize = 17;
pub const CSV_DIGITS: usize = 12;

/// `v` with `digits` significant digits, positional in the usual range and
/// exponential outside it.
pub fn fmt_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let e = v.abs().log10().floor() as i32;
    if (-5..16).contains(&e) {
        let decimals = (digits as i32 - 1 - e).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.prec$e}", prec = digits - 1)
    }
}

/// `alpha,T,lambda,T_prime` rows with LF endings; a missing T′ is empty.
pub fn write_csv(trace: &CurveTrace) -> String {
    let mut out = String::from("alpha,T,lambda,T_prime\n");
    for p in &trace.points {
        let tp = p.t_prime.map(|v| fmt_sig(v, CSV_DIGITS)).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_sig(p.alpha, CSV_DIGITS),
            fmt_sig(p.t, CSV_DIGITS),
            fmt_sig(p.lambda, CSV_DIGITS),
            tp
        );
    }
    out
}
