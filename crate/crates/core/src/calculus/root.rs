//! Bracketed scalar root finding (Brent's method).

use thiserror::Error;

const MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketedRoot {
    pub root: f64,
    pub bracket: (f64, f64),
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {flo}, f(hi) = {fhi}")]
    NoSignChange { lo: f64, hi: f64, flo: f64, fhi: f64 },
    #[error("function not finite at {0}")]
    NotFinite(f64),
    #[error("no convergence after {MAX_ITER} iterations; best bracket [{}, {}]", .bracket.0, .bracket.1)]
    MaxIterations { bracket: (f64, f64) },
}

/// Finds a root of `f` in `[lo, hi]` until the bracket is narrower than
/// `tol·(1 + |root|)`.
pub fn find_root(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<BracketedRoot, RootError> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    for (x, v) in [(a, fa), (b, fb)] {
        if !v.is_finite() {
            return Err(RootError::NotFinite(x));
        }
    }
    if fa == 0.0 {
        return Ok(BracketedRoot { root: a, bracket: (a, a), residual: 0.0 });
    }
    if fb == 0.0 {
        return Ok(BracketedRoot { root: b, bracket: (b, b), residual: 0.0 });
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoSignChange { lo, hi, flo: fa, fhi: fb });
    }

    // b is the best iterate, a the previous one, c the contrapoint with
    // f(c) of opposite sign to f(b).
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 0.5 * tol * (1.0 + b.abs()) + f64::EPSILON * b.abs();
        let m = 0.5 * (c - b);
        if m.abs() <= tol1 || fb == 0.0 {
            let bracket = if b < c { (b, c) } else { (c, b) };
            return Ok(BracketedRoot { root: b, bracket, residual: fb });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(RootError::NotFinite(b));
        }
    }
    let bracket = if b < c { (b, c) } else { (c, b) };
    Err(RootError::MaxIterations { bracket })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let r = find_root(|u| u * u - 2.0, 1.0, 2.0, 1e-12).unwrap();
        assert!((r.root - 2f64.sqrt()).abs() < 1e-12);
        assert!(r.bracket.1 - r.bracket.0 <= 1e-12 * (1.0 + r.root));
    }

    #[test]
    fn zero_of_u_ln_u_minus_u_is_e() {
        let r = find_root(|u| u * u.ln() - u, 1.0, 5.0, 1e-12).unwrap();
        assert!((r.root - std::f64::consts::E).abs() < 1e-10);
    }

    #[test]
    fn exp_fixture_matches_bisection_oracle() {
        // 200-step bisection reference.
        let r = find_root(|u| u.exp() - 2.0 * u - 1.0, 1.0, 2.0, 1e-12).unwrap();
        assert!((r.root - 1.256_431_208_626_169_7).abs() < 1e-10);
        assert!((r.root - 1.2564).abs() < 1e-4);
    }

    #[test]
    fn missing_sign_change() {
        assert!(matches!(find_root(|u| u * u + 1.0, -1.0, 1.0, 1e-12), Err(RootError::NoSignChange { .. })));
    }

    #[test]
    fn bracket_keeps_sign_change() {
        let f = |u: f64| (u - 0.3).powi(3);
        let r = find_root(f, 0.0, 1.0, 1e-12).unwrap();
        let (lo, hi) = r.bracket;
        assert!(f(lo) * f(hi) <= 0.0);
    }
}
