//! Principal real branch of the Lambert W function on `[0, inf)`.
//!
//! `W(x)` is the unique `w >= 0` with `w * e^w = x`. The solver starts from
//! the logarithmic bracket (for `x >= e`) or a short series (near zero) and
//! refines with Halley's cubic iteration.

use serde::Serialize;

use crate::error::{domain, Error, Result};

const MAX_ITERATIONS: usize = 50;

/// Result of a Lambert W evaluation together with its defining-identity residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambertEval {
    pub x: f64,
    pub w: f64,
    /// `|w e^w - x|`
    pub residual: f64,
}

/// Residual tolerance used for convergence: `1e-12 * max(1, x)`.
pub fn residual_tolerance(x: f64) -> f64 {
    1e-12 * x.max(1.0)
}

/// `W(x)` for `x >= 0`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    lambert_w0_eval(x).map(|e| e.w)
}

pub fn lambert_w0_eval(x: f64) -> Result<LambertEval> {
    if !x.is_finite() || x < 0.0 {
        return Err(domain("lambert_w0", format!("x must be finite and >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(LambertEval {
            x,
            w: 0.0,
            residual: 0.0,
        });
    }

    let mut w = initial_guess(x);
    let tol = residual_tolerance(x);
    for _ in 0..MAX_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = w - step;
        // W is positive for positive x; a wild step is pulled back halfway
        w = if next > 0.0 { next } else { 0.5 * w };
        if step.abs() <= 2.0 * f64::EPSILON * w.abs() {
            break;
        }
    }

    let residual = (w * w.exp() - x).abs();
    if residual > tol || !w.is_finite() {
        return Err(Error::Convergence {
            op: "lambert_w0",
            iterations: MAX_ITERATIONS,
            residual,
        });
    }
    Ok(LambertEval { x, w, residual })
}

fn initial_guess(x: f64) -> f64 {
    if x >= std::f64::consts::E {
        let (lo, hi) = bracket_unchecked(x);
        0.5 * (lo + hi)
    } else if x < 0.25 {
        // Taylor series at zero
        x * (1.0 - x * (1.0 - x * (1.5 - x * 8.0 / 3.0)))
    } else {
        (1.0 + x).ln() * 0.75
    }
}

fn bracket_unchecked(x: f64) -> (f64, f64) {
    let lx = x.ln();
    let llx = lx.ln();
    (lx - llx, lx - 0.5 * llx)
}

/// Logarithmic bracket `ln x - ln ln x <= W(x) <= ln x - ln ln x / 2`, valid for `x >= e`.
///
/// All three quantities coincide at `x = e`.
pub fn lambert_bracket(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() || x < std::f64::consts::E {
        return Err(domain("lambert_bracket", format!("x must be >= e, got {x}")));
    }
    Ok(bracket_unchecked(x))
}
