//! Scalar root bracketing and bisection.

use crate::error::{Error, Result};

/// Finds `x` with `f(x) = 0` for an increasing `f`, starting from a guess and a step.
///
/// The bracket grows geometrically until it straddles the root, optionally never
/// going below `lower` (a point where `f` is known to be non-positive).
pub fn solve_increasing<F: Fn(f64) -> f64>(
    f: F,
    guess: f64,
    step: f64,
    lower: Option<f64>,
    upper: Option<f64>,
) -> Result<f64> {
    let step = if step.is_finite() && step > 0.0 {
        step
    } else {
        1.0
    };
    let clamp = |x: f64| {
        let mut x = x;
        if let Some(l) = lower {
            x = x.max(l);
        }
        if let Some(u) = upper {
            x = x.min(u);
        }
        x
    };
    let mut lo = clamp(guess - step);
    let mut hi = clamp(guess + step);
    let mut width = step;
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    let mut tries = 0;
    while !(f_lo <= 0.0) {
        if let Some(l) = lower {
            if lo <= l {
                return Err(Error::RootFinding(format!(
                    "no sign change above the lower bound {l}"
                )));
            }
        }
        width *= 2.0;
        hi = lo;
        f_hi = f_lo;
        lo = clamp(lo - width);
        f_lo = f(lo);
        tries += 1;
        if tries > 200 || f_lo.is_nan() {
            return Err(Error::RootFinding(
                "could not bracket the root from below".into(),
            ));
        }
    }
    while !(f_hi >= 0.0) {
        if let Some(u) = upper {
            if hi >= u {
                return Err(Error::RootFinding(format!(
                    "no sign change below the upper bound {u}"
                )));
            }
        }
        width *= 2.0;
        lo = hi;
        hi = clamp(hi + width);
        f_hi = f(hi);
        tries += 1;
        if tries > 400 || f_hi.is_nan() {
            return Err(Error::RootFinding(
                "could not bracket the root from above".into(),
            ));
        }
    }
    bisect(f, lo, hi)
}

/// Bisection on a bracket with `f(lo) <= 0 <= f(hi)`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let v = f(mid);
        if v.is_nan() {
            return Err(Error::RootFinding(format!("function is NaN at {mid}")));
        }
        if v == 0.0 {
            return Ok(mid);
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * lo.abs().max(hi.abs()).max(1e-10) {
            return Ok(0.5 * (lo + hi));
        }
    }
    Ok(0.5 * (lo + hi))
}
