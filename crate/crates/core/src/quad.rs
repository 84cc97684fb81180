//! Adaptive Simpson quadrature with Richardson correction.

use crate::error::{Error, Result};

/// Hard cap on interval bisection depth; reaching it is a convergence failure.
pub const MAX_DEPTH: u32 = 50;

/// Integrates `f` over `[a, b]` to within `max(abs_tol, rel_tol * |estimate|)`.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mid = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(mid);
    let fb = f(b);
    let whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0;
    let tol = abs_tol.max(rel_tol * whole.abs());
    refine(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn refine<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mid = 0.5 * (a + b);
    let lm = 0.5 * (a + mid);
    let rm = 0.5 * (mid + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (mid - a) * (fa + 4.0 * flm + fm) / 6.0;
    let right = (b - mid) * (fm + 4.0 * frm + fb) / 6.0;
    let split = left + right;
    let delta = split - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(split + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::NoConvergence {
            max_depth: MAX_DEPTH,
        });
    }
    let half_tol = 0.5 * tol;
    Ok(refine(f, a, mid, fa, flm, fm, left, half_tol, depth - 1)?
        + refine(f, mid, b, fm, frm, fb, right, half_tol, depth - 1)?)
}
