//! Adaptive Simpson quadrature with an evaluation budget.
//!
//! Integrands here are smooth after the substitutions done by callers, so
//! plain Simpson with Richardson-style error control is enough. The first
//! few levels always subdivide, so localized mass cannot slip between the
//! initial sample points, and refinement stops at a small relative noise
//! floor so evaluation noise in the integrand cannot force unbounded
//! subdivision.

use crate::error::{Error, Result};

/// Relative scale below which interval refinement is considered converged;
/// sized to the evaluation noise of the special functions used in
/// integrands (~1e-13 absolute).
const NOISE_FLOOR: f64 = 5e-13;

/// Levels of unconditional subdivision (2^FORCED_LEVELS base panels).
const FORCED_LEVELS: u32 = 4;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Fails with [`Error::QuadratureNonConvergence`] if the subdivision budget
/// is exhausted before the tolerance is met.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || !(tol > 0.0) {
        return Err(Error::QuadratureNonConvergence(format!(
            "bad interval [{a}, {b}] or tolerance {tol}"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut budget: u64 = 4_000_000;
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(
        f,
        a,
        fa,
        b,
        fb,
        m,
        fm,
        whole,
        tol,
        60,
        FORCED_LEVELS,
        &mut budget,
    )
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    force: u32,
    budget: &mut u64,
) -> Result<f64> {
    if *budget < 2 {
        return Err(Error::QuadratureNonConvergence(format!(
            "evaluation budget exhausted on [{a}, {b}]"
        )));
    }
    *budget -= 2;
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // Interval so narrow that the midpoint is no longer distinct: accept.
    if depth == 0 || lm <= a || rm >= b {
        return Ok(left + right + delta / 15.0);
    }
    // Acceptance: the Richardson estimate meets the tolerance, or the
    // discrepancy is at the evaluation-noise scale, either relative to the
    // local integral or in absolute terms per unit length. Without the
    // noise floors, integrand noise (~1e-15 absolute from the special
    // functions) halves in lockstep with the halving tolerance and
    // subdivision never terminates.
    if force == 0
        && (delta.abs() <= 15.0 * tol
            || delta.abs() <= NOISE_FLOOR * (left.abs() + right.abs())
            || delta.abs() <= 1e-13 * (b - a).abs())
    {
        return Ok(left + right + delta / 15.0);
    }
    let half = 0.5 * tol;
    let next_force = force.saturating_sub(1);
    let l = recurse(f, a, fa, m, fm, lm, flm, left, half, depth - 1, next_force, budget)?;
    let r = recurse(f, m, fm, b, fb, rm, frm, right, half, depth - 1, next_force, budget)?;
    Ok(l + r)
}
