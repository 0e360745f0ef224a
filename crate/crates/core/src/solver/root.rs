//! Bracketed scalar root finding along a monotone solution path.
//!
//! Every estimator here that tunes a penalty (TV-ball projection, the
//! tuning-free residual match, the cone multiplier) evaluates one expensive
//! proximal solve per probe. The bracket is kept valid at every step; probes
//! use the Illinois variant of regula falsi, with a midpoint step whenever the
//! bracket fails to halve twice in a row.

use crate::error::Result;

pub(crate) struct Probe<T> {
    pub(crate) fx: f64,
    pub(crate) payload: T,
}

pub(crate) enum RootOutcome<T> {
    Found(Probe<T>),
    /// Step budget exhausted; carries the probe with the smallest `|f|`.
    Exhausted(Option<Probe<T>>),
}

/// Searches `(lo, hi)` for `|f(x)| ≤ tol`, where `f_lo` and `f_hi` are the
/// values at the bracket ends and have opposite signs.
pub(crate) fn find_root<T>(
    (mut lo, mut f_lo): (f64, f64),
    (mut hi, mut f_hi): (f64, f64),
    tol: f64,
    max_steps: usize,
    mut eval: impl FnMut(f64) -> Result<(f64, T)>,
) -> Result<RootOutcome<T>> {
    debug_assert!(f_lo.signum() != f_hi.signum());
    let lo_sign = f_lo.signum();
    // Weighted copies of the end values for the Illinois update.
    let (mut g_lo, mut g_hi) = (f_lo, f_hi);
    let mut last_side = 0i8;
    let mut slow_steps = 0;
    let mut best: Option<Probe<T>> = None;

    for _ in 0..max_steps {
        let width = hi - lo;
        let mut x = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        if slow_steps >= 2 || !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
            slow_steps = 0;
        }
        let (fx, payload) = eval(x)?;
        let probe = Probe { fx, payload };
        if fx.abs() <= tol {
            return Ok(RootOutcome::Found(probe));
        }
        if fx.signum() == lo_sign {
            lo = x;
            f_lo = fx;
            g_lo = fx;
            if last_side == -1 {
                g_hi *= 0.5;
            }
            last_side = -1;
        } else {
            hi = x;
            f_hi = fx;
            g_hi = fx;
            if last_side == 1 {
                g_lo *= 0.5;
            }
            last_side = 1;
        }
        if hi - lo > 0.5 * width {
            slow_steps += 1;
        } else {
            slow_steps = 0;
        }
        if best.as_ref().is_none_or(|b| probe.fx.abs() < b.fx.abs()) {
            best = Some(probe);
        }
    }
    let _ = (f_lo, f_hi);
    Ok(RootOutcome::Exhausted(best))
}

/// Roots of a function that is positive at `0` (with value `f0`) and turns
/// negative somewhere on `(0, ∞)`: doubles from `start` to bracket the sign
/// change, then refines with [`find_root`]. Each phase gets `max_steps` probes.
pub(crate) fn search_from_zero<T>(
    f0: f64,
    start: f64,
    tol: f64,
    max_steps: usize,
    mut eval: impl FnMut(f64) -> Result<(f64, T)>,
) -> Result<RootOutcome<T>> {
    let mut lo = (0.0, f0);
    let mut x = start;
    let mut best: Option<Probe<T>> = None;
    for _ in 0..max_steps {
        let (fx, payload) = eval(x)?;
        let probe = Probe { fx, payload };
        if fx.abs() <= tol {
            return Ok(RootOutcome::Found(probe));
        }
        if fx < 0.0 {
            return match find_root(lo, (x, fx), tol, max_steps, &mut eval)? {
                RootOutcome::Exhausted(None) => Ok(RootOutcome::Exhausted(Some(probe))),
                RootOutcome::Exhausted(Some(b)) if b.fx.abs() > probe.fx.abs() => Ok(RootOutcome::Exhausted(Some(probe))),
                other => Ok(other),
            };
        }
        lo = (x, fx);
        x *= 2.0;
        best = Some(probe);
    }
    Ok(RootOutcome::Exhausted(best))
}
