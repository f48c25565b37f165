//! Small scalar root-finding helper shared by the analysis modules.

/// Bracketed root finder: bisection with secant acceleration.
///
/// `f(lo)` and `f(hi)` must have opposite signs. Iterates until the bracket
/// shrinks below `xtol`, `|f|` drops below `ftol` (when given), or
/// `max_iter` is reached. Returns the best abscissa, or `None` when the
/// initial bracket carries no sign change.
pub(crate) fn bracketed_root<F>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    ftol: Option<f64>,
    max_iter: usize,
) -> Option<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    let mut best = if flo.abs() < fhi.abs() { (lo, flo) } else { (hi, fhi) };
    for _ in 0..max_iter {
        // secant proposal, falling back to the midpoint when it leaves the
        // bracket or makes no progress
        let mut x = hi - fhi * (hi - lo) / (fhi - flo);
        let width = hi - lo;
        if !x.is_finite() || x <= lo + 0.01 * width || x >= hi - 0.01 * width {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx == 0.0 || ftol.map(|t| fx.abs() < t).unwrap_or(false) {
            return Some(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        if hi - lo < xtol {
            return Some(best.0);
        }
    }
    Some(best.0)
}

/// Outcome of [`scan_root`].
#[derive(Debug)]
pub(crate) enum ScanRoot {
    /// A point where `|f|` dropped below the requested tolerance.
    Root { x: f64 },
    /// No sign change anywhere on the scan grid.
    NoSignChange,
    /// A bracket was found but the refinement stalled above tolerance.
    NoConvergence,
}

/// Scan `[lo, hi]` on a uniform grid for a sign change of a fallible
/// function, then refine the first bracket found by bisection with secant
/// acceleration until `|f| < ftol`. Evaluation errors abort the search.
pub(crate) fn scan_root<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    lo: f64,
    hi: f64,
    scan_points: usize,
    ftol: f64,
    max_iter: usize,
) -> Result<ScanRoot, E> {
    let mut a = lo;
    let mut fa = f(a)?;
    if fa.abs() < ftol {
        return Ok(ScanRoot::Root { x: a });
    }
    let mut bracket = None;
    for i in 1..=scan_points {
        let b = lo + (hi - lo) * i as f64 / scan_points as f64;
        let fb = f(b)?;
        if fb.abs() < ftol {
            return Ok(ScanRoot::Root { x: b });
        }
        if fa.signum() != fb.signum() {
            bracket = Some((a, fa, b, fb));
            break;
        }
        a = b;
        fa = fb;
    }
    let Some((mut a, mut fa, mut b, mut fb)) = bracket else {
        return Ok(ScanRoot::NoSignChange);
    };
    let mut best = (a, fa.abs());
    for _ in 0..max_iter {
        let mut x = b - fb * (b - a) / (fb - fa);
        let width = b - a;
        if !x.is_finite() || x <= a + 0.01 * width || x >= b - 0.01 * width {
            x = 0.5 * (a + b);
        }
        let fx = f(x)?;
        if fx.abs() < best.1 {
            best = (x, fx.abs());
        }
        if fx.abs() < ftol {
            return Ok(ScanRoot::Root { x });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    Ok(ScanRoot::NoConvergence)
}
