use super::{NumericsError, Tolerance};

/// Bracketed root of `f` on `[lo, hi]` (Brent: inverse quadratic and secant
/// steps safeguarded by bisection). Iterates never leave the bracket.
///
/// Terminates when `|f(r)| ≤ tol.abs` or the bracket has shrunk below
/// `tol.abs + tol.rel·|r|`.
pub fn find_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: &Tolerance) -> Result<f64, NumericsError> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let mut fb = f(b);
    if !fa.is_finite() {
        return Err(NumericsError::NonFinite { at: a });
    }
    if !fb.is_finite() {
        return Err(NumericsError::NonFinite { at: b });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(NumericsError::NoBracket { lo, hi });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..tol.max_iterations {
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
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * (tol.abs + tol.rel * b.abs());
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb.abs() <= tol.abs {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(NumericsError::NonFinite { at: b });
        }
    }
    Err(NumericsError::MaxIterations)
}

/// Newton iteration on `[lo, hi]` safeguarded by bisection. `f` returns the
/// value and derivative; `f(lo)` and `f(hi)` must differ in sign.
pub fn newton_bracketed<F: FnMut(f64) -> (f64, f64)>(
    mut f: F,
    lo: f64,
    hi: f64,
    seed: f64,
    tol: &Tolerance,
) -> Result<f64, NumericsError> {
    let (flo, _) = f(lo);
    if flo == 0.0 {
        return Ok(lo);
    }
    let (fhi, _) = f(hi);
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !flo.is_finite() || !fhi.is_finite() {
        return Err(NumericsError::NonFinite { at: if flo.is_finite() { hi } else { lo } });
    }
    if flo.signum() == fhi.signum() {
        return Err(NumericsError::NoBracket { lo, hi });
    }
    // Orient so that f(a) < 0 < f(b).
    let (mut a, mut b) = if flo < 0.0 { (lo, hi) } else { (hi, lo) };
    let mut x = if seed > lo.min(hi) && seed < lo.max(hi) { seed } else { 0.5 * (lo + hi) };
    let mut step_old = (hi - lo).abs();
    let mut step = step_old;
    let (mut fx, mut dfx) = f(x);
    for _ in 0..tol.max_iterations {
        if !fx.is_finite() {
            return Err(NumericsError::NonFinite { at: x });
        }
        if fx.abs() <= tol.abs {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let newton_ok = dfx != 0.0 && {
            let next = x - fx / dfx;
            (next - a) * (next - b) < 0.0 && (2.0 * fx).abs() <= (step_old * dfx).abs()
        };
        step_old = step;
        if newton_ok {
            step = fx / dfx;
            x -= step;
        } else {
            step = 0.5 * (b - a);
            x = a + step;
        }
        let width = tol.abs + tol.rel * x.abs() + 2.0 * f64::EPSILON * x.abs();
        if step.abs() <= width || (b - a).abs() <= width {
            return Ok(x);
        }
        (fx, dfx) = f(x);
    }
    Err(NumericsError::MaxIterations)
}

/// Marches from `start` towards `limit` with geometrically growing steps
/// until `f` changes sign, returning the sorted bracket.
pub fn expand_bracket<F: Fn(f64) -> f64>(
    f: F,
    start: f64,
    step: f64,
    limit: f64,
    max_steps: usize,
) -> Result<(f64, f64), NumericsError> {
    if step == 0.0 {
        return Err(NumericsError::ZeroStep);
    }
    let dir = (limit - start).signum();
    let mut s = step.abs() * dir;
    let mut a = start;
    let mut fa = f(a);
    if !fa.is_finite() {
        return Err(NumericsError::NonFinite { at: a });
    }
    if fa == 0.0 {
        return Ok((a, a));
    }
    for _ in 0..max_steps {
        let mut b = a + s;
        if (b - limit) * dir >= 0.0 {
            b = limit;
        }
        let fb = f(b);
        if !fb.is_finite() {
            return Err(NumericsError::NonFinite { at: b });
        }
        if fb == 0.0 || fb.signum() != fa.signum() {
            return Ok(if a < b { (a, b) } else { (b, a) });
        }
        if b == limit {
            break;
        }
        a = b;
        fa = fb;
        s *= 2.0;
    }
    Err(NumericsError::NoBracket { lo: start.min(limit), hi: start.max(limit) })
}
