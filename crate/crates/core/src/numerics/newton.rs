use super::{NumericsError, Tolerance};

fn norm_inf(v: (f64, f64)) -> f64 {
    v.0.abs().max(v.1.abs())
}

/// Damped Newton iteration for a map `(p, q) ↦ F(p, q)` in the plane.
///
/// The Jacobian is formed by central differences. A full step that does not
/// lower `‖F‖∞` is halved up to 40 times.
pub fn newton2d<F: Fn(f64, f64) -> (f64, f64)>(
    f: F,
    guess: (f64, f64),
    tol: &Tolerance,
) -> Result<(f64, f64), NumericsError> {
    let (mut p, mut q) = guess;
    let mut val = f(p, q);
    for _ in 0..tol.max_iterations {
        let norm = norm_inf(val);
        if !norm.is_finite() {
            return Err(NumericsError::Divergence { residual: norm });
        }
        if norm <= tol.abs {
            return Ok((p, q));
        }
        let hp = 1e-6 * p.abs().max(1.0);
        let hq = 1e-6 * q.abs().max(1.0);
        let (fp1, fp0) = (f(p + hp, q), f(p - hp, q));
        let (fq1, fq0) = (f(p, q + hq), f(p, q - hq));
        let j00 = (fp1.0 - fp0.0) / (2.0 * hp);
        let j10 = (fp1.1 - fp0.1) / (2.0 * hp);
        let j01 = (fq1.0 - fq0.0) / (2.0 * hq);
        let j11 = (fq1.1 - fq0.1) / (2.0 * hq);
        let det = j00 * j11 - j01 * j10;
        let scale = (j00.abs() + j01.abs()) * (j10.abs() + j11.abs());
        if !(det.abs() > 1e-14 * scale) {
            return Err(NumericsError::SingularJacobian { det });
        }
        let dp = -(j11 * val.0 - j01 * val.1) / det;
        let dq = -(-j10 * val.0 + j00 * val.1) / det;

        let mut damp = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let (tp, tq) = (p + damp * dp, q + damp * dq);
            let tv = f(tp, tq);
            if norm_inf(tv) < norm {
                p = tp;
                q = tq;
                val = tv;
                accepted = true;
                break;
            }
            damp *= 0.5;
        }
        if !accepted {
            // Stalled at the rounding floor of F.
            let floor = 1e3 * f64::EPSILON * (1.0 + p.abs().max(q.abs()));
            if dp.abs().max(dq.abs()) <= floor {
                return Ok((p, q));
            }
            return Err(NumericsError::Divergence { residual: norm });
        }
    }
    Err(NumericsError::MaxIterations)
}
