use super::NumericsError;

/// One classical fourth-order Runge–Kutta step of `ẏ = rhs(t, y)`.
///
/// Negative `dt` integrates backwards.
pub fn rk4_step<const N: usize, F>(state: [f64; N], rhs: F, t: f64, dt: f64) -> Result<[f64; N], NumericsError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    if dt == 0.0 {
        return Err(NumericsError::ZeroStep);
    }
    let finite = |k: &[f64; N], at: f64| {
        if k.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(NumericsError::NonFinite { at })
        }
    };
    let axpy = |a: f64, k: &[f64; N]| {
        let mut out = state;
        for i in 0..N {
            out[i] += a * k[i];
        }
        out
    };
    let half = 0.5 * dt;
    let k1 = rhs(t, &state);
    finite(&k1, t)?;
    let k2 = rhs(t + half, &axpy(half, &k1));
    finite(&k2, t + half)?;
    let k3 = rhs(t + half, &axpy(half, &k2));
    finite(&k3, t + half)?;
    let k4 = rhs(t + dt, &axpy(dt, &k3));
    finite(&k4, t + dt)?;
    let mut out = state;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_single_step() {
        let y = rk4_step([1.0], |_, y| [y[0]], 0.0, 0.1).unwrap();
        assert!((y[0] - libm::exp(0.1)).abs() < 1e-7);
    }

    #[test]
    fn zero_rhs_keeps_state() {
        let y = rk4_step([3.5, -1.0], |_, _| [0.0, 0.0], 0.0, 0.25).unwrap();
        assert_eq!(y, [3.5, -1.0]);
    }

    #[test]
    fn unit_rhs_is_exact() {
        let y = rk4_step([2.0], |_, _| [1.0], 0.0, 0.5).unwrap();
        assert_eq!(y[0], 2.5);
    }

    #[test]
    fn non_finite_rhs_errors() {
        assert!(rk4_step([1.0], |_, _| [f64::NAN], 0.0, 0.1).is_err());
    }

    #[test]
    fn global_order_four() {
        let err = |n: usize| {
            let dt = 1.0 / n as f64;
            let mut y = [1.0];
            for k in 0..n {
                y = rk4_step(y, |_, y| [y[0]], k as f64 * dt, dt).unwrap();
            }
            (y[0] - core::f64::consts::E).abs()
        };
        let order = libm::log2(err(10) / err(20));
        assert!(order >= 3.9, "{order}");
    }
}
