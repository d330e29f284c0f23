use alloc::boxed::Box;
use core::cell::Cell;

use super::{FieldColumn, Fields, SignConvention};
use crate::families::{BoundaryPair, Distribution, DistributionColumn};
use crate::numerics::{expand_bracket, find_root, integrate, NumericsError, Tolerance};
use crate::Error;

const BRACKET_STEPS: usize = 200;
const UNBOUNDED: f64 = 1e12;

/// `v` with `y + ∫_ν^{−v} G dλ = 0`, searching outward from `seed` (a guess
/// for `−v`). At `y = 0` this is exactly `−ν`.
pub fn solve_v_column(
    col: &dyn DistributionColumn,
    nu: f64,
    y: f64,
    seed: f64,
    tol: &Tolerance,
    (t, x): (f64, f64),
) -> Result<f64, Error> {
    if y == 0.0 {
        return Ok(-nu);
    }
    let g = |l: f64| col.g(l).unwrap_or(f64::NAN);
    let range = col.range();
    // When ν is an end of a bounded range the search runs toward the other
    // end; otherwise the side follows the sign of G next to ν.
    let end_point = range.filter(|&(lo, hi)| {
        let eps = 1e-12 * (1.0 + nu.abs() + (hi - lo).abs());
        (nu - lo).abs() <= eps || (hi - nu).abs() <= eps
    });
    let (up, g_sign) = match end_point {
        Some((lo, hi)) => {
            let other = if (nu - lo).abs() <= (nu - hi).abs() { hi } else { lo };
            let up = other > nu;
            let s = g(0.5 * (nu + other)).signum();
            if up != (s == -y.signum()) {
                let depth = -integrate(g, nu, other, tol).unwrap_or(f64::NAN);
                return Err(Error::DepthExceeded { y, depth });
            }
            (up, s)
        }
        None => {
            let g0 = g(nu);
            let s = if g0 != 0.0 {
                g0.signum()
            } else {
                let d = 1e-6 * (1.0 + nu.abs());
                let (a, b) = (g(nu + d), g(nu - d));
                if a != 0.0 {
                    a.signum()
                } else {
                    -b.signum()
                }
            };
            (s == -y.signum(), s)
        }
    };
    if !g_sign.is_finite() || g_sign == 0.0 {
        return Err(Error::SignChange { t, x });
    }
    let limit = match range {
        Some((lo, hi)) => {
            if up {
                hi
            } else {
                lo
            }
        }
        None => {
            if up {
                nu + UNBOUNDED
            } else {
                nu - UNBOUNDED
            }
        }
    };
    // G clipped to its sign next to ν keeps `f` monotone, so bracket
    // expansion cannot step over a root pair past a zero of G.
    let clipped = |l: f64| {
        let v = g(l);
        if v * g_sign < 0.0 {
            0.0
        } else {
            v
        }
    };
    let f = |w: f64| match integrate(clipped, nu, w, tol) {
        Ok(i) => y + i,
        Err(_) => f64::NAN,
    };
    let beyond = |w: f64| if up { w > nu } else { w < nu };
    let start = if beyond(seed) && (seed - limit) * (nu - limit) > 0.0 { seed } else { nu };
    let bracket = if start != nu && f(start).signum() != y.signum() {
        (start.min(nu), start.max(nu))
    } else {
        let step = (1e-2 * (1.0 + nu.abs())).max(0.5 * (start - nu).abs());
        expand_bracket(f, start, step, limit, BRACKET_STEPS).map_err(|e| match e {
            NumericsError::NoBracket { .. } => {
                let depth = -integrate(clipped, nu, limit, tol).unwrap_or(f64::NAN);
                Error::DepthExceeded { y, depth }
            }
            e => Error::Numerics(e),
        })?
    };
    let w = find_root(f, bracket.0, bracket.1, tol)?;
    if g(w).signum() == -g_sign || g(0.5 * (nu + w)).signum() != g_sign {
        return Err(Error::SignChange { t, x });
    }
    Ok(-w)
}

/// [`solve_v_column`] on the column of `dist` at `(t, x)`.
pub fn solve_v(
    dist: &dyn Distribution,
    nu: f64,
    t: f64,
    x: f64,
    y: f64,
    seed: f64,
    tol: &Tolerance,
) -> Result<f64, Error> {
    solve_v_column(&*dist.column(t, x)?, nu, y, seed, tol, (t, x))
}

/// `u = ∫_ν^{−v} λ G dλ`.
pub fn compute_u(dist: &dyn Distribution, nu: f64, v: f64, t: f64, x: f64, tol: &Tolerance) -> Result<f64, Error> {
    let col = dist.column(t, x)?;
    column_u(&*col, nu, v, tol)
}

fn column_u(col: &dyn DistributionColumn, nu: f64, v: f64, tol: &Tolerance) -> Result<f64, Error> {
    Ok(integrate(|l| l * col.g(l).unwrap_or(f64::NAN), nu, -v, tol)?)
}

/// `h = s_h ∫_ν^μ G dλ`; zero when the pair has no `μ`.
pub fn compute_h(
    dist: &dyn Distribution,
    pair: &dyn BoundaryPair,
    conv: SignConvention,
    t: f64,
    x: f64,
    tol: &Tolerance,
) -> Result<f64, Error> {
    let (nu, mu) = pair.boundary(t, x)?;
    let Some(mu) = mu else { return Ok(0.0) };
    let col = dist.column(t, x)?;
    Ok(conv.s_h * integrate(|l| col.g(l).unwrap_or(f64::NAN), nu, mu, tol)?)
}

/// Fields from a distribution function and its boundary pair.
pub struct MomentFields<'a> {
    dist: &'a dyn Distribution,
    pair: &'a dyn BoundaryPair,
    conv: SignConvention,
    tol: Tolerance,
}

impl<'a> MomentFields<'a> {
    pub fn new(dist: &'a dyn Distribution, pair: &'a dyn BoundaryPair, conv: SignConvention, tol: Tolerance) -> Self {
        Self { dist, pair, conv, tol }
    }
}

struct MomentColumn<'a> {
    col: Box<dyn DistributionColumn + 'a>,
    t: f64,
    x: f64,
    nu: f64,
    h: f64,
    h_t: f64,
    tol: Tolerance,
    /// Last `(y, −v)`.
    seed: Cell<(f64, f64)>,
}

impl FieldColumn for MomentColumn<'_> {
    fn nu(&self) -> f64 {
        self.nu
    }
    fn h(&self) -> f64 {
        self.h
    }
    fn h_t(&self) -> f64 {
        self.h_t
    }

    fn v(&self, y: f64) -> Result<f64, Error> {
        let (_, w) = self.seed.get();
        let v = solve_v_column(&*self.col, self.nu, y, w, &self.tol, (self.t, self.x))?;
        self.seed.set((y, -v));
        Ok(v)
    }

    fn u(&self, y: f64) -> Result<f64, Error> {
        let v = self.v(y)?;
        column_u(&*self.col, self.nu, v, &self.tol)
    }
}

impl Fields for MomentFields<'_> {
    fn column(&self, t: f64, x: f64) -> Result<Box<dyn FieldColumn + '_>, Error> {
        let (nu, mu) = self.pair.boundary(t, x)?;
        let col = self.dist.column(t, x)?;
        let (h, h_t) = match mu {
            Some(mu) => {
                let g = |l: f64| col.g(l).unwrap_or(f64::NAN);
                let h = integrate(g, nu, mu, &self.tol)?;
                let ht = integrate(|l| l * g(l), nu, mu, &self.tol)?;
                (self.conv.s_h * h, self.conv.s_h * ht)
            }
            None => (0.0, 0.0),
        };
        Ok(Box::new(MomentColumn { col, t, x, nu, h, h_t, tol: self.tol, seed: Cell::new((0.0, nu)) }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::Provenance;

    struct Fixed<F>(F, Option<(f64, f64)>);

    impl<F: Fn(f64) -> f64 + Sync> DistributionColumn for &Fixed<F> {
        fn g(&self, l: f64) -> Result<f64, Error> {
            Ok((self.0)(l))
        }
        fn range(&self) -> Option<(f64, f64)> {
            self.1
        }
    }

    impl<F: Fn(f64) -> f64 + Sync> Distribution for Fixed<F> {
        fn column(&self, _t: f64, _x: f64) -> Result<Box<dyn DistributionColumn + '_>, Error> {
            Ok(Box::new(self))
        }
        fn provenance(&self) -> Provenance {
            Provenance::Constant
        }
    }

    struct Pair(f64, f64);

    impl BoundaryPair for Pair {
        fn boundary(&self, _t: f64, _x: f64) -> Result<(f64, Option<f64>), Error> {
            Ok((self.0, Some(self.1)))
        }
    }

    fn tol() -> Tolerance {
        Tolerance::tight()
    }

    #[test]
    fn constant_g_gives_linear_profile() {
        let d = Fixed(|_| -0.25, None);
        let v = solve_v(&d, 1.0, 0.0, 0.0, 0.5, 1.0, &tol()).unwrap();
        assert!((v + 3.0).abs() < 1e-12);
        let u = compute_u(&d, 1.0, v, 0.0, 0.0, &tol()).unwrap();
        assert!((u + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_depth_is_minus_nu() {
        let d = Fixed(|l| l, None);
        assert_eq!(solve_v(&d, 1.3, 0.0, 0.0, 0.0, 7.0, &tol()).unwrap(), -1.3);
        assert_eq!(compute_u(&d, 1.3, -1.3, 0.0, 0.0, &tol()).unwrap(), 0.0);
    }

    #[test]
    fn linear_g_closed_form() {
        let d = Fixed(|l| l, None);
        let v = solve_v(&d, 1.0, 0.0, 0.0, 0.375, 1.0, &tol()).unwrap();
        assert!((v + 0.5).abs() < 1e-12);
        let u = compute_u(&d, 1.0, -0.5, 0.0, 0.0, &tol()).unwrap();
        assert!((u + 0.875 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn depth_from_constant_g() {
        let d = Fixed(|_| -0.25, None);
        let conv = SignConvention { s_h: -1.0, s_phi: 1.0 };
        let h = compute_h(&d, &Pair(1.0, 2.0), conv, 0.0, 0.0, &tol()).unwrap();
        assert!((h - 0.25).abs() < 1e-14);
        let h = compute_h(&d, &Pair(1.0, 1.0), conv, 0.0, 0.0, &tol()).unwrap();
        assert_eq!(h, 0.0);
    }

    #[test]
    fn round_trip_with_seeds() {
        let d = Fixed(|l: f64| 0.3 + l * l, None);
        let nu = -0.4;
        let g = |l: f64| 0.3 + l * l;
        let mut seed = -nu;
        for k in 1..40 {
            let y = 0.02 * k as f64;
            let v = solve_v(&d, nu, 0.0, 0.0, y, seed, &tol()).unwrap();
            let r = y + integrate(g, nu, -v, &tol()).unwrap();
            assert!(r.abs() < 1e-12, "y={y}: {r}");
            seed = -v;
        }
    }

    #[test]
    fn depth_beyond_range_is_reported() {
        let d = Fixed(|_| -0.25, Some((1.0, 2.0)));
        let err = solve_v(&d, 1.0, 0.0, 0.0, 0.5, 1.0, &tol()).unwrap_err();
        assert!(matches!(err, Error::DepthExceeded { .. }));
        assert!((solve_v(&d, 1.0, 0.0, 0.0, 0.2, 1.0, &tol()).unwrap() + 1.8).abs() < 1e-12);
    }

    #[test]
    fn sign_change_of_g_is_rejected() {
        // G > 0 near ν but the root lies past a zero of G.
        let d = Fixed(|l: f64| l - 0.5, Some((0.0, 1.0)));
        assert!(solve_v(&d, 0.0, 0.0, 0.0, 0.1, 0.0, &tol()).is_err());
    }

    #[test]
    fn interior_nu_searches_by_local_sign() {
        // G = λ: positive at ν = 1, negative over most of the range below.
        let d = Fixed(|l: f64| l, Some((-20.0, 20.0)));
        let v = solve_v(&d, 1.0, 0.0, 0.0, 0.375, 1.0, &tol()).unwrap();
        assert!((v + 0.5).abs() < 1e-12);
    }

    #[test]
    fn expansion_does_not_skip_past_zero_of_g() {
        let d = Fixed(|l: f64| l, None);
        let v = solve_v(&d, 1.0, 0.0, 0.0, 0.49, 1.0, &tol()).unwrap();
        assert!((v + 0.02f64.sqrt()).abs() < 1e-12);
        assert!(matches!(solve_v(&d, 1.0, 0.0, 0.0, 0.51, 1.0, &tol()), Err(Error::DepthExceeded { .. })));
    }
}
