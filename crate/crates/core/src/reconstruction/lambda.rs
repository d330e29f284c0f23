use alloc::boxed::Box;
use alloc::vec::Vec;
use core::cell::OnceCell;

use super::{FieldColumn, Fields, SignConvention};
use crate::families::{lambda_g_sign, LambdaFamily, TimeSlice};
use crate::numerics::{integrate, newton_bracketed, Tolerance};
use crate::Error;

/// Fields from `λ(t,x,g)` by the substitution `λ = λ(g)`:
/// `∫_ν^{λ(g*)} G dλ = ∫_{g_lo}^{g*} g λ_g dg`, so `v = −λ(g*)` where
/// `y + ∫_{g_lo}^{g*} g λ_g dg = 0`.
pub struct LambdaFields<'a> {
    family: &'a dyn LambdaFamily,
    conv: SignConvention,
    tol: Tolerance,
    panels: usize,
}

const DEFAULT_PANELS: usize = 32;

impl<'a> LambdaFields<'a> {
    pub fn new(family: &'a dyn LambdaFamily, conv: SignConvention, tol: Tolerance) -> Self {
        Self { family, conv, tol, panels: DEFAULT_PANELS }
    }
}

/// Cumulative `∫ gλ_g dg` and `∫ λ gλ_g dg` at equally spaced panel edges.
struct Cumulative {
    edges: Vec<f64>,
    depth: Vec<f64>,
    flux: Vec<f64>,
}

struct LambdaColumn<'a> {
    slice: Box<dyn TimeSlice + 'a>,
    x: f64,
    g_range: (f64, f64),
    panels: usize,
    tol: Tolerance,
    nu: f64,
    h: f64,
    h_t: f64,
    table: OnceCell<Result<Cumulative, Error>>,
}

impl LambdaColumn<'_> {
    fn w(&self, g: f64) -> f64 {
        g * self.slice.lambda_g(self.x, g)
    }

    fn table(&self) -> Result<&Cumulative, Error> {
        let t = self.table.get_or_init(|| {
            let (lo, hi) = self.g_range;
            let n = self.panels;
            let edges: Vec<f64> =
                (0..=n).map(|k| if k == n { hi } else { lo + (hi - lo) * k as f64 / n as f64 }).collect();
            let (mut depth, mut flux) = (alloc::vec![0.0], alloc::vec![0.0]);
            for k in 0..n {
                let d = integrate(|g| self.w(g), edges[k], edges[k + 1], &self.tol)?;
                let f = integrate(|g| self.slice.lambda(self.x, g) * self.w(g), edges[k], edges[k + 1], &self.tol)?;
                depth.push(depth[k] + d);
                flux.push(flux[k] + f);
            }
            Ok(Cumulative { edges, depth, flux })
        });
        t.as_ref().map_err(Clone::clone)
    }

    fn panel_of(&self, tab: &Cumulative, g: f64) -> usize {
        let (lo, hi) = self.g_range;
        let s = libm::floor((g - lo) / (hi - lo) * self.panels as f64);
        (s.max(0.0) as usize).min(self.panels - 1).min(tab.edges.len() - 2)
    }

    /// `∫_{g_lo}^{g} gλ_g dg`, independent of evaluation history.
    fn depth_to(&self, tab: &Cumulative, g: f64) -> f64 {
        let k = self.panel_of(tab, g);
        tab.depth[k] + integrate(|s| self.w(s), tab.edges[k], g, &self.tol).unwrap_or(f64::NAN)
    }

    fn flux_to(&self, tab: &Cumulative, g: f64) -> Result<f64, Error> {
        let k = self.panel_of(tab, g);
        let part = integrate(|s| self.slice.lambda(self.x, s) * self.w(s), tab.edges[k], g, &self.tol)?;
        Ok(tab.flux[k] + part)
    }

    /// `g*` for depth `y`: bracketed on the table panel where the depth
    /// crosses `y` and seeded by linear interpolation, so the result does
    /// not depend on earlier calls.
    fn g_star(&self, y: f64) -> Result<f64, Error> {
        let tab = self.table()?;
        let total = tab.depth[self.panels];
        let top = -total;
        if y == 0.0 {
            return Ok(self.g_range.0);
        }
        if !(y * top > 0.0 && y.abs() <= top.abs()) {
            return Err(Error::DepthExceeded { y, depth: top });
        }
        let k = (0..self.panels)
            .find(|&k| (y + tab.depth[k]) * (y + tab.depth[k + 1]) <= 0.0)
            .ok_or(Error::DepthExceeded { y, depth: top })?;
        let (a, b) = (tab.edges[k], tab.edges[k + 1]);
        let (fa, fb) = (y + tab.depth[k], y + tab.depth[k + 1]);
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 {
            return Ok(b);
        }
        let seed = a + (b - a) * fa / (fa - fb);
        let f = |g: f64| {
            let v = if g == a {
                fa
            } else if g == b {
                fb
            } else {
                y + self.depth_to(tab, g)
            };
            (v, self.w(g))
        };
        Ok(newton_bracketed(f, a, b, seed, &self.tol)?)
    }
}

impl FieldColumn for LambdaColumn<'_> {
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
        if y == 0.0 {
            return Ok(-self.nu);
        }
        let g = self.g_star(y)?;
        Ok(-self.slice.lambda(self.x, g))
    }

    fn u(&self, y: f64) -> Result<f64, Error> {
        if y == 0.0 {
            return Ok(0.0);
        }
        let g = self.g_star(y)?;
        self.flux_to(self.table()?, g)
    }
}

impl Fields for LambdaFields<'_> {
    fn column(&self, t: f64, x: f64) -> Result<Box<dyn FieldColumn + '_>, Error> {
        let slice = self.family.slice(t)?;
        let g_range = self.family.g_range();
        if lambda_g_sign(&*slice, x, g_range).is_none() {
            return Err(Error::NonMonotone { t, x });
        }
        let nu = slice.lambda(x, g_range.0);
        let col = LambdaColumn {
            slice,
            x,
            g_range,
            panels: self.panels,
            tol: self.tol,
            nu,
            h: 0.0,
            h_t: 0.0,
            table: OnceCell::new(),
        };
        let tab = col.table()?;
        let (h, h_t) = (self.conv.s_h * tab.depth[self.panels], self.conv.s_h * tab.flux[self.panels]);
        // Depth is measured downward: y = −∫ gλ_g, and h carries the chosen sign.
        Ok(Box::new(LambdaColumn { h, h_t, ..col }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{InvertedG, RationalFamily, RationalParams};
    use crate::reconstruction::MomentFields;

    fn family() -> RationalFamily {
        let p = RationalParams::parse("g", "0", 0.0, 1.0, 1.0).unwrap();
        RationalFamily::with_t_range(p, (0.5, 2.0)).unwrap()
    }

    const CONV: SignConvention = SignConvention { s_h: -1.0, s_phi: 1.0 };

    #[test]
    fn lambda_and_moment_routes_agree() {
        let fam = family();
        let tol = Tolerance::tight();
        let lf = LambdaFields::new(&fam, CONV, tol);
        let inv = InvertedG::new(&fam, tol);
        let mf = MomentFields::new(&inv, &inv, CONV, tol);
        for &(t, x) in &[(1.0, -2.0), (0.6, -1.6), (1.8, -2.4)] {
            let a = lf.column(t, x).unwrap();
            let b = mf.column(t, x).unwrap();
            assert!((a.h() - b.h()).abs() < 1e-8, "h {} vs {}", a.h(), b.h());
            assert!((a.h_t() - b.h_t()).abs() < 1e-8);
            assert!(a.h() > 0.0);
            for k in 1..5 {
                let y = a.h() * k as f64 / 5.0;
                assert!((a.v(y).unwrap() - b.v(y).unwrap()).abs() < 1e-8);
                assert!((a.u(y).unwrap() - b.u(y).unwrap()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn surface_values() {
        let fam = family();
        let lf = LambdaFields::new(&fam, CONV, Tolerance::tight());
        let c = lf.column(1.0, -2.0).unwrap();
        assert_eq!(c.v(0.0).unwrap(), -c.nu());
        assert_eq!(c.u(0.0).unwrap(), 0.0);
        // At the free surface the characteristic is μ and u = −H_t.
        let s = fam.slice(1.0).unwrap();
        let mu = s.lambda(-2.0, 1.0);
        assert!((c.v(c.h()).unwrap() + mu).abs() < 1e-10);
        assert!((c.u(c.h()).unwrap() + c.h_t()).abs() < 1e-12);
        assert!(matches!(c.v(1.01 * c.h()), Err(Error::DepthExceeded { .. })));
    }

    #[test]
    fn values_do_not_depend_on_history() {
        let fam = family();
        let lf = LambdaFields::new(&fam, CONV, Tolerance::tight());
        let a = lf.column(1.2, -1.9).unwrap();
        let b = lf.column(1.2, -1.9).unwrap();
        let y = 0.37 * a.h();
        let first = a.v(y).unwrap();
        for k in 1..20 {
            b.v(a.h() * k as f64 / 20.0).unwrap();
        }
        assert_eq!(first, b.v(y).unwrap());
    }
}
