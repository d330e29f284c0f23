use alloc::boxed::Box;
use alloc::vec;
#[cfg(test)]
use alloc::vec::Vec;

use super::{probes, Norms, ResidualReport};
use crate::numerics::GridSpec;
use crate::reconstruction::{FieldColumn, Fields};
use crate::Error;

type Column<'a> = Box<dyn FieldColumn + 'a>;

pub(crate) fn check_dim(grid: &GridSpec, dim: usize, what: &'static str) -> Result<(), Error> {
    if grid.dim() != dim {
        return Err(Error::invalid("grid", what));
    }
    Ok(())
}

/// `∫₀^y v dy'` by the midpoint rule in `s` with `y' = s²`, which keeps the
/// rule second order when `v` is only smooth in `y` up to the bed.
fn depth_integral(col: &dyn FieldColumn, y: f64, n: usize) -> Result<f64, Error> {
    if y == 0.0 {
        return Ok(0.0);
    }
    let sign = y.signum();
    let ds = libm::sqrt(y.abs()) / n as f64;
    let mut acc = 0.0;
    for k in 0..n {
        let s = (k as f64 + 0.5) * ds;
        acc += col.v(sign * s * s)? * 2.0 * s;
    }
    Ok(sign * acc * ds)
}

/// The five columns of a `(t, x)` cross stencil.
struct Cross<'a> {
    c: Column<'a>,
    tp: Column<'a>,
    tm: Column<'a>,
    xp: Column<'a>,
    xm: Column<'a>,
}

impl<'a> Cross<'a> {
    fn new(fields: &'a dyn Fields, t: f64, x: f64, dt: f64, dx: f64) -> Result<Self, Error> {
        Ok(Self {
            c: fields.column(t, x)?,
            tp: fields.column(t + dt, x)?,
            tm: fields.column(t - dt, x)?,
            xp: fields.column(t, x + dx)?,
            xm: fields.column(t, x - dx)?,
        })
    }
}

fn momentum(s: &Cross, y: f64, (dt, dx, dy): (f64, f64, f64), n: usize) -> Result<f64, Error> {
    let v = s.c.v(y)?;
    let v_t = (s.tp.v(y)? - s.tm.v(y)?) / (2.0 * dt);
    let v_x = (s.xp.v(y)? - s.xm.v(y)?) / (2.0 * dx);
    let v_y = (s.c.v(y + dy)? - s.c.v(y - dy)?) / (2.0 * dy);
    let w = (depth_integral(&*s.xp, y, n)? - depth_integral(&*s.xm, y, n)?) / (2.0 * dx);
    let h_x = (s.xp.h() - s.xm.h()) / (2.0 * dx);
    Ok(v_t + v * v_x - w * v_y + h_x)
}

fn mass(s: &Cross, (dt, dx): (f64, f64), n: usize) -> Result<f64, Error> {
    let h_t = (s.tp.h() - s.tm.h()) / (2.0 * dt);
    let q = (depth_integral(&*s.xp, s.xp.h(), n)? - depth_integral(&*s.xm, s.xm.h(), n)?) / (2.0 * dx);
    Ok(h_t + q)
}

/// Residuals of the Benney system on a `(t, x, y)` grid:
///
/// ```text
/// benney_momentum = v_t + v v_x − (∫₀^y v_x dy') v_y + h_x
/// benney_mass     = h_t + ∂_x ∫₀^h v dy
/// ```
///
/// Derivatives are central differences with the grid spacings; depth
/// integrals use as many intervals as the `y` axis.
pub fn benney_residual(fields: &dyn Fields, grid: &GridSpec, per_axis: usize) -> Result<ResidualReport, Error> {
    check_dim(grid, 3, "the Benney residual needs a (t, x, y) grid")?;
    let steps = (grid.spacing(0), grid.spacing(1), grid.spacing(2));
    let n = grid.axis(2).count - 1;
    let (mut r1, mut r2) = (Norms::default(), Norms::default());
    let mut last_column = None;
    for p in probes(grid, per_axis)? {
        let (t, x, y) = (p[0], p[1], p[2]);
        let stencil = Cross::new(fields, t, x, steps.0, steps.1);
        let fresh = last_column != Some((t, x));
        last_column = Some((t, x));
        match stencil {
            Ok(s) => {
                r1.push(momentum(&s, y, steps, n));
                if fresh {
                    r2.push(mass(&s, (steps.0, steps.1), n));
                }
            }
            Err(e) => {
                if fresh {
                    r2.push(Err(e.clone()));
                }
                r1.push(Err(e));
            }
        }
    }
    Ok(ResidualReport { entries: vec![r1.entry("benney_momentum"), r2.entry("benney_mass")] })
}

fn substituted_interior(s: &Cross, y: f64, (dt, dx, dy): (f64, f64, f64)) -> Result<f64, Error> {
    let (yp, ym) = (y + dy, y - dy);
    let u_ty = (s.tp.u(yp)? - s.tp.u(ym)? - s.tm.u(yp)? + s.tm.u(ym)?) / (4.0 * dt * dy);
    let u_xy = (s.xp.u(yp)? - s.xp.u(ym)? - s.xm.u(yp)? + s.xm.u(ym)?) / (4.0 * dx * dy);
    let (up, u0, um) = (s.c.u(yp)?, s.c.u(y)?, s.c.u(ym)?);
    let u_y = (up - um) / (2.0 * dy);
    let u_yy = (up - 2.0 * u0 + um) / (dy * dy);
    let u_x = (s.xp.u(y)? - s.xm.u(y)?) / (2.0 * dx);
    let h_xx = (s.xp.h() - s.xm.h()) / (2.0 * dx);
    Ok(u_ty + u_y * u_xy - u_x * u_yy + h_xx)
}

/// Residuals of the single equation for `u` with `v = u_y`:
///
/// ```text
/// substituted_interior = u_ty + u_y u_xy − u_x u_yy + H_xx
/// substituted_bed      = u(t, x, 0)
/// substituted_surface  = u(t, x, h) + H_t
/// ```
pub fn substituted_residual(fields: &dyn Fields, grid: &GridSpec, per_axis: usize) -> Result<ResidualReport, Error> {
    check_dim(grid, 3, "the substituted residual needs a (t, x, y) grid")?;
    let steps = (grid.spacing(0), grid.spacing(1), grid.spacing(2));
    let (mut interior, mut bed, mut surface) = (Norms::default(), Norms::default(), Norms::default());
    let mut last_column = None;
    for p in probes(grid, per_axis)? {
        let (t, x, y) = (p[0], p[1], p[2]);
        let fresh = last_column != Some((t, x));
        last_column = Some((t, x));
        match Cross::new(fields, t, x, steps.0, steps.1) {
            Ok(s) => {
                interior.push(substituted_interior(&s, y, steps));
                if fresh {
                    bed.push(s.c.u(0.0));
                    surface.push(s.c.u(s.c.h()).map(|u| u + s.c.h_t()));
                }
            }
            Err(e) => {
                if fresh {
                    bed.push(Err(e.clone()));
                    surface.push(Err(e.clone()));
                }
                interior.push(Err(e));
            }
        }
    }
    Ok(ResidualReport {
        entries: vec![
            interior.entry("substituted_interior"),
            bed.entry("substituted_bed"),
            surface.entry("substituted_surface"),
        ],
    })
}

/// `u_y − v` with `u_y` a central difference, as the `u_y` entry.
pub fn uy_residual(fields: &dyn Fields, grid: &GridSpec, per_axis: usize) -> Result<ResidualReport, Error> {
    check_dim(grid, 3, "the u_y check needs a (t, x, y) grid")?;
    let dy = grid.spacing(2);
    let mut norms = Norms::default();
    let mut column: Option<((f64, f64), Result<Column, Error>)> = None;
    for p in probes(grid, per_axis)? {
        let (t, x, y) = (p[0], p[1], p[2]);
        if column.as_ref().map(|c| c.0) != Some((t, x)) {
            column = Some(((t, x), fields.column(t, x)));
        }
        let r = match &column.as_ref().expect("set above").1 {
            Ok(c) => (|| Ok((c.u(y + dy)? - c.u(y - dy)?) / (2.0 * dy) - c.v(y)?))(),
            Err(e) => Err(e.clone()),
        };
        norms.push(r);
    }
    Ok(ResidualReport { entries: vec![norms.entry("u_y")] })
}

/// `H_xx = h_x` by a central difference of the exported `h`.
pub fn hxx_from_fields(fields: &dyn Fields, t: f64, x: f64, dx: f64) -> Result<f64, Error> {
    Ok((fields.column(t, x + dx)?.h() - fields.column(t, x - dx)?.h()) / (2.0 * dx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Axis;
    use crate::reconstruction::{FnFields, PerturbedFields};

    /// `v = −4y + (x + ½)/t`, `h = 1/(4t)`: a linear-in-y solution.
    fn linear() -> FnFields {
        FnFields {
            v: Box::new(|t, x, y| -4.0 * y + (x + 0.5) / t),
            u: Box::new(|t, x, y| -2.0 * y * y + (x + 0.5) / t * y),
            h: Box::new(|t, _| 0.25 / t),
            h_t: Box::new(|t, x| 2.0 * (0.25 / t).powi(2) - (x + 0.5) / t * 0.25 / t),
            nu: Box::new(|t, x| -(x + 0.5) / t),
        }
    }

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(vec![
            Axis::new("t", 1.0, 2.0, n + 1),
            Axis::new("x", -1.0, 1.0, n + 1),
            Axis::new("y", 0.0, 0.1, n + 1),
        ])
        .unwrap()
    }

    #[test]
    fn exact_solution_converges_at_second_order() {
        let coarse = benney_residual(&linear(), &grid(32), 5).unwrap();
        let fine = benney_residual(&linear(), &grid(64), 5).unwrap();
        for (c, f) in coarse.entries.iter().zip(&fine.entries) {
            assert_eq!(f.masked, 0);
            let order = libm::log2(c.linf / f.linf);
            assert!(order > 1.9, "{}: {} -> {}", c.name, c.linf, f.linf);
        }
        let coarse = substituted_residual(&linear(), &grid(32), 5).unwrap();
        let fine = substituted_residual(&linear(), &grid(64), 5).unwrap();
        assert!(fine.get("substituted_bed").unwrap().linf == 0.0);
        assert!(fine.get("substituted_surface").unwrap().linf < 1e-15);
        let (c, f) = (coarse.entries[0].linf, fine.entries[0].linf);
        assert!(libm::log2(c / f) > 1.9, "{c} -> {f}");
    }

    #[test]
    fn u_y_matches_v() {
        let e: Vec<f64> = [16, 32].iter().map(|&n| uy_residual(&linear(), &grid(n), 5).unwrap().max_linf()).collect();
        assert!(e[1] < 1e-12, "{e:?}");
    }

    #[test]
    fn perturbation_is_detected() {
        let f = PerturbedFields::new(linear(), |_, x, _| 1e-3 * libm::sin(x));
        let r = benney_residual(&f, &grid(32), 5).unwrap();
        assert!(r.get("benney_momentum").unwrap().linf > 1e-4);
    }

    #[test]
    fn depth_integral_is_second_order() {
        let f = FnFields {
            v: Box::new(|_, _, y| libm::exp(y)),
            u: Box::new(|_, _, y| libm::exp(y) - 1.0),
            h: Box::new(|_, _| 1.0),
            h_t: Box::new(|_, _| 0.0),
            nu: Box::new(|_, _| -1.0),
        };
        let col = f.column(0.0, 0.0).unwrap();
        let e = |n| (depth_integral(&*col, 0.8, n).unwrap() - (libm::exp(0.8) - 1.0)).abs();
        let order = libm::log2(e(32) / e(64));
        assert!((order - 2.0).abs() < 0.05, "{order}");
    }
}
