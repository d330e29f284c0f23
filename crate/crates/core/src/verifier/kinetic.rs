use alloc::vec;
use alloc::vec::Vec;

use super::benney::check_dim;
use super::{probes, Norms, ResidualReport};
use crate::families::{BoundaryPair, Distribution};
use crate::numerics::GridSpec;
use crate::Error;

/// How the third grid axis of the kinetic check is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LambdaAxis {
    /// The axis holds `λ` itself.
    Absolute,
    /// The axis holds `s ∈ [0, 1]` with `λ = ν + s(μ − ν)`.
    Fraction,
}

/// `−G_t + λ G_x − H_xx G_λ` on a `(t, x, λ-or-s)` grid, with `H_xx`
/// supplied by the caller.
pub fn kinetic_residual(
    dist: &dyn Distribution,
    pair: Option<&dyn BoundaryPair>,
    hxx: &dyn Fn(f64, f64) -> Result<f64, Error>,
    grid: &GridSpec,
    axis: LambdaAxis,
    per_axis: usize,
) -> Result<ResidualReport, Error> {
    check_dim(grid, 3, "the kinetic residual needs a (t, x, lambda) grid")?;
    if axis == LambdaAxis::Fraction && pair.is_none() {
        return Err(Error::invalid("lambda_axis", "fraction mode needs the boundary pair"));
    }
    let (dt, dx, ds) = (grid.spacing(0), grid.spacing(1), grid.spacing(2));
    let mut norms = Norms::default();
    for p in probes(grid, per_axis)? {
        let (t, x, s) = (p[0], p[1], p[2]);
        let r = (|| {
            let (lam, dl) = match axis {
                LambdaAxis::Absolute => (s, ds),
                LambdaAxis::Fraction => {
                    let (nu, mu) = pair.expect("checked above").boundary(t, x)?;
                    let mu = mu.ok_or(Error::Degenerate("fraction mode needs mu"))?;
                    (nu + s * (mu - nu), ds * (mu - nu))
                }
            };
            let g = |t: f64, x: f64, l: f64| dist.g(t, x, l);
            let g_t = (g(t + dt, x, lam)? - g(t - dt, x, lam)?) / (2.0 * dt);
            let g_x = (g(t, x + dx, lam)? - g(t, x - dx, lam)?) / (2.0 * dx);
            let g_l = (g(t, x, lam + dl)? - g(t, x, lam - dl)?) / (2.0 * dl);
            Ok(-g_t + lam * g_x - hxx(t, x)? * g_l)
        })();
        norms.push(r);
    }
    Ok(ResidualReport { entries: vec![norms.entry("kinetic")] })
}

/// Characteristic relations of the boundaries, `ν_t − ν ν_x = H_xx` and
/// the same for `μ`, on a `(t, x)` grid.
pub fn monge_residual(
    pair: &dyn BoundaryPair,
    hxx: &dyn Fn(f64, f64) -> Result<f64, Error>,
    grid: &GridSpec,
    per_axis: usize,
) -> Result<ResidualReport, Error> {
    check_dim(grid, 2, "the Monge residual needs a (t, x) grid")?;
    let (dt, dx) = (grid.spacing(0), grid.spacing(1));
    let (mut rn, mut rm) = (Norms::default(), Norms::default());
    for p in probes(grid, per_axis)? {
        let (t, x) = (p[0], p[1]);
        let stencil = (|| {
            let pts = [(t, x), (t + dt, x), (t - dt, x), (t, x + dx), (t, x - dx)];
            let b: Vec<(f64, Option<f64>)> =
                pts.iter().map(|&(t, x)| pair.boundary(t, x)).collect::<Result<_, Error>>()?;
            Ok::<_, Error>((b, hxx(t, x)?))
        })();
        let (b, h) = match stencil {
            Ok(s) => s,
            Err(e) => {
                rn.push(Err(e.clone()));
                rm.push(Err(e));
                continue;
            }
        };
        let rel = |c: f64, tp: f64, tm: f64, xp: f64, xm: f64| (tp - tm) / (2.0 * dt) - c * (xp - xm) / (2.0 * dx) - h;
        rn.push(Ok(rel(b[0].0, b[1].0, b[2].0, b[3].0, b[4].0)));
        if let [Some(c), Some(tp), Some(tm), Some(xp), Some(xm)] = [b[0].1, b[1].1, b[2].1, b[3].1, b[4].1] {
            rm.push(Ok(rel(c, tp, tm, xp, xm)));
        }
    }
    let mut entries = vec![rn.entry("monge_nu")];
    if rm.entry("monge_mu").samples > 0 {
        entries.push(rm.entry("monge_mu"));
    }
    Ok(ResidualReport { entries })
}
