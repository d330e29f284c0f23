use alloc::vec;
use alloc::vec::Vec;

use super::benney::check_dim;
use super::{probes, Norms, ResidualReport};
use crate::families::{LambdaFamily, TimeSlice};
use crate::numerics::{integrate, GridSpec, Tolerance};
use crate::Error;

fn weighted_lambda_gx(slice: &dyn TimeSlice, x: f64, g_range: (f64, f64), tol: &Tolerance) -> Result<f64, Error> {
    Ok(integrate(|g| g * slice.lambda_gx(x, g), g_range.0, g_range.1, tol)?)
}

fn weighted_lambda_g(slice: &dyn TimeSlice, x: f64, g_range: (f64, f64), tol: &Tolerance) -> Result<f64, Error> {
    Ok(integrate(|g| g * slice.lambda_g(x, g), g_range.0, g_range.1, tol)?)
}

/// `λ_t − λ λ_x − s_h ∫ g λ_gx dg` from the family's own partials, on the
/// `(t, x)` probes of `grid` and `g_count` equally spaced `g` (ends included).
pub fn cr_residual(
    family: &dyn LambdaFamily,
    grid: &GridSpec,
    per_axis: usize,
    g_count: usize,
    s_h: f64,
    tol: &Tolerance,
) -> Result<ResidualReport, Error> {
    check_dim(grid, 2, "the CR residual needs a (t, x) grid")?;
    if g_count < 2 {
        return Err(Error::GridTooSmall("need at least two g values"));
    }
    let range = family.g_range();
    let mut norms = Norms::default();
    for p in probes(grid, per_axis)? {
        let (t, x) = (p[0], p[1]);
        let slice = match family.slice(t) {
            Ok(s) => s,
            Err(e) => {
                (0..g_count).for_each(|_| norms.push(Err(e.clone())));
                continue;
            }
        };
        let forcing = weighted_lambda_gx(&*slice, x, range, tol).map(|w| s_h * w);
        for k in 0..g_count {
            let g = range.0 + (range.1 - range.0) * k as f64 / (g_count - 1) as f64;
            let r = forcing.clone().map(|f| slice.lambda_t(x, g) - slice.lambda(x, g) * slice.lambda_x(x, g) - f);
            norms.push(r);
        }
    }
    Ok(ResidualReport { entries: vec![norms.entry("cr")] })
}

/// Composite Simpson weights on `n` (odd) equally spaced nodes.
fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let w = if k == 0 || k == n - 1 {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect()
}

/// Second-order derivative of nodal values: central inside, one-sided at the ends.
fn nodal_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|k| {
            if k == 0 {
                (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
            } else if k == n - 1 {
                (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h)
            } else {
                (f[k + 1] - f[k - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// Residual of the Hamilton–Jacobi form `S_t + S_x²/2 + V = 0` on a
/// `(t, x, g)` grid, where
///
/// ```text
/// S(t,x,g) = −∫_{x₀}^x λ dx' + c(t,g),   c_t = −(λ²/2 + V)|_{x₀},   V = −s_h ∫ g S_gx dg
/// ```
///
/// with `x₀` the lower end of the `x` axis. `S_t` and `S_x` are central
/// differences of `S`; `S_gx` is a mixed difference on the `g` nodes of the
/// grid and the `g`-integral is Simpson's rule on those nodes.
pub fn hj_residual(
    family: &dyn LambdaFamily,
    grid: &GridSpec,
    per_axis: usize,
    s_h: f64,
    tol: &Tolerance,
) -> Result<ResidualReport, Error> {
    check_dim(grid, 3, "the HJ residual needs a (t, x, g) grid")?;
    let range = family.g_range();
    let g_axis = grid.axis(2);
    let span = (range.1 - range.0).abs();
    if (g_axis.min - range.0).abs() > 1e-12 * span || (g_axis.max - range.1).abs() > 1e-12 * span {
        return Err(Error::invalid("grid", "the g axis must span the family's g range"));
    }
    if g_axis.count.is_multiple_of(2) {
        return Err(Error::invalid("grid", "the g axis needs an odd node count"));
    }
    let (dt, dx, dg) = (grid.spacing(0), grid.spacing(1), grid.spacing(2));
    let x0 = grid.axis(1).min;
    let g_nodes: Vec<f64> = g_axis.nodes().collect();
    let weights = simpson_weights(g_nodes.len(), dg);
    let mut norms = Norms::default();
    let mut cached: Option<((f64, f64), Result<f64, Error>)> = None;
    for p in probes(grid, per_axis)? {
        let (t, x, g) = (p[0], p[1], p[2]);
        // V depends on (t, x) only and the probes run with g fastest.
        let v = match &cached {
            Some((key, v)) if *key == (t, x) => v.clone(),
            _ => {
                let v = potential(family, t, x, dx, &g_nodes, &weights, dg, s_h, tol);
                cached = Some(((t, x), v.clone()));
                v
            }
        };
        let r = (|| {
            let v = v?;
            let (sp, sm) = (family.slice(t + dt)?, family.slice(t - dt)?);
            let slice = family.slice(t)?;
            let lam = |s: &dyn TimeSlice, a: f64, b: f64| integrate(|xi| s.lambda(xi, g), a, b, tol);
            // S(t+dt) − S(t−dt), with the gauge difference integrated directly.
            let gauge = integrate(
                |tau| {
                    let run = || -> Result<f64, Error> {
                        let s = family.slice(tau)?;
                        let l = s.lambda(x0, g);
                        Ok(l * l / 2.0 + s_h * weighted_lambda_g(&*s, x0, range, tol)?)
                    };
                    run().unwrap_or(f64::NAN)
                },
                t - dt,
                t + dt,
                tol,
            )?;
            let s_t = (-lam(&*sp, x0, x)? + lam(&*sm, x0, x)? - gauge) / (2.0 * dt);
            let s_x = -lam(&*slice, x - dx, x + dx)? / (2.0 * dx);
            Ok(s_t + s_x * s_x / 2.0 + v)
        })();
        norms.push(r);
    }
    Ok(ResidualReport { entries: vec![norms.entry("hj")] })
}

#[allow(clippy::too_many_arguments)]
fn potential(
    family: &dyn LambdaFamily,
    t: f64,
    x: f64,
    dx: f64,
    g_nodes: &[f64],
    weights: &[f64],
    dg: f64,
    s_h: f64,
    tol: &Tolerance,
) -> Result<f64, Error> {
    let slice = family.slice(t)?;
    // S(x+dx) − S(x−dx) per g node; the gauge cancels.
    let d: Vec<f64> = g_nodes
        .iter()
        .map(|&g| integrate(|xi| slice.lambda(xi, g), x - dx, x + dx, tol).map(|i| -i))
        .collect::<Result<_, _>>()?;
    let s_gx: Vec<f64> = nodal_derivative(&d, dg).into_iter().map(|v| v / (2.0 * dx)).collect();
    let sum: f64 = g_nodes.iter().zip(weights).zip(&s_gx).map(|((g, w), s)| w * g * s).sum();
    Ok(-s_h * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{RationalFamily, RationalParams};
    use crate::numerics::Axis;

    fn family(sign: f64) -> RationalFamily {
        let p = RationalParams::parse("g", "0", 0.0, 1.0, sign).unwrap();
        RationalFamily::with_t_range(p, (0.5, 2.0)).unwrap()
    }

    fn tx() -> GridSpec {
        GridSpec::new(vec![Axis::new("t", 0.6, 1.8, 9), Axis::new("x", -2.5, -1.0, 9)]).unwrap()
    }

    #[test]
    fn cr_vanishes_only_for_matching_signs() {
        let tol = Tolerance::tight();
        let fam = family(1.0);
        let good = cr_residual(&fam, &tx(), 5, 9, -1.0, &tol).unwrap();
        assert!(good.max_linf() < 1e-12, "{}", good.max_linf());
        let bad = cr_residual(&fam, &tx(), 5, 9, 1.0, &tol).unwrap();
        // Then the residual is 2Φ_tt, and |Φ_tt| ≥ |Φ_tt(1.8)| on the probes.
        let (_, _, phi_tt) = fam.phi(1.8).unwrap();
        assert!(bad.max_linf() > 1.9 * phi_tt.abs());
        let flipped = cr_residual(&fam.flipped(), &tx(), 5, 9, -1.0, &tol).unwrap();
        assert!(flipped.max_linf() > 1.9 * phi_tt.abs());
    }

    #[test]
    fn hj_residual_is_second_order() {
        let tol = Tolerance::tight();
        let fam = family(1.0);
        let e: Vec<f64> = [16usize, 32]
            .iter()
            .map(|&n| {
                let g = GridSpec::new(vec![
                    Axis::new("t", 0.6, 1.8, n + 1),
                    Axis::new("x", -2.5, -1.0, n + 1),
                    Axis::new("g", 0.0, 1.0, n + 1),
                ])
                .unwrap();
                hj_residual(&fam, &g, 5, -1.0, &tol).unwrap().max_linf()
            })
            .collect();
        let order = libm::log2(e[0] / e[1]);
        assert!(order > 1.8, "{e:?}");
    }

    #[test]
    fn simpson_and_one_sided_rules() {
        let h = 0.25;
        let w = simpson_weights(5, h);
        let x: Vec<f64> = (0..5).map(|k| k as f64 * h).collect();
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x * x).sum();
        assert!((s - 0.25).abs() < 1e-15);
        let d = nodal_derivative(&x.iter().map(|x| x * x).collect::<Vec<_>>(), h);
        for (x, d) in x.iter().zip(d) {
            assert!((d - 2.0 * x).abs() < 1e-14);
        }
    }
}
