//! The `f`/`X` reformulation of a λ-family.
//!
//! `f(t,x,g)` is defined by `f_x = λ_g`, `f_t = λ λ_g`; its inverse in `x`,
//! `X(t,f,g)`, satisfies `X_g X_tf − X_f X_tg = 1` and `X_tt = Q(X, t)`.
//! `X` is never tabulated: each value is a bracketed root of `f = f₀`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::families::{lambda_g_sign, LambdaFamily, TimeSlice};
use crate::numerics::{integrate, newton_bracketed, GridSpec, Tolerance};
use crate::verifier::{Norms, ResidualEntry, ResidualReport};
use crate::Error;

/// Fewest matched `(X, t)` pairs for the matched spread.
pub const MIN_MATCHES: usize = 10;

/// A forward map `x ↦ f` with its inverse `f ↦ X`.
pub trait XSource: Sync {
    /// `(f, f_x)` at `(t, x, g)`.
    fn f(&self, t: f64, x: f64, g: f64) -> Result<(f64, f64), Error>;
    fn x(&self, t: f64, f: f64, g: f64) -> Result<f64, Error>;
}

/// `f = ∫_{x_left}^x λ_g dx' + c(t,g)` with the gauge fixed by
/// `f(t₀, x_left, g) = 0` and `c_t = λ λ_g` at `x_left`.
pub struct FField<'a> {
    family: &'a dyn LambdaFamily,
    t0: f64,
    x_left: f64,
    tol: Tolerance,
}

impl<'a> FField<'a> {
    pub fn new(family: &'a dyn LambdaFamily, (t0, x_left): (f64, f64), tol: Tolerance) -> Self {
        Self { family, t0, x_left, tol }
    }

    pub fn gauge(&self, t: f64, g: f64) -> Result<f64, Error> {
        let run = |tau: f64| -> Result<f64, Error> {
            let s = self.family.slice(tau)?;
            Ok(s.lambda(self.x_left, g) * s.lambda_g(self.x_left, g))
        };
        Ok(integrate(|tau| run(tau).unwrap_or(f64::NAN), self.t0, t, &self.tol)?)
    }

    fn spatial(&self, slice: &dyn TimeSlice, x: f64, g: f64) -> Result<f64, Error> {
        Ok(integrate(|xi| slice.lambda_g(xi, g), self.x_left, x, &self.tol)?)
    }

    pub fn value(&self, t: f64, x: f64, g: f64) -> Result<f64, Error> {
        let slice = self.family.slice(t)?;
        Ok(self.spatial(&*slice, x, g)? + self.gauge(t, g)?)
    }

    /// `f_x − λ_g` and `f_t − λ λ_g` by central differences on the probes
    /// of a `(t, x, g)` grid.
    pub fn consistency(&self, grid: &GridSpec, per_axis: usize) -> Result<ResidualReport, Error> {
        check_txg(grid)?;
        let (dt, dx) = (grid.spacing(0), grid.spacing(1));
        let (mut rx, mut rt) = (Norms::default(), Norms::default());
        for p in grid_probes(grid, per_axis)? {
            let (t, x, g) = (p[0], p[1], p[2]);
            let at = |t, x| self.value(t, x, g);
            let slice = self.family.slice(t);
            rx.push((|| {
                let s = slice.as_ref().map_err(Clone::clone)?;
                Ok((at(t, x + dx)? - at(t, x - dx)?) / (2.0 * dx) - s.lambda_g(x, g))
            })());
            rt.push((|| {
                let s = slice.as_ref().map_err(Clone::clone)?;
                Ok((at(t + dt, x)? - at(t - dt, x)?) / (2.0 * dt) - s.lambda(x, g) * s.lambda_g(x, g))
            })());
        }
        Ok(ResidualReport { entries: vec![rx.entry("f_x"), rt.entry("f_t")] })
    }
}

/// `X(t, f, g)` by inverting `x ↦ f` on `x_range`.
pub struct XField<'a> {
    f: FField<'a>,
    x_range: (f64, f64),
}

impl<'a> XField<'a> {
    pub fn new(f: FField<'a>, x_range: (f64, f64)) -> Result<Self, Error> {
        if !(x_range.0 < x_range.1) {
            return Err(Error::invalid("x_range", "lower end must be below upper"));
        }
        Ok(Self { f, x_range })
    }

    pub fn f_field(&self) -> &FField<'a> {
        &self.f
    }
}

impl XSource for XField<'_> {
    fn f(&self, t: f64, x: f64, g: f64) -> Result<(f64, f64), Error> {
        let slice = self.f.family.slice(t)?;
        Ok((self.f.spatial(&*slice, x, g)? + self.f.gauge(t, g)?, slice.lambda_g(x, g)))
    }

    fn x(&self, t: f64, f: f64, g: f64) -> Result<f64, Error> {
        let slice = self.f.family.slice(t)?;
        let (a, b) = self.x_range;
        if lambda_g_sign(&*slice, a, self.f.family.g_range()).is_none()
            || lambda_g_sign(&*slice, b, self.f.family.g_range()).is_none()
        {
            return Err(Error::NonMonotone { t, x: a });
        }
        let target = f - self.f.gauge(t, g)?;
        let fa = self.f.spatial(&*slice, a, g)? - target;
        let fb = self.f.spatial(&*slice, b, g)? - target;
        if fa == fb {
            return Err(Error::Degenerate("f does not depend on x"));
        }
        let seed = a + (b - a) * fa / (fa - fb);
        let eval = |x: f64| {
            let v = if x == a {
                fa
            } else if x == b {
                fb
            } else {
                self.f.spatial(&*slice, x, g).map_or(f64::NAN, |s| s - target)
            };
            (v, slice.lambda_g(x, g))
        };
        newton_bracketed(eval, a, b, seed, &self.f.tol).map_err(|_| Error::Bracket { what: "X", t, x: f })
    }
}

type Map3 = Box<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// `X` and `f` in closed form.
pub struct FnX {
    f: Map3,
    f_x: Map3,
    x: Map3,
}

impl FnX {
    pub fn new(
        f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        f_x: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        x: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { f: Box::new(f), f_x: Box::new(f_x), x: Box::new(x) }
    }

    /// `λ = g + t`: `X = f − gt − t²/2`, so `X_tt = −1`.
    pub fn translation() -> Self {
        Self::new(|t, x, g| x + g * t + t * t / 2.0, |_, _, _| 1.0, |t, f, g| f - g * t - t * t / 2.0)
    }

    /// `X = f cosh t`, so `X_tt = X`.
    pub fn cosh() -> Self {
        Self::new(|t, x, _| x / libm::cosh(t), |t, _, _| 1.0 / libm::cosh(t), |t, f, _| f * libm::cosh(t))
    }

    /// `X = f`, the `λ_g = 0` case.
    pub fn identity() -> Self {
        Self::new(|_, x, _| x, |_, _, _| 1.0, |_, f, _| f)
    }
}

impl XSource for FnX {
    fn f(&self, t: f64, x: f64, g: f64) -> Result<(f64, f64), Error> {
        Ok(((self.f)(t, x, g), (self.f_x)(t, x, g)))
    }
    fn x(&self, t: f64, f: f64, g: f64) -> Result<f64, Error> {
        Ok((self.x)(t, f, g))
    }
}

fn check_txg(grid: &GridSpec) -> Result<(), Error> {
    if grid.dim() != 3 {
        return Err(Error::invalid("grid", "the f/X checks need a (t, x, g) grid"));
    }
    Ok(())
}

fn grid_probes(grid: &GridSpec, per_axis: usize) -> Result<Vec<Vec<f64>>, Error> {
    let pts = grid.probe_points(per_axis);
    if pts.is_empty() {
        return Err(Error::GridTooSmall("no probe points"));
    }
    Ok(pts)
}

/// A probe `(t, x, g)` mapped to `(t, f₀, g)` with the local `f` step.
fn probe_f(src: &dyn XSource, p: &[f64], dx: f64) -> Result<(f64, f64, f64, f64), Error> {
    let (f0, f_x) = src.f(p[0], p[1], p[2])?;
    Ok((p[0], f0, p[2], dx * f_x.abs()))
}

/// `|f(t, X(t, f₀, g), g) − f₀|` with `f₀ = f(t, x, g)` on the probes.
pub fn round_trip_check(src: &dyn XSource, grid: &GridSpec, per_axis: usize) -> Result<ResidualReport, Error> {
    check_txg(grid)?;
    let mut norms = Norms::default();
    for p in grid_probes(grid, per_axis)? {
        norms.push((|| {
            let (f0, _) = src.f(p[0], p[1], p[2])?;
            let x = src.x(p[0], f0, p[2])?;
            Ok(src.f(p[0], x, p[2])?.0 - f0)
        })());
    }
    Ok(ResidualReport { entries: vec![norms.entry("round_trip")] })
}

/// `X_g X_tf − X_f X_tg − 1` by central differences. Probes are given in
/// `(t, x, g)` and mapped to `f₀ = f(t, x, g)`; the `f` step is
/// `Δx · |f_x|` there, so it halves with the grid.
pub fn jacobian_check(src: &dyn XSource, grid: &GridSpec, per_axis: usize) -> Result<ResidualReport, Error> {
    check_txg(grid)?;
    let (dt, dx, dg) = (grid.spacing(0), grid.spacing(1), grid.spacing(2));
    let mut norms = Norms::default();
    for p in grid_probes(grid, per_axis)? {
        norms.push((|| {
            let (t, f, g, df) = probe_f(src, &p, dx)?;
            let x = |t, f, g| src.x(t, f, g);
            let x_g = (x(t, f, g + dg)? - x(t, f, g - dg)?) / (2.0 * dg);
            let x_f = (x(t, f + df, g)? - x(t, f - df, g)?) / (2.0 * df);
            let x_tf = (x(t + dt, f + df, g)? - x(t + dt, f - df, g)? - x(t - dt, f + df, g)? + x(t - dt, f - df, g)?)
                / (4.0 * dt * df);
            let x_tg = (x(t + dt, f, g + dg)? - x(t + dt, f, g - dg)? - x(t - dt, f, g + dg)? + x(t - dt, f, g - dg)?)
                / (4.0 * dt * dg);
            Ok(x_g * x_tf - x_f * x_tg - 1.0)
        })());
    }
    Ok(ResidualReport { entries: vec![norms.entry("jacobian")] })
}

#[derive(Debug, Clone, Copy)]
struct QttSample {
    t: f64,
    x: f64,
    x_tt: f64,
}

/// Scatter of `X_tt = (X(t+Δt) − 2X(t) + X(t−Δt))/Δt²` at fixed `(f, g)`:
///
/// * `qtt_matched`: the largest spread among samples that share `(X, t)`
///   within `match_tol` (default half the `x` spacing); small when
///   `X_tt = Q(X, t)`.
/// * `qtt_time`: the largest spread among all samples at one `t`; small
///   when `X_tt = Q(t)`.
///
/// Samples sit on the probe lattice of a `(t, x, g)` grid, so every probe
/// `x` is shared by all probe `g`.
pub fn qtt_check(
    src: &dyn XSource,
    grid: &GridSpec,
    per_axis: usize,
    match_tol: Option<f64>,
) -> Result<ResidualReport, Error> {
    check_txg(grid)?;
    let (dt, dx) = (grid.spacing(0), grid.spacing(1));
    let match_tol = match_tol.unwrap_or(0.5 * dx);
    let mut samples = Vec::new();
    let mut failed = 0;
    for p in grid_probes(grid, per_axis)? {
        let s = (|| {
            let (t, f, g, _) = probe_f(src, &p, dx)?;
            let (xp, x0, xm) = (src.x(t + dt, f, g)?, src.x(t, f, g)?, src.x(t - dt, f, g)?);
            Ok::<_, Error>(QttSample { t, x: x0, x_tt: (xp - 2.0 * x0 + xm) / (dt * dt) })
        })();
        match s {
            Ok(s) if s.x_tt.is_finite() => samples.push(s),
            _ => failed += 1,
        }
    }
    samples.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.x.total_cmp(&b.x)));
    let spread = |group: &[QttSample]| {
        let (lo, hi) =
            group.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.x_tt), hi.max(s.x_tt)));
        hi - lo
    };
    let (mut matched, mut time) = (Stat::default(), Stat::default());
    let mut pairs = 0;
    for by_t in samples.chunk_by(|a, b| a.t == b.t) {
        time.add(spread(by_t), by_t.len());
        // Clusters of consecutive X within match_tol.
        for group in by_t.chunk_by(|a, b| b.x - a.x <= match_tol) {
            if group.len() > 1 {
                pairs += group.len() * (group.len() - 1) / 2;
                matched.add(spread(group), group.len());
            }
        }
    }
    if pairs < MIN_MATCHES {
        return Err(Error::TooFewMatches { found: pairs, needed: MIN_MATCHES });
    }
    Ok(ResidualReport { entries: vec![matched.entry("qtt_matched", failed), time.entry("qtt_time", failed)] })
}

#[derive(Default)]
struct Stat {
    max: f64,
    sum_sq: f64,
    groups: usize,
    samples: usize,
}

impl Stat {
    fn add(&mut self, spread: f64, n: usize) {
        self.max = self.max.max(spread);
        self.sum_sq += spread * spread;
        self.groups += 1;
        self.samples += n;
    }

    fn entry(&self, name: &str, masked: usize) -> ResidualEntry {
        ResidualEntry {
            name: name.into(),
            linf: self.max,
            l2: libm::sqrt(self.sum_sq / self.groups.max(1) as f64),
            samples: self.samples,
            masked,
            convergence: None,
        }
    }
}
