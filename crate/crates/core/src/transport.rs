//! Characteristics of the kinetic equation `−G_t + λ G_x − H_xx G_λ = 0`:
//! along `dx/dt = −λ, dλ/dt = H_xx` the value of `G` is constant.

use alloc::vec::Vec;
use core::cell::Cell;

use crate::families::{Distribution, LambdaFamily};
use crate::numerics::{integrate, rk4_step, GridSpec, Tolerance};
use crate::verifier::{attach_fits, Norms, ResidualReport};
use crate::Error;

pub const MAX_STEPS: usize = 1_000_000;
/// Largest fraction of samples allowed to leave the box.
pub const MAX_DROPPED: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CharSample {
    pub x: f64,
    pub lambda: f64,
    /// `G` at emission; carried unchanged.
    pub g_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CharState {
    pub time: f64,
    pub samples: Vec<CharSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Advection {
    pub state: CharState,
    /// Samples that left the box or met a non-finite forcing.
    pub dropped: usize,
}

fn step_plan(t0: f64, t1: f64, dt: f64) -> Result<(usize, f64), Error> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid("dt", "must be positive and finite"));
    }
    let span = t1 - t0;
    let n = libm::round(span.abs() / dt);
    if n > MAX_STEPS as f64 {
        return Err(Error::invalid("dt", "more than 10^6 steps"));
    }
    let n = (n as usize).max(1);
    Ok((n, span / n as f64))
}

/// One trajectory; `None` when it leaves `x_box` or the forcing fails.
pub fn advect_sample(
    sample: CharSample,
    hxx: &dyn Fn(f64, f64) -> Result<f64, Error>,
    t0: f64,
    steps: usize,
    h: f64,
    x_box: (f64, f64),
) -> Option<CharSample> {
    let failed = Cell::new(false);
    let rhs = |t: f64, s: &[f64; 2]| {
        let f = hxx(t, s[0]).unwrap_or_else(|_| {
            failed.set(true);
            f64::NAN
        });
        [-s[1], f]
    };
    let mut s = [sample.x, sample.lambda];
    for k in 0..steps {
        s = rk4_step(s, rhs, t0 + k as f64 * h, h).ok()?;
        if failed.get() || !(s[0] >= x_box.0 && s[0] <= x_box.1) {
            return None;
        }
    }
    Some(CharSample { x: s[0], lambda: s[1], ..sample })
}

/// RK4 on every sample from `state.time` to `t_target`. The step is `dt`
/// adjusted so that a whole number of steps fits.
pub fn advect(
    state: &CharState,
    hxx: &dyn Fn(f64, f64) -> Result<f64, Error>,
    t_target: f64,
    dt: f64,
    x_box: (f64, f64),
) -> Result<Advection, Error> {
    let (steps, h) = step_plan(state.time, t_target, dt)?;
    let moved: Vec<CharSample> =
        state.samples.iter().filter_map(|&s| advect_sample(s, hxx, state.time, steps, h, x_box)).collect();
    let dropped = state.samples.len() - moved.len();
    check_dropped(dropped, state.samples.len())?;
    Ok(Advection { state: CharState { time: t_target, samples: moved }, dropped })
}

fn check_dropped(dropped: usize, total: usize) -> Result<(), Error> {
    if dropped as f64 > MAX_DROPPED * total as f64 {
        return Err(Error::TooManyDropped { dropped, total });
    }
    Ok(())
}

/// Emits one sample per node of an `(x, λ)` grid at time `t0`.
pub fn emit(dist: &dyn Distribution, seeds: &GridSpec, t0: f64) -> Result<(CharState, usize), Error> {
    if seeds.dim() != 2 {
        return Err(Error::invalid("seeds", "seeds are an (x, lambda) grid"));
    }
    let mut samples = Vec::with_capacity(seeds.len());
    let mut failed = 0;
    for k in 0..seeds.len() {
        let p = seeds.point(&seeds.multi_index(k));
        match dist.g(t0, p[0], p[1]) {
            Ok(g) if g.is_finite() => samples.push(CharSample { x: p[0], lambda: p[1], g_value: g }),
            _ => failed += 1,
        }
    }
    Ok((CharState { time: t0, samples }, failed))
}

/// `max |G(t1, x(t1), λ(t1)) − G(t0, x0, λ0)|` over the seeds, as the
/// `conservation` entry. Seeds where `G` cannot be evaluated are masked.
pub fn conservation_check(
    dist: &dyn Distribution,
    hxx: &dyn Fn(f64, f64) -> Result<f64, Error>,
    seeds: &GridSpec,
    (t0, t1): (f64, f64),
    dt: f64,
    x_box: (f64, f64),
) -> Result<ResidualReport, Error> {
    let (state, failed) = emit(dist, seeds, t0)?;
    let total = state.samples.len() + failed;
    let (steps, h) = step_plan(t0, t1, dt)?;
    let mut norms = Norms::default();
    let mut dropped = 0;
    for s in &state.samples {
        match advect_sample(*s, hxx, t0, steps, h, x_box) {
            Some(end) => norms.push(dist.g(t1, end.x, end.lambda).map(|g| g - s.g_value)),
            None => dropped += 1,
        }
    }
    check_dropped(dropped, total)?;
    let mut entry = norms.entry("conservation");
    entry.masked += dropped + failed;
    Ok(ResidualReport { entries: alloc::vec![entry] })
}

/// [`conservation_check`] over a ladder of steps, with the deviation fitted
/// against `dt`.
pub fn conservation_order(
    dist: &dyn Distribution,
    hxx: &dyn Fn(f64, f64) -> Result<f64, Error>,
    seeds: &GridSpec,
    times: (f64, f64),
    dts: &[f64],
    x_box: (f64, f64),
    floor: f64,
) -> Result<ResidualReport, Error> {
    let reports = dts
        .iter()
        .map(|&dt| Ok((dt, conservation_check(dist, hxx, seeds, times, dt, x_box)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(attach_fits(reports, floor))
}

/// `H_xx = s_h ∫ g λ_gx dg` for a λ-family.
pub fn family_forcing<'a>(
    family: &'a dyn LambdaFamily,
    s_h: f64,
    tol: Tolerance,
) -> impl Fn(f64, f64) -> Result<f64, Error> + Sync + 'a {
    move |t, x| {
        let slice = family.slice(t)?;
        let (lo, hi) = family.g_range();
        Ok(s_h * integrate(|g| g * slice.lambda_gx(x, g), lo, hi, &tol)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Axis;

    fn one(x: f64, lambda: f64) -> CharState {
        CharState { time: 0.0, samples: alloc::vec![CharSample { x, lambda, g_value: 7.0 }] }
    }

    #[test]
    fn free_streaming_moves_against_lambda() {
        let r = advect(&one(0.0, 1.0), &|_, _| Ok(0.0), 2.0, 0.01, (-10.0, 10.0)).unwrap();
        let s = r.state.samples[0];
        assert!((s.x + 2.0).abs() < 1e-13 && (s.lambda - 1.0).abs() < 1e-13);
        assert_eq!(s.g_value, 7.0);
    }

    #[test]
    fn uniform_forcing_is_exact() {
        let (x0, l0, a) = (0.3, -0.7, 1.5);
        let r = advect(&one(x0, l0), &|_, _| Ok(a), 1.3, 0.1, (-10.0, 10.0)).unwrap();
        let s = r.state.samples[0];
        let t: f64 = 1.3;
        assert!((s.lambda - (l0 + a * t)).abs() < 1e-13);
        assert!((s.x - (x0 - l0 * t - a * t * t / 2.0)).abs() < 1e-13);
    }

    #[test]
    fn reversible() {
        let hxx = |t: f64, x: f64| Ok(libm::sin(x) * (1.0 + t));
        let start = one(0.2, 0.4);
        let fwd = advect(&start, &hxx, 1.0, 1e-3, (-10.0, 10.0)).unwrap();
        let back = advect(&fwd.state, &hxx, 0.0, 1e-3, (-10.0, 10.0)).unwrap();
        let (a, b) = (start.samples[0], back.state.samples[0]);
        assert!((a.x - b.x).abs() < 1e-10 && (a.lambda - b.lambda).abs() < 1e-10);
    }

    #[test]
    fn leaving_the_box_is_counted() {
        let mut st = one(0.0, 1.0);
        st.samples.push(CharSample { x: 0.0, lambda: -1.0, g_value: 0.0 });
        let err = advect(&st, &|_, _| Ok(0.0), 2.0, 0.01, (-1.0, 10.0)).unwrap_err();
        assert!(matches!(err, Error::TooManyDropped { dropped: 1, total: 2 }));
    }

    #[test]
    fn step_limit() {
        assert!(advect(&one(0.0, 0.0), &|_, _| Ok(0.0), 1.0, 1e-7, (-1.0, 1.0)).is_err());
        let seeds = GridSpec::new(alloc::vec![Axis::new("x", 0.0, 1.0, 3), Axis::new("lambda", 0.0, 1.0, 3)]).unwrap();
        assert_eq!(seeds.len(), 9);
    }
}
