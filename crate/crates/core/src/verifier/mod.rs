//! Finite-difference residuals of every equation in play, and convergence
//! fits over nested grids.
//!
//! Residuals are taken on interior probe points with full central stencils
//! whose steps are the grid spacings, so refining the grid shrinks the
//! truncation error at second order while the probe set stays fixed.

mod benney;
mod kinetic;
mod master;
mod moments;

use alloc::string::String;
use alloc::vec::Vec;

pub use benney::{benney_residual, hxx_from_fields, substituted_residual, uy_residual};
pub use kinetic::{kinetic_residual, monge_residual, LambdaAxis};
pub use master::{cr_residual, hj_residual};
pub use moments::moment_round_trip;

use crate::numerics::GridSpec;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FitStatus {
    /// Norms decrease strictly; `slope` is the least-squares order.
    Fitted,
    /// Norms fall monotonically to the floor before the last level.
    ReachedFloor,
    /// Every norm is at or below the floor.
    ExactToFloor,
    /// Norms do not decrease; `slope` is reported but not an order.
    NonMonotone,
    TooFewLevels,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergenceFit {
    /// `(spacing, L∞ norm)` per level, coarse to fine.
    pub levels: Vec<(f64, f64)>,
    pub slope: f64,
    pub floor: f64,
    pub status: FitStatus,
}

impl ConvergenceFit {
    pub fn order(&self) -> Option<f64> {
        matches!(self.status, FitStatus::Fitted | FitStatus::ReachedFloor).then_some(self.slope)
    }

    /// Converged at `min_order` or better, or exact to the floor.
    pub fn passes(&self, min_order: f64) -> bool {
        match self.status {
            FitStatus::Fitted => self.slope >= min_order,
            // One level above the floor leaves no slope to judge.
            FitStatus::ReachedFloor => self.slope.is_nan() || self.slope >= min_order,
            FitStatus::ExactToFloor => true,
            FitStatus::NonMonotone | FitStatus::TooFewLevels => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResidualEntry {
    pub name: String,
    pub linf: f64,
    /// Root mean square.
    pub l2: f64,
    pub samples: usize,
    pub masked: usize,
    pub convergence: Option<ConvergenceFit>,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResidualReport {
    pub entries: Vec<ResidualEntry>,
}

impl ResidualReport {
    pub fn get(&self, name: &str) -> Option<&ResidualEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn merge(&mut self, other: ResidualReport) {
        self.entries.extend(other.entries);
    }

    /// Every entry carries a fit that passes at `min_order`.
    pub fn converged(&self, min_order: f64) -> bool {
        !self.entries.is_empty()
            && self.entries.iter().all(|e| e.convergence.as_ref().is_some_and(|c| c.passes(min_order)))
    }

    pub fn max_linf(&self) -> f64 {
        self.entries.iter().map(|e| e.linf).fold(0.0, f64::max)
    }
}

/// Running L∞/RMS accumulator; failed or non-finite samples count as masked.
#[derive(Debug, Clone, Default)]
pub struct Norms {
    max: f64,
    sum_sq: f64,
    samples: usize,
    masked: usize,
}

impl Norms {
    pub fn push(&mut self, r: Result<f64, Error>) {
        match r {
            Ok(v) if v.is_finite() => {
                self.max = self.max.max(v.abs());
                self.sum_sq += v * v;
                self.samples += 1;
            }
            _ => self.masked += 1,
        }
    }

    pub fn entry(&self, name: &str) -> ResidualEntry {
        let rms = if self.samples > 0 { libm::sqrt(self.sum_sq / self.samples as f64) } else { 0.0 };
        let linf = if self.samples > 0 { self.max } else { f64::NAN };
        ResidualEntry {
            name: name.into(),
            linf,
            l2: rms,
            samples: self.samples,
            masked: self.masked,
            convergence: None,
        }
    }
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(h, e)| (libm::log(h), libm::log(e))).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Classifies `(spacing, norm)` pairs, coarse to fine.
pub fn fit_levels(levels: Vec<(f64, f64)>, floor: f64) -> ConvergenceFit {
    let done = |slope, status| ConvergenceFit { levels: levels.clone(), slope, floor, status };
    if levels.iter().any(|l| !l.1.is_finite()) {
        return done(f64::NAN, FitStatus::NonMonotone);
    }
    if levels.len() < 3 {
        return done(f64::NAN, FitStatus::TooFewLevels);
    }
    if levels.iter().all(|l| l.1 <= floor) {
        return done(f64::NAN, FitStatus::ExactToFloor);
    }
    let k = levels.iter().position(|l| l.1 <= floor).unwrap_or(levels.len());
    let prefix = &levels[..k];
    let slope = if prefix.len() >= 2 { least_squares_slope(prefix) } else { f64::NAN };
    let decreasing = prefix.windows(2).all(|w| w[1].1 < w[0].1);
    if !decreasing || levels[k..].iter().any(|l| l.1 > floor) {
        let slope = if prefix.len() >= 2 { slope } else { least_squares_slope(&levels) };
        return done(slope, FitStatus::NonMonotone);
    }
    if k == levels.len() || k >= 3 {
        return done(slope, FitStatus::Fitted);
    }
    done(slope, FitStatus::ReachedFloor)
}

/// Runs `check` on each level of a nested ladder and attaches a fit of the
/// L∞ norm against spacing to every entry of the finest report.
pub fn convergence_order<F>(levels: &[GridSpec], floor: f64, mut check: F) -> Result<ResidualReport, Error>
where
    F: FnMut(&GridSpec) -> Result<ResidualReport, Error>,
{
    if levels.is_empty() {
        return Err(Error::invalid("levels", "at least one level is required"));
    }
    for w in levels.windows(2) {
        if !w[0].halves_into(&w[1]) {
            return Err(Error::invalid("levels", "each level must halve the previous spacing"));
        }
    }
    let reports: Vec<(f64, ResidualReport)> =
        levels.iter().map(|g| Ok((g.max_spacing(), check(g)?))).collect::<Result<_, Error>>()?;
    Ok(attach_fits(reports, floor))
}

/// Attaches fits to already computed per-level reports (coarse to fine).
pub fn attach_fits(reports: Vec<(f64, ResidualReport)>, floor: f64) -> ResidualReport {
    let Some((_, finest)) = reports.last() else { return ResidualReport::default() };
    let mut out = finest.clone();
    for entry in &mut out.entries {
        let pts: Vec<(f64, f64)> =
            reports.iter().map(|(h, r)| (*h, r.get(&entry.name).map_or(f64::NAN, |e| e.linf))).collect();
        entry.convergence = Some(fit_levels(pts, floor));
    }
    out
}

pub(crate) fn probes(grid: &GridSpec, per_axis: usize) -> Result<Vec<Vec<f64>>, Error> {
    let pts = grid.probe_points(per_axis);
    if pts.is_empty() {
        return Err(Error::GridTooSmall("no probe points"));
    }
    for k in 0..grid.dim() {
        let a = grid.axis(k);
        if a.count < 3 {
            return Err(Error::GridTooSmall("every axis needs at least three nodes"));
        }
    }
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{central, Axis};

    fn ladder(pts: &[f64]) -> Vec<(f64, f64)> {
        pts.iter().enumerate().map(|(k, &e)| (1.0 / (32 << k) as f64, e)).collect()
    }

    #[test]
    fn polynomial_field_has_order_two() {
        // Central difference of x⁴ at x = 1: error h².
        let levels: Vec<(f64, f64)> = [32usize, 64, 128]
            .iter()
            .map(|&n| {
                let h = 1.0 / n as f64;
                (h, (central(|x: f64| x.powi(4), 1.0, h) - 4.0).abs())
            })
            .collect();
        let fit = fit_levels(levels, 1e-14);
        assert_eq!(fit.status, FitStatus::Fitted);
        assert!((fit.slope - 2.0).abs() < 0.15);
    }

    #[test]
    fn saturated_residual_has_order_zero() {
        let fit = fit_levels(ladder(&[1e-3 + 4e-6, 1e-3 + 1e-6, 1e-3 + 2.5e-7]), 1e-12);
        assert!(fit.slope.abs() < 0.05);
        assert!(!fit.passes(1.9));
    }

    #[test]
    fn rounding_dominated_regime_is_non_monotone() {
        let levels: Vec<(f64, f64)> = [1e-7, 5e-8, 2.5e-8]
            .iter()
            .map(|&h| (h, (central(libm::exp, 0.3, h) - libm::exp(0.3)).abs().max(1e-300) + 1e-9 / h * 1e-7))
            .collect();
        let fit = fit_levels(levels, 1e-14);
        assert_eq!(fit.status, FitStatus::NonMonotone);
        assert_eq!(fit.order(), None);
    }

    #[test]
    fn floors_and_level_counts() {
        assert_eq!(fit_levels(ladder(&[1e-15, 2e-16, 0.0]), 1e-12).status, FitStatus::ExactToFloor);
        assert_eq!(fit_levels(ladder(&[1e-6, 1e-13, 1e-13]), 1e-12).status, FitStatus::ReachedFloor);
        assert_eq!(fit_levels(ladder(&[1e-6, 1e-13, 1e-9]), 1e-12).status, FitStatus::NonMonotone);
        assert_eq!(fit_levels(ladder(&[1e-6, 2.5e-7]), 1e-12).status, FitStatus::TooFewLevels);
    }

    #[test]
    fn slow_decay_to_floor_fails_order() {
        let fit = fit_levels(ladder(&[1e-6, 5e-7, 1e-13, 1e-13]), 1e-12);
        assert_eq!(fit.status, FitStatus::ReachedFloor);
        assert!(!fit.passes(1.9));
        assert!(fit_levels(ladder(&[1e-6, 2.5e-7, 1e-13, 1e-13]), 1e-12).passes(1.9));
    }

    #[test]
    fn ladder_must_be_nested() {
        let g = |n| GridSpec::new(alloc::vec![Axis::new("x", 0.0, 1.0, n)]).unwrap();
        let ok = convergence_order(&[g(33), g(65), g(129)], 1e-14, |_| Ok(ResidualReport::default()));
        assert!(ok.is_ok());
        let bad = convergence_order(&[g(33), g(64)], 1e-14, |_| Ok(ResidualReport::default()));
        assert!(bad.is_err());
    }
}
