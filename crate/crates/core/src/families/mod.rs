//! Solution families: the master function `λ(t,x,g)`, the distribution
//! `G(t,x,λ)` and the boundary characteristics `ν, μ`.
//!
//! Evaluation goes through time slices so that per-time work (the `Φ(t)`
//! quadratures of the rational family) is done once per `t`.

mod closure;
mod freestream;
mod hodograph;
mod rational;

use alloc::boxed::Box;

pub use closure::FnFamily;
pub use freestream::FreestreamFamily;
pub use hodograph::{theta_separable, ConstFamily, HodographTheta};
pub use rational::{RationalFamily, RationalParams};

use crate::numerics::{find_root, Tolerance};
use crate::Error;

/// `λ` and its partials at a fixed time.
pub trait TimeSlice {
    fn t(&self) -> f64;
    fn lambda(&self, x: f64, g: f64) -> f64;
    fn lambda_t(&self, x: f64, g: f64) -> f64;
    fn lambda_x(&self, x: f64, g: f64) -> f64;
    fn lambda_g(&self, x: f64, g: f64) -> f64;
    fn lambda_gx(&self, x: f64, g: f64) -> f64;
}

pub trait LambdaFamily: Sync {
    /// `[g_lo, g_hi]`.
    fn g_range(&self) -> (f64, f64);

    fn slice(&self, t: f64) -> Result<Box<dyn TimeSlice + '_>, Error>;

    /// True where denominators are healthy and `λ_g` keeps one sign.
    fn valid(&self, t: f64, x: f64) -> bool {
        match self.slice(t) {
            Ok(s) => lambda_g_sign(&*s, x, self.g_range()).is_some(),
            Err(_) => false,
        }
    }

    fn lambda(&self, t: f64, x: f64, g: f64) -> Result<f64, Error> {
        Ok(self.slice(t)?.lambda(x, g))
    }
}

impl<F: LambdaFamily + ?Sized> LambdaFamily for &F {
    fn g_range(&self) -> (f64, f64) {
        (**self).g_range()
    }
    fn slice(&self, t: f64) -> Result<Box<dyn TimeSlice + '_>, Error> {
        (**self).slice(t)
    }
    fn valid(&self, t: f64, x: f64) -> bool {
        (**self).valid(t, x)
    }
}

const MONOTONE_SCAN: usize = 33;

/// Common sign of `λ_g` over the g-range, scanned at `MONOTONE_SCAN` points.
pub fn lambda_g_sign(slice: &dyn TimeSlice, x: f64, (g_lo, g_hi): (f64, f64)) -> Option<f64> {
    let mut sign = 0.0;
    for k in 0..MONOTONE_SCAN {
        let g = g_lo + (g_hi - g_lo) * k as f64 / (MONOTONE_SCAN - 1) as f64;
        let d = slice.lambda_g(x, g);
        if !d.is_finite() {
            return None;
        }
        if d == 0.0 {
            continue;
        }
        if sign == 0.0 {
            sign = d.signum();
        } else if d.signum() != sign {
            return None;
        }
    }
    (sign != 0.0).then_some(sign)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Provenance {
    Constant,
    InvertedFromLambda,
    FreeStreaming,
}

/// `G(t,x,·)` at a fixed point.
pub trait DistributionColumn {
    fn g(&self, lambda: f64) -> Result<f64, Error>;

    /// `[min, max]` of `λ` where `G` is defined, when bounded.
    fn range(&self) -> Option<(f64, f64)>;
}

pub trait Distribution: Sync {
    fn column(&self, t: f64, x: f64) -> Result<Box<dyn DistributionColumn + '_>, Error>;

    fn provenance(&self) -> Provenance;

    fn g(&self, t: f64, x: f64, lambda: f64) -> Result<f64, Error> {
        self.column(t, x)?.g(lambda)
    }
}

/// The boundary characteristics `ν = λ(g_lo)` and, when present, `μ = λ(g_hi)`.
pub trait BoundaryPair: Sync {
    fn boundary(&self, t: f64, x: f64) -> Result<(f64, Option<f64>), Error>;

    fn nu(&self, t: f64, x: f64) -> Result<f64, Error> {
        Ok(self.boundary(t, x)?.0)
    }

    fn mu(&self, t: f64, x: f64) -> Result<Option<f64>, Error> {
        Ok(self.boundary(t, x)?.1)
    }
}

/// `g*` with `λ(t,x,g*) = lam` on a slice.
pub fn invert_on_slice(
    slice: &dyn TimeSlice,
    x: f64,
    (g_lo, g_hi): (f64, f64),
    lam: f64,
    tol: &Tolerance,
) -> Result<f64, Error> {
    let t = slice.t();
    let (nu, mu) = (slice.lambda(x, g_lo), slice.lambda(x, g_hi));
    let (lo, hi) = (nu.min(mu), nu.max(mu));
    if !(lam >= lo && lam <= hi) {
        return Err(Error::OutOfRange { lambda: lam, lo, hi });
    }
    find_root(|g| slice.lambda(x, g) - lam, g_lo, g_hi, tol).map_err(|e| match e {
        crate::numerics::NumericsError::NoBracket { .. } => Error::NonMonotone { t, x },
        e => Error::Numerics(e),
    })
}

/// `G(t,x,lam)`: the `g` whose characteristic passes through `lam`.
pub fn invert_lambda_to_g<F: LambdaFamily + ?Sized>(
    family: &F,
    t: f64,
    x: f64,
    lam: f64,
    tol: &Tolerance,
) -> Result<f64, Error> {
    let slice = family.slice(t)?;
    let range = family.g_range();
    if lambda_g_sign(&*slice, x, range).is_none() {
        return Err(Error::NonMonotone { t, x });
    }
    invert_on_slice(&*slice, x, range, lam, tol)
}

/// A λ-family seen as a distribution function and a boundary pair.
pub struct InvertedG<F> {
    family: F,
    tol: Tolerance,
}

impl<F: LambdaFamily> InvertedG<F> {
    pub fn new(family: F, tol: Tolerance) -> Self {
        Self { family, tol }
    }

    pub fn family(&self) -> &F {
        &self.family
    }
}

struct InvertedColumn<'a> {
    slice: Box<dyn TimeSlice + 'a>,
    x: f64,
    g_range: (f64, f64),
    tol: Tolerance,
}

impl DistributionColumn for InvertedColumn<'_> {
    fn g(&self, lambda: f64) -> Result<f64, Error> {
        invert_on_slice(&*self.slice, self.x, self.g_range, lambda, &self.tol)
    }

    fn range(&self) -> Option<(f64, f64)> {
        let a = self.slice.lambda(self.x, self.g_range.0);
        let b = self.slice.lambda(self.x, self.g_range.1);
        Some((a.min(b), a.max(b)))
    }
}

impl<F: LambdaFamily> Distribution for InvertedG<F> {
    fn column(&self, t: f64, x: f64) -> Result<Box<dyn DistributionColumn + '_>, Error> {
        let slice = self.family.slice(t)?;
        let g_range = self.family.g_range();
        if lambda_g_sign(&*slice, x, g_range).is_none() {
            return Err(Error::NonMonotone { t, x });
        }
        Ok(Box::new(InvertedColumn { slice, x, g_range, tol: self.tol }))
    }

    fn provenance(&self) -> Provenance {
        Provenance::InvertedFromLambda
    }
}

impl<F: LambdaFamily> BoundaryPair for InvertedG<F> {
    fn boundary(&self, t: f64, x: f64) -> Result<(f64, Option<f64>), Error> {
        let s = self.family.slice(t)?;
        let (g_lo, g_hi) = self.family.g_range();
        Ok((s.lambda(x, g_lo), Some(s.lambda(x, g_hi))))
    }
}
