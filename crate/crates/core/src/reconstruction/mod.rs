//! From `(G, ν, μ)` or `λ(t,x,g)` to the Benney fields:
//!
//! ```text
//! y + ∫_ν^{−v} G dλ = 0,   u = ∫_ν^{−v} λG dλ,   h = s_h ∫_ν^μ G dλ,   H_t = s_h ∫_ν^μ λG dλ
//! ```
//!
//! Fields are exposed per `(t, x)` column. Moment columns seed each `y`
//! with the previous root; λ columns bracket from a cumulative table.

mod lambda;
mod moment;
mod signs;
mod snapshot;

use alloc::boxed::Box;

pub use lambda::LambdaFields;
pub use moment::{compute_h, compute_u, solve_v, solve_v_column, MomentFields};
pub use signs::{resolve_signs, sign_candidates, SignCandidate, SignResolution};
pub use snapshot::{assemble, evaluate_column, evaluate_fields, ColumnSamples, FieldSnapshot};

use crate::numerics::gauss_legendre;
use crate::Error;

/// The two binary choices left open by the parametrization.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SignConvention {
    /// Sign in `h = s_h ∫_ν^μ G dλ`.
    pub s_h: f64,
    /// Sign in front of the rational family's `Φ`.
    pub s_phi: f64,
}

impl SignConvention {
    pub const ALL: [SignConvention; 4] = [
        SignConvention { s_h: 1.0, s_phi: 1.0 },
        SignConvention { s_h: 1.0, s_phi: -1.0 },
        SignConvention { s_h: -1.0, s_phi: 1.0 },
        SignConvention { s_h: -1.0, s_phi: -1.0 },
    ];

    pub fn new(s_h: f64, s_phi: f64) -> Result<Self, Error> {
        if (s_h != 1.0 && s_h != -1.0) || (s_phi != 1.0 && s_phi != -1.0) {
            return Err(Error::invalid("signs", "members must be exactly +1 or -1"));
        }
        Ok(Self { s_h, s_phi })
    }
}

/// Benney fields at a fixed `(t, x)`.
pub trait FieldColumn {
    fn nu(&self) -> f64;
    fn h(&self) -> f64;
    /// `H_t`, with `H_x = h`.
    fn h_t(&self) -> f64;
    fn v(&self, y: f64) -> Result<f64, Error>;
    fn u(&self, y: f64) -> Result<f64, Error>;
}

pub trait Fields: Sync {
    fn column(&self, t: f64, x: f64) -> Result<Box<dyn FieldColumn + '_>, Error>;
}

impl<F: Fields + ?Sized> Fields for &F {
    fn column(&self, t: f64, x: f64) -> Result<Box<dyn FieldColumn + '_>, Error> {
        (**self).column(t, x)
    }
}

impl<F: Fields + ?Sized> Fields for Box<F> {
    fn column(&self, t: f64, x: f64) -> Result<Box<dyn FieldColumn + '_>, Error> {
        (**self).column(t, x)
    }
}

type Scalar3 = Box<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
type Scalar2 = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Fields given in closed form.
pub struct FnFields {
    pub v: Scalar3,
    pub u: Scalar3,
    pub h: Scalar2,
    pub h_t: Scalar2,
    pub nu: Scalar2,
}

struct FnColumn<'a> {
    f: &'a FnFields,
    t: f64,
    x: f64,
}

impl FieldColumn for FnColumn<'_> {
    fn nu(&self) -> f64 {
        (self.f.nu)(self.t, self.x)
    }
    fn h(&self) -> f64 {
        (self.f.h)(self.t, self.x)
    }
    fn h_t(&self) -> f64 {
        (self.f.h_t)(self.t, self.x)
    }
    fn v(&self, y: f64) -> Result<f64, Error> {
        Ok((self.f.v)(self.t, self.x, y))
    }
    fn u(&self, y: f64) -> Result<f64, Error> {
        Ok((self.f.u)(self.t, self.x, y))
    }
}

impl Fields for FnFields {
    fn column(&self, t: f64, x: f64) -> Result<Box<dyn FieldColumn + '_>, Error> {
        Ok(Box::new(FnColumn { f: self, t, x }))
    }
}

/// `inner` with `δ(t,x,y)` added to `v` (and its `y`-integral to `u`).
/// Used as a negative control.
pub struct PerturbedFields<F> {
    inner: F,
    delta: Scalar3,
}

impl<F: Fields> PerturbedFields<F> {
    pub fn new(inner: F, delta: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { inner, delta: Box::new(delta) }
    }
}

struct PerturbedColumn<'a> {
    inner: Box<dyn FieldColumn + 'a>,
    delta: &'a Scalar3,
    t: f64,
    x: f64,
}

impl FieldColumn for PerturbedColumn<'_> {
    fn nu(&self) -> f64 {
        self.inner.nu()
    }
    fn h(&self) -> f64 {
        self.inner.h()
    }
    fn h_t(&self) -> f64 {
        self.inner.h_t()
    }
    fn v(&self, y: f64) -> Result<f64, Error> {
        Ok(self.inner.v(y)? + (self.delta)(self.t, self.x, y))
    }
    fn u(&self, y: f64) -> Result<f64, Error> {
        let d = gauss_legendre(|s| (self.delta)(self.t, self.x, s), 0.0, y);
        Ok(self.inner.u(y)? + d)
    }
}

impl<F: Fields> Fields for PerturbedFields<F> {
    fn column(&self, t: f64, x: f64) -> Result<Box<dyn FieldColumn + '_>, Error> {
        Ok(Box::new(PerturbedColumn { inner: self.inner.column(t, x)?, delta: &self.delta, t, x }))
    }
}
