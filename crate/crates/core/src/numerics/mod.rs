//! Numerical primitives shared by every other module.
//!
//! Everything here is a pure function of its arguments; callers are free to
//! evaluate many points in parallel.

mod fd;
mod grid;
mod interp;
mod newton;
mod ode;
mod quad;
mod root;

pub use fd::{central, central2, fd_partial, mixed_central, SampledField};
pub use grid::{Axis, GridSpec};
pub use interp::HermiteTable;
pub use newton::newton2d;
pub use ode::rk4_step;
pub use quad::{gauss_legendre, integrate, kronrod_nodes, QuadRule};
pub use root::{expand_bracket, find_root, newton_bracketed};

use thiserror::Error;

/// Stopping criteria for iterative routines.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_iterations: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64, max_iterations: usize) -> Result<Self, NumericsError> {
        let tol = Self { abs, rel, max_iterations };
        tol.validate()?;
        Ok(tol)
    }

    /// Tight settings used where results feed finite-difference stencils.
    pub const fn tight() -> Self {
        Self { abs: 1e-14, rel: 1e-14, max_iterations: 400 }
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        if !(self.abs > 0.0) || !(self.rel >= 0.0) || self.max_iterations == 0 {
            return Err(NumericsError::InvalidTolerance);
        }
        Ok(())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-10, rel: 1e-10, max_iterations: 200 }
    }
}

/// Maximum bisection depth of adaptive quadrature.
pub const MAX_QUAD_DEPTH: u32 = 40;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("invalid tolerance: abs must be > 0, rel >= 0 and max_iterations >= 1")]
    InvalidTolerance,
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("non-finite value at {at}")]
    NonFinite { at: f64 },
    #[error("quadrature did not converge (estimate {estimate}, error {error})")]
    QuadratureNotConverged { estimate: f64, error: f64 },
    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("maximum iterations reached")]
    MaxIterations,
    #[error("singular Jacobian (det {det})")]
    SingularJacobian { det: f64 },
    #[error("Newton iteration diverged (residual {residual})")]
    Divergence { residual: f64 },
    #[error("stencil leaves the domain on axis {axis}")]
    OutsideDomain { axis: usize },
    #[error("step size must be non-zero")]
    ZeroStep,
}
