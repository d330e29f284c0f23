//! Solutions of the Benney long-wave system built from a kinetic
//! distribution function, together with independent residual oracles.
//!
//! The Benney system for a velocity `v(t,x,y)` and depth `h(t,x)`
//!
//! ```text
//! v_t + v v_x − (∫₀^y v_x dy′) v_y + h_x = 0,     h_t + ∂x ∫₀^h v dy = 0
//! ```
//!
//! is parametrized by a distribution `G(t,x,λ)` transported along
//! `dx/dt = −λ, dλ/dt = H_xx` and by the boundary characteristics
//! `ν = λ(g_lo)`, `μ = λ(g_hi)`:
//!
//! ```text
//! y + ∫_ν^{−v} G dλ = 0,   u = ∫_ν^{−v} λ G dλ,   h = s_h ∫_ν^μ G dλ
//! ```
//!
//! Modules, bottom-up:
//!
//! * [`expr`]: a small arithmetic language with symbolic differentiation,
//!   used for user-supplied functions.
//! * [`numerics`]: quadrature, bracketed roots, 2-D Newton, finite
//!   differences, RK4.
//! * [`families`]: the free-streaming, constant-`G` hodograph and rational
//!   solution families.
//! * [`reconstruction`]: from `(G, ν, μ)` or `λ(t,x,g)` to `v, u, h`.
//! * [`verifier`]: finite-difference residuals of every equation in play,
//!   plus convergence-order fitting.
//! * [`transport`]: characteristics of the kinetic equation.
//! * [`ode_connection`]: the `f`/`X` reformulation and its identities.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
#[macro_use]
extern crate std;

pub mod expr;
pub mod families;
pub mod numerics;
pub mod ode_connection;
pub mod reconstruction;
pub mod transport;
pub mod verifier;

mod error;

pub use error::Error;
pub use families::{BoundaryPair, Distribution, DistributionColumn, LambdaFamily, Provenance, TimeSlice};
pub use numerics::{GridSpec, Tolerance};
pub use reconstruction::{FieldColumn, Fields, SignConvention};
pub use verifier::ResidualReport;
