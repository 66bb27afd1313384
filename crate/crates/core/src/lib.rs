//! Lyapunov functions `v(z) = ∫₀^∞ g(Φᵗ(z)) dt` of polynomial ODEs computed
//! through the Koopman generator.
//!
//! The generator `A*φ = fᵀ∇φ` is discretized by Galerkin projection onto an
//! orthonormal basis of a weighted space `L²_{w²}(Ω)`, the algebraic
//! Lyapunov equation `K P + P Kᵀ + ĈᵀĈ = 0` is solved, and `v` is rebuilt as
//! a sum of squares of the Gramian's eigenfunctions.
//!
//! Module map:
//! - [`model`]: polynomial fields, nuclear costs, weights and box domains.
//! - [`flow`]: adaptive Runge–Kutta flow, trajectory cost oracle, hypothesis checks.
//! - [`quadrature`]: Gauss–Legendre, composite and weighted tensor rules.
//! - [`basis`]: Legendre/B-spline tensor bases and weighted orthonormalization.
//! - [`linalg`]: dense eigen, Schur and Lyapunov kernels.
//! - [`gramian`]: generator/observation assembly, Gramian, sum-of-squares evaluation and analysis.

pub mod basis;
pub mod error;
pub mod flow;
pub mod gramian;
pub mod linalg;
pub mod model;
pub mod quadrature;

pub use error::{Error, Result};
