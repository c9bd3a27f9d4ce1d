//! Anisotropic high-order nonlocal functionals over symmetric convex bodies.
//!
//! The crate evaluates level-set (`δ^p / ‖x−y‖_K^{N+mp}`) and mollified
//! (`|R f|^p / ‖x−y‖_K^{mp} · ρ_ε`) double integrals built from either the
//! centered finite-difference remainder or the Taylor remainder, together
//! with the closed-form local quantities they converge to, and drives
//! parameter sweeps that extrapolate the nonlocal values to their limits.
//!
//! Module map:
//!
//! - [`convex_body`]: gauges, membership, sampling and moment norms of `K`
//! - [`calculus`]: multi-indices, test functions with exact derivatives,
//!   differences and remainders
//! - [`mollifier`]: admissible radial families and their certification
//! - [`integrate`]: seeded parallel Monte Carlo and tensor quadrature
//! - [`functionals`]: the four nonlocal functionals and their limits
//! - [`convergence`]: sweeps, limit fits and Aitken acceleration
//! - [`identities`]: the exact and quadrature identity suite

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod convergence;
pub mod convex_body;
pub mod error;
pub mod functionals;
pub mod identities;
pub mod integrate;
pub mod mollifier;
pub mod quadrature;

pub use calculus::{MultiIndex, TestFunction};
pub use convergence::{Schedule, SweepResult};
pub use convex_body::{BodyKind, ConvexBody};
pub use error::{Error, Result};
pub use functionals::{FunctionalSpec, Theorem};
pub use integrate::{Estimate, IntegrationPlan, Method};
pub use mollifier::{MollifierFamily, MollifierKind};
