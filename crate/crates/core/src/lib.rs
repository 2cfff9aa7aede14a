//! Certified leading-order asymptotics for `u'' = (f + g) u`.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure numerics:
//!
//! - [`expr`]: parsing, evaluation and symbolic differentiation of the scalar
//!   expressions that define `f` and `g`.
//! - [`quadrature`]: adaptive Gauss-Kronrod integration on finite and
//!   semi-infinite intervals with divergence detection.
//! - [`transform`]: `psi_{f,g}`, the Liouville phase, regime classification,
//!   inversion `s = 1/x` and the leading approximants.
//! - [`volterra`]: product-integration solvers for the Volterra equations
//!   satisfied by `z = e^{-zeta x} u`, connection constants and the second
//!   solution by reduction of order.
//! - [`certificate`]: cutoff selection and Gronwall certificates.
//! - [`oracle`]: an independent Dormand-Prince integrator, Bessel closed
//!   forms and series, fixtures, and asymptotic-constant fitting.
//! - [`analysis`]: the end-to-end pipeline tying the above together.
//!
//! IO, JSON and the command line live in the `lgasym` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod certificate;
pub mod expr;
pub mod math;
pub mod oracle;
pub mod quadrature;
pub mod transform;
pub mod volterra;

pub use analysis::{analyze, analyze_fixture, Analysis, AnalysisError, AnalysisOptions};
pub use expr::Expr;
pub use transform::{CoefficientSplit, Endpoint, Interval, Regime};
