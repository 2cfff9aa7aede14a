//! Independent ground truth: a Dormand-Prince integrator for `u'' = V u`,
//! Bessel closed forms and ascending series, a fixture registry, and fits
//! of asymptotic constants.

mod bessel;
mod fit;
mod fixtures;
mod ivp;

use alloc::string::String;

pub use bessel::{
    bessel_i_series, bessel_j_series, bessel_k0_series, bessel_y0_series, closed_form_half, closed_form_half_derivative,
    log_closed_form_half_i, small_argument_series, BesselFunction, BesselKind, SeriesValue,
};
pub use fit::{fit_asymptotic_constants, fit_oscillatory, fit_profile, fit_ratio, AsymptoticFit, FitModel};
pub use fixtures::Fixture;
pub use ivp::{integrate_ivp, integrate_ivp_at, IvpOptions, OdeSample, OdeTrajectory};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("step size underflow near x = {x}")]
    StepUnderflow { x: f64 },
    #[error("step budget of {steps} exhausted at x = {x}")]
    BudgetExceeded { steps: usize, x: f64 },
    #[error("coefficient is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("series truncation bound {bound:e} not met after {terms} terms")]
    Truncation { bound: f64, terms: usize },
    #[error("fit window [{lo}, {hi}] holds too few samples")]
    Window { lo: f64, hi: f64 },
    #[error("fit drift {drift:e} exceeds {tol:e}; the asymptotic regime is not reached, try a later window")]
    Drift { drift: f64, tol: f64 },
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("invalid oracle input: {0}")]
    InvalidInput(&'static str),
    #[error(transparent)]
    Transform(#[from] crate::transform::TransformError),
}
