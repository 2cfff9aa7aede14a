//! Coefficient splits, `psi_{f,g}`, the Liouville phase, regime
//! classification, inversion at a singular point and leading approximants.

mod approximant;
mod invert;
mod phase;
mod psi;
mod regime;

use alloc::string::String;
use alloc::vec::Vec;

use crate::expr::{EvalError, Expr};
use crate::math::{fabs, log_space};
use crate::quadrature::QuadError;

pub use approximant::{build_approximants, ExponentType, LGApproximant};
pub use invert::{invert, invert_at_zero, log_substitution, InvertedProblem};
pub use phase::{liouville_phase, Orientation, PhaseMap};
pub use psi::{compute_psi, Psi};
pub use regime::{classify_regime, Classification, HypothesisCheck, Reduction, Regime};

/// Number of log-spaced sign probes.
pub const SIGN_GRID_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadError),
    #[error("f changes sign or vanishes near x = {x} (turning point); not supported")]
    AmbiguousSign { x: f64 },
    #[error("hypothesis failed: {check}: {detail}")]
    HypothesisFailed { check: String, detail: String },
    #[error("regime {regime:?} does not match the coefficient split")]
    RegimeMismatch { regime: Regime },
    #[error("invalid interval: {0}")]
    InvalidInterval(&'static str),
}

/// Which end of the interval is analysed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Infinity,
    Zero,
}

impl Endpoint {
    pub fn name(self) -> &'static str {
        match self {
            Endpoint::Infinity => "infinity",
            Endpoint::Zero => "zero",
        }
    }
}

/// Open interval `(left, right)`; `left = 0` stands for `0+`, `right` may be
/// infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub left: f64,
    pub right: f64,
}

impl Interval {
    pub fn new(left: f64, right: f64) -> Result<Self, TransformError> {
        if !(left >= 0.0 && left.is_finite()) {
            return Err(TransformError::InvalidInterval("left end must be finite and non-negative"));
        }
        if !(right > left) {
            return Err(TransformError::InvalidInterval("right end must exceed the left end"));
        }
        Ok(Self { left, right })
    }

    pub fn half_line() -> Self {
        Self { left: 0.0, right: f64::INFINITY }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.left && x < self.right || x == self.left && self.left > 0.0 || x == self.right
    }

    /// Points used for sign checks: log-spaced interior points plus probes
    /// next to each end.
    pub fn sample_grid(&self) -> Vec<f64> {
        let lo = if self.left > 0.0 { self.left } else { 1e-6_f64.min(self.right * 1e-6) };
        let hi = if self.right.is_finite() { self.right } else { lo.max(1.0) * 1e6 };
        let mut pts = log_space(lo, hi, SIGN_GRID_POINTS);
        if self.left == 0.0 {
            pts.insert(0, lo * 1e-3);
        }
        if !self.right.is_finite() {
            pts.push(hi * 1e3);
        }
        pts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignOfF {
    Positive,
    Negative,
    IdenticallyZero,
}

/// `V = f + g` split into a leading part `f` and a perturbation `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSplit {
    f: Expr,
    g: Expr,
    interval: Interval,
    sign: SignOfF,
}

impl CoefficientSplit {
    /// Checks the sign of `f` on [`Interval::sample_grid`] and that `f` and
    /// `g` evaluate there.
    pub fn new(f: Expr, g: Expr, interval: Interval) -> Result<Self, TransformError> {
        let grid = interval.sample_grid();
        let sign = if f.constant_value() == Some(0.0) {
            SignOfF::IdenticallyZero
        } else {
            let mut sign = None;
            for &x in &grid {
                let v = f.eval(x)?;
                let s = if v > 0.0 {
                    SignOfF::Positive
                } else if v < 0.0 {
                    SignOfF::Negative
                } else {
                    return Err(TransformError::AmbiguousSign { x });
                };
                match sign {
                    None => sign = Some(s),
                    Some(prev) if prev != s => return Err(TransformError::AmbiguousSign { x }),
                    _ => {}
                }
            }
            sign.unwrap_or(SignOfF::Positive)
        };
        for &x in &grid {
            g.eval(x)?;
        }
        Ok(Self { f, g, interval, sign })
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    pub fn g(&self) -> &Expr {
        &self.g
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn sign_of_f(&self) -> SignOfF {
        self.sign
    }

    /// `V = f + g`.
    pub fn potential(&self) -> Expr {
        Expr::add(self.f.clone(), self.g.clone())
    }

    /// `|f|^{1/2}` as an expression.
    pub fn phase_density(&self) -> Expr {
        Expr::pow(Expr::unary(crate::expr::UnaryOp::Abs, self.f.clone()), 0.5)
    }

    /// `|f|^{-1/4}` as an expression.
    pub fn amplitude(&self) -> Expr {
        Expr::pow(Expr::unary(crate::expr::UnaryOp::Abs, self.f.clone()), -0.25)
    }

    /// `f ≡ ±1` (as a constant tree).
    pub fn constant_unit_f(&self) -> Option<f64> {
        self.f.constant_value().filter(|c| fabs(fabs(*c) - 1.0) == 0.0)
    }
}

/// Map a quadrature failure back to the evaluation error behind it, if any.
pub(crate) fn explain(err: QuadError, exprs: &[&Expr]) -> TransformError {
    if let QuadError::NonFinite { x } = err {
        for e in exprs {
            if let Err(ev) = e.eval(x) {
                return TransformError::Eval(ev);
            }
        }
    }
    TransformError::Quadrature(err)
}
