use alloc::vec::Vec;

use crate::expr::Expr;
use crate::math::fabs;
use crate::quadrature::{Integrator, QuadError};
use crate::transform::{explain, PhaseMap};

use super::VolterraError;

const TAIL_TOL: f64 = 1e-13;

/// Weight applied to the forcing in tail integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    /// `int g`
    One,
    /// `int |g|`
    Abs,
    /// `int s g`
    S,
    /// `int s |g|`
    AbsS,
}

impl Weight {
    fn apply(self, s: f64, g: f64) -> f64 {
        match self {
            Weight::One => g,
            Weight::Abs => fabs(g),
            Weight::S => s * g,
            Weight::AbsS => s * fabs(g),
        }
    }
}

/// The forcing sampled on a uniform grid `y_k = a + k h`.
#[derive(Debug, Clone, Default)]
pub struct Sampled {
    pub g: Vec<f64>,
    /// `int |g|` over each cell, or `int s |g|` when weighted.
    pub cell_l1: Vec<f64>,
}

/// The perturbation `g` in a Volterra equation on `[a, inf)`.
pub trait Forcing {
    fn value(&self, y: f64) -> Result<f64, VolterraError>;

    /// Samples at `a + k h`, `k = 0..=n`, with per-cell `L1` masses
    /// (`s`-weighted when `weighted`).
    fn sample(&self, a: f64, h: f64, n: usize, weighted: bool) -> Result<Sampled, VolterraError> {
        let mut out = Sampled { g: Vec::with_capacity(n + 1), cell_l1: Vec::with_capacity(n) };
        for k in 0..=n {
            out.g.push(self.value(a + h * k as f64)?);
        }
        for k in 0..n {
            let lo = a + h * k as f64;
            let w = if weighted { Weight::AbsS } else { Weight::Abs };
            out.cell_l1.push(gauss_cell(|s| self.value(s).map(|g| w.apply(s, g)), lo, lo + h)?);
        }
        Ok(out)
    }

    /// `int_y^inf weight(s, g(s)) ds`.
    fn tail(&self, y: f64, weight: Weight) -> Result<f64, VolterraError>;
}

/// One 15-point Kronrod panel; enough for smooth per-cell masses.
fn gauss_cell<F: FnMut(f64) -> Result<f64, VolterraError>>(mut f: F, a: f64, b: f64) -> Result<f64, VolterraError> {
    let mut err = None;
    let r = Integrator::new(f64::MAX).finite(
        |s| match f(s) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(r?.value)
}

/// Forcing given by an expression in the working variable.
#[derive(Debug, Clone)]
pub struct ExprForcing {
    pub g: Expr,
}

impl ExprForcing {
    pub fn new(g: Expr) -> Self {
        Self { g }
    }
}

impl Forcing for ExprForcing {
    fn value(&self, y: f64) -> Result<f64, VolterraError> {
        Ok(self.g.eval(y)?)
    }

    fn tail(&self, y: f64, weight: Weight) -> Result<f64, VolterraError> {
        Integrator::new(TAIL_TOL)
            .to_infinity(|s| weight.apply(s, self.g.eval_or_nan(s)), y)
            .map(|r| r.value)
            .map_err(|e| explain(e, &[&self.g]).into())
    }
}

/// Forcing given by a closure, with tails by quadrature.
pub struct FnForcing<F: Fn(f64) -> f64> {
    pub f: F,
}

impl<F: Fn(f64) -> f64> FnForcing<F> {
    pub fn new(f: F) -> Self {
        Self { f }
    }
}

impl<F: Fn(f64) -> f64> Forcing for FnForcing<F> {
    fn value(&self, y: f64) -> Result<f64, VolterraError> {
        let v = (self.f)(y);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(VolterraError::NonFinite { y })
        }
    }

    fn tail(&self, y: f64, weight: Weight) -> Result<f64, VolterraError> {
        Ok(Integrator::new(TAIL_TOL).to_infinity(|s| weight.apply(s, (self.f)(s)), y)?.value)
    }
}

/// `h(y) = psi(x) |f(x)|^{-1/2}` with `y = Phi(x)`: the perturbation left
/// after the Liouville transformation. `int |h| dy = int |psi| dx`.
#[derive(Debug, Clone)]
pub struct LiouvilleForcing {
    pub psi: Expr,
    pub map: PhaseMap,
}

impl LiouvilleForcing {
    pub fn new(psi: Expr, map: PhaseMap) -> Self {
        Self { psi, map }
    }

    fn at_x(&self, x: f64) -> Result<f64, VolterraError> {
        let rho = self.map.density(x)?;
        Ok(self.psi.eval(x)? / rho)
    }
}

impl Forcing for LiouvilleForcing {
    fn value(&self, y: f64) -> Result<f64, VolterraError> {
        let x = self.map.inverse(y)?;
        self.at_x(x)
    }

    fn sample(&self, a: f64, h: f64, n: usize, weighted: bool) -> Result<Sampled, VolterraError> {
        if weighted {
            return Err(VolterraError::InvalidInput("s-weighted masses are not defined after the Liouville step"));
        }
        let start = self.map.inverse(a)?;
        let xs = self.map.march(start, h, n)?;
        let mut out = Sampled { g: Vec::with_capacity(n + 1), cell_l1: Vec::with_capacity(n) };
        for &x in &xs {
            out.g.push(self.at_x(x)?);
        }
        for w in xs.windows(2) {
            out.cell_l1.push(gauss_cell(|x| Ok(fabs(self.psi.eval(x)?)), w[0], w[1])?);
        }
        Ok(out)
    }

    fn tail(&self, y: f64, weight: Weight) -> Result<f64, VolterraError> {
        let x = self.map.inverse(y)?;
        let integrand = |x: f64| -> f64 {
            let p = self.psi.eval_or_nan(x);
            match weight {
                Weight::One => p,
                Weight::Abs => fabs(p),
                _ => f64::NAN,
            }
        };
        if matches!(weight, Weight::S | Weight::AbsS) {
            return Err(VolterraError::InvalidInput("s-weighted tails are not defined after the Liouville step"));
        }
        Integrator::new(TAIL_TOL)
            .to_infinity(integrand, x)
            .map(|r| r.value)
            .map_err(|e| match e {
                QuadError::NonFinite { .. } => explain(e, &[&self.psi]).into(),
                other => other.into(),
            })
    }
}
