use crate::math::{exp, Complex};
use crate::quadrature::Integrator;
use crate::transform::Regime;

use super::{Kernel, VolterraError, VolterraSolution};

/// A real solution branch `u_1` of `u'' = V u`.
pub trait Branch {
    fn value(&self, x: f64) -> Result<f64, VolterraError>;
    fn derivative(&self, x: f64) -> Result<f64, VolterraError>;
    /// `u_1(x) / u_1(x + t)`, evaluated without forming large values.
    fn ratio(&self, x: f64, t: f64) -> Result<f64, VolterraError> {
        Ok(self.value(x)? / self.value(x + t)?)
    }
}

/// Reduction of order:
/// `u_2(x) = k u_1(x) int_x^inf u_1^{-2}` with `k = 2` for the exponential
/// normalisation and `k = 1` for the algebraic one, so that
/// `u_1 u_2' - u_1' u_2 = -k`.
///
/// The integral is taken as `J = int_0^inf (u_1(x) / u_1(x + t))^2 dt`,
/// giving `u_2 = k J / u_1` and `u_2' = k (u_1' J / u_1 - 1) / u_1`.
pub fn second_solution<B: Branch + ?Sized>(u1: &B, x: f64, regime: Regime) -> Result<(f64, f64), VolterraError> {
    let factor = match regime {
        Regime::AlgebraicInfinity => 1.0,
        Regime::ExpInfinity | Regime::ConstantFExp | Regime::ExpSingular => 2.0,
        _ => return Err(VolterraError::InvalidInput("reduction of order needs a non-oscillatory regime")),
    };
    let u = u1.value(x)?;
    if u == 0.0 || !u.is_finite() {
        return Err(VolterraError::VanishingBranch { x });
    }
    let mut failure = None;
    let j = Integrator::new(1e-15).to_infinity(
        |t| match u1.ratio(x, t) {
            Ok(r) => r * r,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let j = j?.value;
    let du = u1.derivative(x)?;
    Ok((factor * j / u, factor * (du * j / u - 1.0) / u))
}

/// `u_1(y) = scale e^{y - a} z(y)` from a `zeta = 1` solution.
pub struct ExponentialBranch<'a> {
    pub sol: &'a VolterraSolution,
    pub scale: f64,
}

impl<'a> ExponentialBranch<'a> {
    /// Normalised so that `e^{-(y - a)} u_1 -> 1`.
    pub fn normalized(sol: &'a VolterraSolution) -> Self {
        Self { sol, scale: 1.0 / sol.z_infinity.re }
    }

    fn z(&self, y: f64) -> f64 {
        self.sol.z_at(y).re
    }
}

impl Branch for ExponentialBranch<'_> {
    fn value(&self, y: f64) -> Result<f64, VolterraError> {
        Ok(self.scale * exp(y - self.sol.a) * self.z(y))
    }

    fn derivative(&self, y: f64) -> Result<f64, VolterraError> {
        let dz: Complex = self.sol.dz_at(y);
        Ok(self.scale * exp(y - self.sol.a) * (self.z(y) + dz.re))
    }

    fn ratio(&self, y: f64, t: f64) -> Result<f64, VolterraError> {
        let den = self.z(y + t);
        if den == 0.0 {
            return Err(VolterraError::VanishingBranch { x: y + t });
        }
        Ok(exp(-t) * self.z(y) / den)
    }
}

/// `u_1(x) = scale x z(x)` from an algebraic solution.
pub struct AlgebraicBranch<'a> {
    pub sol: &'a VolterraSolution,
    pub scale: f64,
}

impl<'a> AlgebraicBranch<'a> {
    /// Normalised so that `u_1' -> 1`.
    pub fn normalized(sol: &'a VolterraSolution) -> Self {
        debug_assert_eq!(sol.kernel, Kernel::Algebraic);
        Self { sol, scale: 1.0 / sol.z_infinity.re }
    }
}

impl Branch for AlgebraicBranch<'_> {
    fn value(&self, x: f64) -> Result<f64, VolterraError> {
        Ok(self.scale * x * self.sol.z_at(x).re)
    }

    fn derivative(&self, x: f64) -> Result<f64, VolterraError> {
        Ok(self.scale * (self.sol.z_at(x).re + x * self.sol.dz_at(x).re))
    }

    fn ratio(&self, x: f64, t: f64) -> Result<f64, VolterraError> {
        let den = (x + t) * self.sol.z_at(x + t).re;
        if den == 0.0 {
            return Err(VolterraError::VanishingBranch { x: x + t });
        }
        Ok(x * self.sol.z_at(x).re / den)
    }
}
