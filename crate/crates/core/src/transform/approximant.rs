use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;

use crate::expr::Expr;
use crate::math::{ln, Complex};

use super::{CoefficientSplit, Orientation, PhaseMap, Regime, SignOfF, TransformError};

/// Exponent `zeta` of a leading approximant `|f|^{-1/4} e^{zeta Phi}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentType {
    PlusOne,
    MinusOne,
    PlusI,
    MinusI,
}

impl ExponentType {
    pub fn value(self) -> Complex {
        match self {
            ExponentType::PlusOne => Complex::new(1.0, 0.0),
            ExponentType::MinusOne => Complex::new(-1.0, 0.0),
            ExponentType::PlusI => Complex::new(0.0, 1.0),
            ExponentType::MinusI => Complex::new(0.0, -1.0),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            ExponentType::PlusOne => "+1",
            ExponentType::MinusOne => "-1",
            ExponentType::PlusI => "+i",
            ExponentType::MinusI => "-i",
        }
    }
}

/// Leading approximant `|f|^{-1/4} e^{zeta Phi(x)}`.
#[derive(Debug, Clone)]
pub struct LGApproximant {
    pub zeta: ExponentType,
    phase: Arc<PhaseMap>,
    amplitude: Expr,
}

impl LGApproximant {
    pub fn new(zeta: ExponentType, phase: Arc<PhaseMap>, amplitude: Expr) -> Self {
        Self { zeta, phase, amplitude }
    }

    pub fn phase_map(&self) -> &PhaseMap {
        &self.phase
    }

    pub fn phase(&self, x: f64) -> Result<f64, TransformError> {
        self.phase.phase(x)
    }

    /// `|f(x)|^{-1/4}`.
    pub fn amplitude(&self, x: f64) -> Result<f64, TransformError> {
        Ok(self.amplitude.eval(x)?)
    }

    pub fn normalized_value(&self, x: f64) -> Result<Complex, TransformError> {
        let phi = self.phase(x)?;
        Ok((self.zeta.value() * phi).exp() * self.amplitude(x)?)
    }

    /// Leading-order derivative `zeta Phi'(x) |f|^{-1/4} e^{zeta Phi}`, i.e.
    /// `±zeta |f|^{1/4} e^{zeta Phi}` depending on the phase orientation.
    pub fn normalized_derivative(&self, x: f64) -> Result<Complex, TransformError> {
        let d = self.phase.phase_derivative(x)?;
        Ok(self.normalized_value(x)? * self.zeta.value() * d)
    }

    /// `ln |normalized_value|`, usable where the value itself overflows.
    pub fn log_magnitude(&self, x: f64) -> Result<f64, TransformError> {
        Ok(ln(self.amplitude(x)?) + self.zeta.value().re * self.phase(x)?)
    }

    /// Printed form of the approximant.
    pub fn formula(&self) -> String {
        let phi = match self.phase.orientation() {
            Orientation::Forward => format!("int_{}^x {} dr", self.phase.base(), self.phase.density_expr()),
            Orientation::Backward => format!("int_x^{} {} dr", self.phase.base(), self.phase.density_expr()),
        };
        format!("({}) * exp({} * Phi(x)), Phi(x) = {}", self.amplitude, self.zeta.symbol(), phi)
    }
}

/// Dominant and recessive (or `e^{+i Phi}` and `e^{-i Phi}`) approximants
/// with phase based at `a`. Singular regimes use `Phi(x) = int_x^a`.
pub fn build_approximants(
    regime: Regime,
    split: &CoefficientSplit,
    a: f64,
) -> Result<(LGApproximant, LGApproximant), TransformError> {
    let sign_ok = match regime {
        Regime::ExpInfinity | Regime::ExpSingular | Regime::ConstantFExp => split.sign_of_f() == SignOfF::Positive,
        Regime::OscInfinity | Regime::OscSingular | Regime::ConstantFOsc => split.sign_of_f() == SignOfF::Negative,
        Regime::AlgebraicInfinity => false,
    };
    let unit_ok = !matches!(regime, Regime::ConstantFExp | Regime::ConstantFOsc) || split.constant_unit_f().is_some();
    if !sign_ok || !unit_ok {
        return Err(TransformError::RegimeMismatch { regime });
    }
    let (orientation, extent) = if regime.is_singular() {
        (Orientation::Backward, a * 1e-12)
    } else {
        (Orientation::Forward, a.max(1.0) * 1e6)
    };
    let map = Arc::new(PhaseMap::new(split, a, orientation, extent, 1e-13)?);
    let (plus, minus) = if regime.is_oscillatory() {
        (ExponentType::PlusI, ExponentType::MinusI)
    } else {
        (ExponentType::PlusOne, ExponentType::MinusOne)
    };
    let amplitude = split.amplitude();
    Ok((
        LGApproximant::new(plus, map.clone(), amplitude.clone()),
        LGApproximant::new(minus, map, amplitude),
    ))
}
