use crate::expr::{EvalError, Expr, UnaryOp};

use super::{CoefficientSplit, SignOfF, TransformError};

/// `psi_{f,g} = -A A'' + g A^2` with `A = |f|^{-1/4}`, built symbolically.
#[derive(Debug, Clone, PartialEq)]
pub struct Psi {
    pub expr: Expr,
    pub amplitude: Expr,
}

impl Psi {
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        self.expr.eval(x)
    }
}

pub fn compute_psi(split: &CoefficientSplit) -> Result<Psi, TransformError> {
    if split.sign_of_f() == SignOfF::IdenticallyZero {
        return Err(TransformError::HypothesisFailed {
            check: "psi".into(),
            detail: "psi_{f,g} is undefined for f = 0".into(),
        });
    }
    let amplitude = split.amplitude();
    let second = amplitude.nth_derivative(2);
    let abs_f = Expr::unary(UnaryOp::Abs, split.f().clone());
    let expr = Expr::add(
        Expr::neg(Expr::mul(amplitude.clone(), second)),
        Expr::mul(split.g().clone(), Expr::pow(abs_f, -0.5)),
    );
    Ok(Psi { expr, amplitude })
}
