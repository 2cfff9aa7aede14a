use crate::expr::{Expr, UnaryOp};
use crate::math::ln;

use super::{CoefficientSplit, Interval, SignOfF, TransformError};

/// The problem for `w(s) = s u(1/s)`: `w'' = (f~ + g~) w` with
/// `f~(s) = s^{-4} f(1/s)` and `g~(s) = s^{-4} g(1/s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvertedProblem {
    pub f_tilde: Expr,
    pub g_tilde: Expr,
    /// The inverted split on `(1/right, 1/left)`.
    pub split: CoefficientSplit,
}

fn reciprocal(v: f64) -> f64 {
    if v == 0.0 {
        f64::INFINITY
    } else if v.is_infinite() {
        0.0
    } else {
        1.0 / v
    }
}

fn inverted_expr(e: &Expr) -> Expr {
    let inv = Expr::div(Expr::Const(1.0), Expr::Var);
    Expr::mul(Expr::pow(Expr::Var, -4.0), e.substitute(&inv))
}

/// Apply `s = 1/x` to a split. Applying it twice gives back the original
/// coefficients (up to rounding).
pub fn invert(split: &CoefficientSplit) -> Result<CoefficientSplit, TransformError> {
    let iv = split.interval();
    let interval = Interval::new(reciprocal(iv.right), reciprocal(iv.left))?;
    CoefficientSplit::new(inverted_expr(split.f()), inverted_expr(split.g()), interval)
}

/// Inversion of a problem posed near `x = 0` into one posed near infinity.
pub fn invert_at_zero(split: &CoefficientSplit) -> Result<InvertedProblem, TransformError> {
    if split.interval().left != 0.0 {
        return Err(TransformError::InvalidInterval("the zero endpoint requires an interval starting at 0"));
    }
    let inverted = invert(split)?;
    Ok(InvertedProblem { f_tilde: inverted.f().clone(), g_tilde: inverted.g().clone(), split: inverted })
}

/// For `f = 0` at zero: `x = e^{-s}`, `u = x^{1/2} w` gives
/// `w'' = g~ w` with `g~(s) = e^{-2s} (g + 1/(4x^2))|_{x = e^{-s}}`.
pub fn log_substitution(split: &CoefficientSplit) -> Result<CoefficientSplit, TransformError> {
    if split.sign_of_f() != SignOfF::IdenticallyZero {
        return Err(TransformError::InvalidInterval("the log substitution needs f = 0"));
    }
    let iv = split.interval();
    if iv.left != 0.0 {
        return Err(TransformError::InvalidInterval("the zero endpoint requires an interval starting at 0"));
    }
    let shifted = Expr::add(
        split.g().clone(),
        Expr::mul(Expr::Const(0.25), Expr::pow(Expr::Var, -2.0)),
    )
    .collect_like_terms();
    let x_of_s = Expr::unary(UnaryOp::Exp, Expr::neg(Expr::Var));
    let weight = Expr::unary(UnaryOp::Exp, Expr::mul(Expr::Const(-2.0), Expr::Var));
    let g = Expr::mul(weight, shifted.substitute(&x_of_s));
    let left = if iv.right.is_finite() { (-ln(iv.right)).max(0.0) } else { 0.0 };
    CoefficientSplit::new(Expr::Const(0.0), g, Interval::new(left, f64::INFINITY)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::math::{exp, pow, rel_diff};
    use crate::transform::compute_psi;

    fn split(f: &str, g: &str) -> CoefficientSplit {
        CoefficientSplit::new(parse(f).unwrap(), parse(g).unwrap(), Interval::half_line()).unwrap()
    }

    #[test]
    fn bessel_f_is_self_dual() {
        let inv = invert_at_zero(&split("1/x^2", "1 - 1/(4*x^2)")).unwrap();
        for s in [1e-3, 0.2, 1.0, 30.0, 1e4] {
            assert!(rel_diff(inv.f_tilde.eval(s).unwrap(), 1.0 / (s * s)) < 1e-14);
        }
    }

    #[test]
    fn unit_f_inverts_to_quartic() {
        let inv = invert_at_zero(&split("1", "0")).unwrap();
        for s in [0.1, 2.0, 7.0] {
            assert!(rel_diff(inv.f_tilde.eval(s).unwrap(), pow(s, -4.0)) < 1e-15);
        }
    }

    #[test]
    fn involution() {
        let original = split("x^3 + exp(-x)", "sin(x)/x");
        let twice = invert(&invert(&original).unwrap()).unwrap();
        for x in [0.01, 0.5, 3.0, 40.0] {
            assert!(rel_diff(twice.f().eval(x).unwrap(), original.f().eval(x).unwrap()) < 1e-10);
            assert!(rel_diff(twice.g().eval(x).unwrap(), original.g().eval(x).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn psi_transforms_as_a_density() {
        let original = split("1/x^2", "1 - 1/(4*x^2)");
        let inv = invert_at_zero(&original).unwrap();
        let (psi, psi_t) = (compute_psi(&original).unwrap(), compute_psi(&inv.split).unwrap());
        for s in crate::math::log_space(1e-3, 1e3, 20) {
            let expected = psi.eval(1.0 / s).unwrap() / (s * s);
            assert!(rel_diff(psi_t.eval(s).unwrap(), expected) < 1e-8, "s = {s}");
        }
    }

    #[test]
    fn log_substitution_cancels_inverse_square() {
        let s = log_substitution(&split("0", "1 - 1/(4*x^2)")).unwrap();
        assert_eq!(s.sign_of_f(), SignOfF::IdenticallyZero);
        for t in [0.0, 1.0, 25.0, 300.0] {
            assert_eq!(s.g().eval(t).unwrap(), exp(-2.0 * t));
        }
    }
}
