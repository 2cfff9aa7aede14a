//! Scalar expressions in the single variable `x`.
//!
//! Expressions are immutable trees. Powers carry a constant exponent, which
//! keeps [`Expr::derivative`] closed over the tree type and total.

mod deriv;
mod display;
mod parser;
mod simplify;

use alloc::boxed::Box;
use alloc::string::{String, ToString};

use crate::math;

pub use parser::{parse, ParseError, ParseErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Abs,
    /// `sign(a)` with `sign(0) = 0`. Produced by differentiating `abs`.
    Sign,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Abs => "abs",
            UnaryOp::Sign => "sign",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sqrt" => UnaryOp::Sqrt,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "abs" => UnaryOp::Abs,
            "sign" => UnaryOp::Sign,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    /// `base ^ exponent` with a constant exponent.
    Pow(Box<Expr>, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    LogOfNonPositive,
    SqrtOfNegative,
    DivisionByZero,
    PowOfNegative,
    NonFinite,
}

impl core::fmt::Display for DomainKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            DomainKind::LogOfNonPositive => "log of a non-positive value",
            DomainKind::SqrtOfNegative => "sqrt of a negative value",
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::PowOfNegative => "fractional power of a negative value",
            DomainKind::NonFinite => "non-finite value",
        })
    }
}

/// Evaluation failure, naming the offending sub-expression.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{kind} in `{node}` at x = {x}")]
pub struct EvalError {
    pub kind: DomainKind,
    pub node: String,
    pub x: f64,
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn var() -> Self {
        Expr::Var
    }

    pub fn neg(a: Expr) -> Self {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Unary(UnaryOp::Neg, inner) => *inner,
            a => Expr::Unary(UnaryOp::Neg, Box::new(a)),
        }
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Self {
        if op == UnaryOp::Neg {
            return Expr::neg(a);
        }
        if let Expr::Const(c) = a {
            if let Ok(v) = apply_unary(op, c) {
                if v.is_finite() {
                    return Expr::Const(v);
                }
            }
        }
        Expr::Unary(op, Box::new(a))
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
            (Expr::Const(z), b) if z == 0.0 => b,
            (a, Expr::Const(z)) if z == 0.0 => a,
            (a, b) => Expr::Binary(BinaryOp::Add, Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Self {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
            (a, Expr::Const(z)) if z == 0.0 => a,
            (Expr::Const(z), b) if z == 0.0 => Expr::neg(b),
            (a, b) => Expr::Binary(BinaryOp::Sub, Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Self {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
            (Expr::Const(z), _) | (_, Expr::Const(z)) if z == 0.0 => Expr::Const(0.0),
            (Expr::Const(o), b) if o == 1.0 => b,
            (a, Expr::Const(o)) if o == 1.0 => a,
            (a, b) => Expr::Binary(BinaryOp::Mul, Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Self {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) if y != 0.0 => Expr::Const(x / y),
            (Expr::Const(z), b) if z == 0.0 && !matches!(b, Expr::Const(_)) => Expr::Const(0.0),
            (a, Expr::Const(o)) if o == 1.0 => a,
            (a, b) => Expr::Binary(BinaryOp::Div, Box::new(a), Box::new(b)),
        }
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Self {
        match op {
            BinaryOp::Add => Expr::add(a, b),
            BinaryOp::Sub => Expr::sub(a, b),
            BinaryOp::Mul => Expr::mul(a, b),
            BinaryOp::Div => Expr::div(a, b),
        }
    }

    pub fn pow(base: Expr, exponent: f64) -> Self {
        if exponent == 1.0 {
            return base;
        }
        if exponent == 0.0 {
            return Expr::Const(1.0);
        }
        if let Expr::Const(c) = base {
            if let Ok(v) = apply_pow(c, exponent) {
                if v.is_finite() {
                    return Expr::Const(v);
                }
            }
        }
        Expr::Pow(Box::new(base), exponent)
    }

    /// Whether the tree mentions `x`.
    pub fn contains_var(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var => true,
            Expr::Unary(_, a) | Expr::Pow(a, _) => a.contains_var(),
            Expr::Binary(_, a, b) => a.contains_var() || b.contains_var(),
        }
    }

    /// The value of a variable-free expression.
    pub fn constant_value(&self) -> Option<f64> {
        if self.contains_var() {
            return None;
        }
        self.eval(0.0).ok()
    }

    /// Replace every occurrence of `x` by `replacement`.
    pub fn substitute(&self, replacement: &Expr) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var => replacement.clone(),
            Expr::Unary(op, a) => Expr::unary(*op, a.substitute(replacement)),
            Expr::Binary(op, a, b) => {
                Expr::binary(*op, a.substitute(replacement), b.substitute(replacement))
            }
            Expr::Pow(a, p) => Expr::pow(a.substitute(replacement), *p),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var => 1,
            Expr::Unary(_, a) | Expr::Pow(a, _) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let fail = |kind: DomainKind, node: &Expr| EvalError {
            kind,
            node: node.to_string(),
            x,
        };
        let value = match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Unary(op, a) => {
                let v = a.eval(x)?;
                apply_unary(*op, v).map_err(|k| fail(k, self))?
            }
            Expr::Binary(op, a, b) => {
                let (u, v) = (a.eval(x)?, b.eval(x)?);
                match op {
                    BinaryOp::Add => u + v,
                    BinaryOp::Sub => u - v,
                    BinaryOp::Mul => u * v,
                    BinaryOp::Div => {
                        if v == 0.0 {
                            return Err(fail(DomainKind::DivisionByZero, self));
                        }
                        u / v
                    }
                }
            }
            Expr::Pow(a, p) => {
                let v = a.eval(x)?;
                apply_pow(v, *p).map_err(|k| fail(k, self))?
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(fail(DomainKind::NonFinite, self))
        }
    }

    /// Evaluate, mapping failures to NaN. Convenient inside quadrature, which
    /// reports non-finite samples itself.
    pub fn eval_or_nan(&self, x: f64) -> f64 {
        self.eval(x).unwrap_or(f64::NAN)
    }
}

fn apply_unary(op: UnaryOp, v: f64) -> Result<f64, DomainKind> {
    Ok(match op {
        UnaryOp::Neg => -v,
        UnaryOp::Exp => math::exp(v),
        UnaryOp::Log => {
            if v <= 0.0 {
                return Err(DomainKind::LogOfNonPositive);
            }
            math::ln(v)
        }
        UnaryOp::Sqrt => {
            if v < 0.0 {
                return Err(DomainKind::SqrtOfNegative);
            }
            math::sqrt(v)
        }
        UnaryOp::Sin => math::sin(v),
        UnaryOp::Cos => math::cos(v),
        UnaryOp::Abs => v.abs(),
        UnaryOp::Sign => {
            if v > 0.0 {
                1.0
            } else if v < 0.0 {
                -1.0
            } else {
                0.0
            }
        }
    })
}

fn apply_pow(base: f64, p: f64) -> Result<f64, DomainKind> {
    let integral = p == (p as i32) as f64;
    if base == 0.0 && p < 0.0 {
        return Err(DomainKind::DivisionByZero);
    }
    if integral {
        return Ok(powi(base, p as i32));
    }
    if base < 0.0 {
        return Err(DomainKind::PowOfNegative);
    }
    Ok(math::pow(base, p))
}

fn powi(base: f64, n: i32) -> f64 {
    let mut result = 1.0;
    let mut b = base;
    let mut e = n.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            result *= b;
        }
        b *= b;
        e >>= 1;
    }
    if n < 0 {
        1.0 / result
    } else {
        result
    }
}

impl core::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
