//! Printing with minimal parentheses. The output re-parses to the same tree.

use core::fmt::{self, Display, Formatter, Write};

use super::{BinaryOp, Expr, UnaryOp};

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Const(c) if c.is_sign_negative() => PREC_NEG,
        Expr::Const(_) | Expr::Var => PREC_ATOM,
        Expr::Unary(UnaryOp::Neg, _) => PREC_NEG,
        Expr::Unary(..) => PREC_ATOM,
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => PREC_ADD,
        Expr::Binary(..) => PREC_MUL,
        Expr::Pow(..) => PREC_POW,
    }
}

fn write_child(f: &mut Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        f.write_char('(')?;
        write!(f, "{e}")?;
        f.write_char(')')
    } else {
        write!(f, "{e}")
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.is_sign_negative() {
                    write!(f, "-{}", -c)
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Var => f.write_char('x'),
            Expr::Unary(UnaryOp::Neg, a) => {
                f.write_char('-')?;
                write_child(f, a, precedence(a) < PREC_POW)
            }
            Expr::Unary(op, a) => {
                write!(f, "{}(", op.name())?;
                write!(f, "{a}")?;
                f.write_char(')')
            }
            Expr::Binary(op, a, b) => {
                let (own, sym) = match op {
                    BinaryOp::Add => (PREC_ADD, " + "),
                    BinaryOp::Sub => (PREC_ADD, " - "),
                    BinaryOp::Mul => (PREC_MUL, "*"),
                    BinaryOp::Div => (PREC_MUL, "/"),
                };
                let pa = precedence(a);
                write_child(f, a, pa < own || (pa == PREC_NEG && own == PREC_MUL))?;
                f.write_str(sym)?;
                let pb = precedence(b);
                write_child(f, b, pb <= own || pb == PREC_NEG)
            }
            Expr::Pow(a, p) => {
                write_child(f, a, precedence(a) < PREC_ATOM)?;
                if p.is_sign_negative() {
                    write!(f, "^(-{})", -p)
                } else {
                    write!(f, "^{p}")
                }
            }
        }
    }
}
