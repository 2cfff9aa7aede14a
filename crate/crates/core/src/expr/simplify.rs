//! Collection of like monomial terms `c * x^p` in a top-level sum.
//!
//! Used where a substitution would otherwise leave large cancelling terms,
//! e.g. `g + 1/(4x^2)` for `g = 1 - 1/(4x^2)`.

use alloc::vec::Vec;

use super::{BinaryOp, Expr, UnaryOp};

/// `(coefficient, power)` if `e` is a monomial in `x`.
fn monomial(e: &Expr) -> Option<(f64, f64)> {
    match e {
        Expr::Const(c) => Some((*c, 0.0)),
        Expr::Var => Some((1.0, 1.0)),
        Expr::Unary(UnaryOp::Neg, a) => monomial(a).map(|(c, p)| (-c, p)),
        Expr::Binary(BinaryOp::Mul, a, b) => {
            let (ca, pa) = monomial(a)?;
            let (cb, pb) = monomial(b)?;
            Some((ca * cb, pa + pb))
        }
        Expr::Binary(BinaryOp::Div, a, b) => {
            let (ca, pa) = monomial(a)?;
            let (cb, pb) = monomial(b)?;
            (cb != 0.0).then(|| (ca / cb, pa - pb))
        }
        Expr::Pow(a, q) => {
            let (c, p) = monomial(a)?;
            let integral = *q == (*q as i32) as f64;
            (c > 0.0 || integral).then(|| (libm::pow(c, *q), p * q))
        }
        _ => None,
    }
}

fn flatten(e: &Expr, sign: f64, out: &mut Vec<(f64, Expr)>) {
    match e {
        Expr::Binary(BinaryOp::Add, a, b) => {
            flatten(a, sign, out);
            flatten(b, sign, out);
        }
        Expr::Binary(BinaryOp::Sub, a, b) => {
            flatten(a, sign, out);
            flatten(b, -sign, out);
        }
        Expr::Unary(UnaryOp::Neg, a) => flatten(a, -sign, out),
        other => out.push((sign, other.clone())),
    }
}

impl Expr {
    /// Combine monomial summands with equal powers. Other summands are kept
    /// in order; the value is unchanged up to rounding.
    pub fn collect_like_terms(&self) -> Expr {
        let mut terms = Vec::new();
        flatten(self, 1.0, &mut terms);
        let mut others: Vec<(f64, Expr)> = Vec::new();
        let mut monos: Vec<(f64, f64)> = Vec::new();
        for (sign, t) in terms {
            match monomial(&t) {
                Some((c, p)) => match monos.iter_mut().find(|(q, _)| *q == p) {
                    Some(slot) => slot.1 += sign * c,
                    None => monos.push((p, sign * c)),
                },
                None => others.push((sign, t)),
            }
        }
        monos.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut acc = Expr::Const(0.0);
        for (sign, t) in others {
            acc = if sign > 0.0 { Expr::add(acc, t) } else { Expr::sub(acc, t) };
        }
        for (p, c) in monos {
            if c == 0.0 {
                continue;
            }
            let term = if p == 0.0 {
                Expr::Const(c.abs())
            } else {
                Expr::mul(Expr::Const(c.abs()), Expr::pow(Expr::Var, p))
            };
            acc = if c > 0.0 { Expr::add(acc, term) } else { Expr::sub(acc, term) };
        }
        acc
    }
}
