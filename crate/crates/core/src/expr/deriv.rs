use super::{BinaryOp, Expr, UnaryOp};

impl Expr {
    /// Exact derivative with respect to `x`.
    ///
    /// `abs` differentiates to `sign(a) * a'` with `sign(0) = 0`.
    pub fn derivative(&self) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var => Expr::Const(1.0),
            Expr::Unary(op, a) => {
                let da = a.derivative();
                let a = (**a).clone();
                let outer = match op {
                    UnaryOp::Neg => return Expr::neg(da),
                    UnaryOp::Exp => Expr::unary(UnaryOp::Exp, a),
                    UnaryOp::Log => return Expr::div(da, a),
                    UnaryOp::Sqrt => {
                        return Expr::div(
                            da,
                            Expr::mul(Expr::Const(2.0), Expr::unary(UnaryOp::Sqrt, a)),
                        )
                    }
                    UnaryOp::Sin => Expr::unary(UnaryOp::Cos, a),
                    UnaryOp::Cos => Expr::neg(Expr::unary(UnaryOp::Sin, a)),
                    UnaryOp::Abs => Expr::unary(UnaryOp::Sign, a),
                    UnaryOp::Sign => return Expr::Const(0.0),
                };
                Expr::mul(outer, da)
            }
            Expr::Binary(op, a, b) => {
                let (da, db) = (a.derivative(), b.derivative());
                let (a, b) = ((**a).clone(), (**b).clone());
                match op {
                    BinaryOp::Add => Expr::add(da, db),
                    BinaryOp::Sub => Expr::sub(da, db),
                    BinaryOp::Mul => Expr::add(Expr::mul(da, b), Expr::mul(a, db)),
                    BinaryOp::Div => {
                        if let Expr::Const(_) = b {
                            return Expr::div(da, b);
                        }
                        Expr::div(
                            Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a, db)),
                            Expr::pow(b, 2.0),
                        )
                    }
                }
            }
            Expr::Pow(a, p) => {
                let da = a.derivative();
                Expr::mul(
                    Expr::mul(Expr::Const(*p), Expr::pow((**a).clone(), p - 1.0)),
                    da,
                )
            }
        }
    }

    /// `n`-th derivative.
    pub fn nth_derivative(&self, n: usize) -> Expr {
        (0..n).fold(self.clone(), |e, _| e.derivative())
    }
}
