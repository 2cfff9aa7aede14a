use alloc::format;
use alloc::string::{String, ToString};

use crate::expr::Expr;
use crate::transform::{CoefficientSplit, Interval, TransformError};

use super::{BesselFunction, BesselKind, OracleError};

/// Named test equations, all written for `w = sqrt(r) u` (Bessel) or
/// `w = r^{(n-1)/2} v` (radial resolvent) so that `w'' = V w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fixture {
    /// `u'' + u'/r - (1 + nu^2/r^2) u = 0`.
    ModifiedBessel { nu: f64 },
    /// `u'' + u'/r + (1 - nu^2/r^2) u = 0`.
    Bessel { nu: f64 },
    /// Radial `v'' + (n-1)/r v' = lambda v`.
    Resolvent { n: u32, lambda: f64 },
}

impl Fixture {
    /// Parse `modified_bessel:nu=1`, `bessel:nu=0` or `resolvent:n=3,lambda=2`.
    pub fn parse(name: &str) -> Result<Self, OracleError> {
        let unknown = || OracleError::UnknownFixture(name.to_string());
        let (family, params) = name.split_once(':').ok_or_else(unknown)?;
        let mut nu = None;
        let mut n = None;
        let mut lambda = None;
        for kv in params.split(',') {
            let (k, v) = kv.split_once('=').ok_or_else(unknown)?;
            match k.trim() {
                "nu" => nu = Some(parse_number(v).ok_or_else(unknown)?),
                "n" => n = Some(v.trim().parse::<u32>().map_err(|_| unknown())?),
                "lambda" => lambda = Some(parse_number(v).ok_or_else(unknown)?),
                _ => return Err(unknown()),
            }
        }
        let fixture = match (family.trim(), nu, n, lambda) {
            ("modified_bessel", Some(nu), None, None) => Fixture::ModifiedBessel { nu },
            ("bessel", Some(nu), None, None) => Fixture::Bessel { nu },
            ("resolvent", None, Some(n), Some(lambda)) => Fixture::Resolvent { n, lambda },
            _ => return Err(unknown()),
        };
        let ok = match fixture {
            Fixture::ModifiedBessel { nu } | Fixture::Bessel { nu } => nu >= 0.0,
            Fixture::Resolvent { n, lambda } => n >= 1 && lambda >= 0.0,
        };
        if ok {
            Ok(fixture)
        } else {
            Err(OracleError::InvalidInput("fixture parameters out of range"))
        }
    }

    pub fn name(&self) -> String {
        match self {
            Fixture::ModifiedBessel { nu } => format!("modified_bessel:nu={nu}"),
            Fixture::Bessel { nu } => format!("bessel:nu={nu}"),
            Fixture::Resolvent { n, lambda } => format!("resolvent:n={n},lambda={lambda}"),
        }
    }

    /// Bessel functions of the fixture, first kind then second kind.
    pub fn functions(&self) -> Option<(BesselFunction, BesselFunction)> {
        match *self {
            Fixture::ModifiedBessel { nu } => {
                Some((BesselFunction::new(BesselKind::I, nu), BesselFunction::new(BesselKind::K, nu)))
            }
            Fixture::Bessel { nu } => Some((BesselFunction::new(BesselKind::J, nu), BesselFunction::new(BesselKind::Y, nu))),
            Fixture::Resolvent { .. } => None,
        }
    }

    /// `(far-field constant, coefficient c of c/r^2)`.
    fn parts(&self) -> (f64, f64) {
        match *self {
            Fixture::ModifiedBessel { nu } => (1.0, (4.0 * nu * nu - 1.0) / 4.0),
            Fixture::Bessel { nu } => (-1.0, (4.0 * nu * nu - 1.0) / 4.0),
            Fixture::Resolvent { n, lambda } => {
                let n = n as f64;
                (lambda, (n - 1.0) * (n - 3.0) / 4.0)
            }
        }
    }

    /// `V(r)` of the normal form `w'' = V w`.
    pub fn potential(&self) -> Expr {
        let (k, c) = self.parts();
        Expr::add(Expr::constant(k), inverse_square(c))
    }

    pub fn eval_potential(&self, r: f64) -> f64 {
        let (k, c) = self.parts();
        k + c / (r * r)
    }

    /// `f` = far-field constant, `g = c/r^2`, on `(0, inf)`.
    pub fn split_at_infinity(&self) -> Result<CoefficientSplit, TransformError> {
        let (k, c) = self.parts();
        CoefficientSplit::new(Expr::constant(k), inverse_square(c), Interval::half_line())
    }

    /// `f = m^2/r^2`, `g = k - 1/(4 r^2)`, where `m^2/r^2` collects the
    /// `1/r^2` terms of `V` other than `-1/(4 r^2)`. Here `m = nu` for the
    /// Bessel families and `m = n - 2` for the resolvent.
    pub fn split_at_zero(&self) -> Result<CoefficientSplit, TransformError> {
        let (k, c) = self.parts();
        let m2 = c + 0.25;
        let f = if m2 == 0.0 { Expr::constant(0.0) } else { inverse_square(m2) };
        CoefficientSplit::new(f, Expr::add(Expr::constant(k), inverse_square(-0.25)), Interval::half_line())
    }
}

fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let (p, q): (f64, f64) = (p.trim().parse().ok()?, q.trim().parse().ok()?);
        return (q != 0.0).then(|| p / q);
    }
    s.parse().ok().filter(|v: &f64| v.is_finite())
}

fn inverse_square(c: f64) -> Expr {
    if c == 0.0 {
        return Expr::constant(0.0);
    }
    Expr::mul(Expr::constant(c), Expr::pow(Expr::var(), -2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::fabs;

    #[test]
    fn registry_names() {
        for name in ["modified_bessel:nu=1", "bessel:nu=0", "resolvent:n=3,lambda=2", "modified_bessel:nu=0.5"] {
            assert_eq!(Fixture::parse(name).unwrap().name(), name);
        }
        assert_eq!(Fixture::parse("modified_bessel:nu=1/2").unwrap(), Fixture::ModifiedBessel { nu: 0.5 });
        for bad in ["bessel", "bessel:mu=1", "resolvent:n=3", "airy:nu=1", "bessel:nu=-1"] {
            assert!(Fixture::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn splits_reassemble_the_potential() {
        for name in ["modified_bessel:nu=1", "modified_bessel:nu=0", "bessel:nu=0", "resolvent:n=3,lambda=2", "resolvent:n=5,lambda=0"] {
            let fx = Fixture::parse(name).unwrap();
            for split in [fx.split_at_infinity().unwrap(), fx.split_at_zero().unwrap()] {
                for r in [0.01, 0.7, 3.0, 40.0] {
                    let v = split.f().eval(r).unwrap() + split.g().eval(r).unwrap();
                    assert!(fabs(v - fx.eval_potential(r)) <= 1e-13 * fabs(v).max(1.0), "{name} r = {r}");
                    assert!(fabs(fx.potential().eval(r).unwrap() - fx.eval_potential(r)) <= 1e-13 * fabs(v).max(1.0));
                }
            }
        }
    }

    #[test]
    fn resolvent_normal_form_coefficient() {
        // n = 3: w = r v solves w'' = lambda w exactly.
        assert_eq!(Fixture::Resolvent { n: 3, lambda: 2.0 }.eval_potential(0.3), 2.0);
        // n = 2: -1/(4 r^2), the same as Bessel order zero.
        assert_eq!(Fixture::Resolvent { n: 2, lambda: 1.0 }.eval_potential(1.0), 0.75);
    }
}
