use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::expr::Expr;
use crate::math::{fabs, ln};
use crate::quadrature::{Integrator, QuadError};

use super::{compute_psi, explain, log_substitution, CoefficientSplit, Endpoint, SignOfF, TransformError};

/// Tolerance of the hypothesis integrals.
const CHECK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    ExpInfinity,
    OscInfinity,
    AlgebraicInfinity,
    ExpSingular,
    OscSingular,
    ConstantFExp,
    ConstantFOsc,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::ExpInfinity => "ExpInfinity",
            Regime::OscInfinity => "OscInfinity",
            Regime::AlgebraicInfinity => "AlgebraicInfinity",
            Regime::ExpSingular => "ExpSingular",
            Regime::OscSingular => "OscSingular",
            Regime::ConstantFExp => "ConstantF_Exp",
            Regime::ConstantFOsc => "ConstantF_Osc",
        }
    }

    pub fn is_oscillatory(self) -> bool {
        matches!(self, Regime::OscInfinity | Regime::OscSingular | Regime::ConstantFOsc)
    }

    pub fn is_singular(self) -> bool {
        matches!(self, Regime::ExpSingular | Regime::OscSingular)
    }
}

/// How the problem is brought to a Volterra equation at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    /// Already `f = ±1` (or `f = 0`) at infinity.
    None,
    /// `y = Phi(x)`, `w = |f|^{1/4} u`.
    Liouville,
    /// `w(s) = s u(1/s)`, followed by the Liouville step when `f != 0`.
    Inversion,
    /// `f = 0` at zero: `x = e^{-s}`, `u = x^{1/2} w`.
    LogSubstitution,
}

impl Reduction {
    pub fn name(self) -> &'static str {
        match self {
            Reduction::None => "none",
            Reduction::Liouville => "liouville",
            Reduction::Inversion => "inversion",
            Reduction::LogSubstitution => "log_substitution",
        }
    }
}

/// One verified membership. `value` is `None` for a divergent integral.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub name: String,
    pub value: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub regime: Regime,
    pub reduction: Reduction,
    pub endpoint: Endpoint,
    /// Point near the endpoint from which the integrals were taken.
    pub probe: f64,
    pub checks: Vec<HypothesisCheck>,
}

enum Tail {
    Finite(f64),
    Divergent,
    Undecided,
}

fn tail(result: Result<f64, QuadError>, exprs: &[&Expr]) -> Result<Tail, TransformError> {
    match result {
        Ok(v) => Ok(Tail::Finite(v)),
        Err(QuadError::Divergent { .. }) => Ok(Tail::Divergent),
        Err(QuadError::BudgetExceeded { .. }) => Ok(Tail::Undecided),
        Err(e) => Err(explain(e, exprs)),
    }
}

/// `int |w|` over the endpoint neighbourhood `[probe, inf)` or `(0, probe]`.
fn near_endpoint(w: &Expr, endpoint: Endpoint, probe: f64, exprs: &[&Expr]) -> Result<Tail, TransformError> {
    let q = Integrator::new(CHECK_TOL);
    let f = |x: f64| fabs(w.eval_or_nan(x));
    let r = match endpoint {
        Endpoint::Infinity => q.to_infinity(f, probe),
        Endpoint::Zero => q.from_zero(f, probe),
    };
    tail(r.map(|r| r.value), exprs)
}

fn neighbourhood(endpoint: Endpoint, probe: f64) -> String {
    match endpoint {
        Endpoint::Infinity => format!("[{probe}, inf)"),
        Endpoint::Zero => format!("(0, {probe}]"),
    }
}

struct Checks {
    list: Vec<HypothesisCheck>,
}

impl Checks {
    /// Record an integrability requirement; fails the classification if it
    /// does not hold.
    fn integrable(&mut self, subject: &str, hood: &str, t: Tail) -> Result<f64, TransformError> {
        let name = format!("{subject} in L1{hood}");
        match t {
            Tail::Finite(v) => {
                self.list.push(HypothesisCheck { name, value: Some(v), passed: true });
                Ok(v)
            }
            Tail::Divergent => Err(TransformError::HypothesisFailed {
                detail: format!("{subject} not in L1{hood}: divergent"),
                check: name,
            }),
            Tail::Undecided => Err(TransformError::HypothesisFailed {
                detail: "integrability could not be established within the quadrature budget".into(),
                check: name,
            }),
        }
    }

    /// Record a non-integrability requirement.
    fn divergent(&mut self, subject: &str, hood: &str, t: Tail) -> Result<(), TransformError> {
        let name = format!("{subject} not in L1{hood}");
        match t {
            Tail::Divergent | Tail::Undecided => {
                self.list.push(HypothesisCheck { name, value: None, passed: true });
                Ok(())
            }
            Tail::Finite(v) => Err(TransformError::HypothesisFailed {
                detail: format!("integral is finite ({v}); the phase stays bounded"),
                check: name,
            }),
        }
    }
}

/// Decide which setting applies at `endpoint`, verifying its hypotheses by
/// quadrature on a neighbourhood of the endpoint.
pub fn classify_regime(split: &CoefficientSplit, endpoint: Endpoint) -> Result<Classification, TransformError> {
    let iv = split.interval();
    let probe = match endpoint {
        Endpoint::Infinity => {
            if iv.right.is_finite() {
                return Err(TransformError::InvalidInterval("the infinity endpoint requires an unbounded interval"));
            }
            if iv.left > 0.0 { iv.left } else { 1.0 }
        }
        Endpoint::Zero => {
            if iv.left != 0.0 {
                return Err(TransformError::InvalidInterval("the zero endpoint requires an interval starting at 0"));
            }
            iv.right.min(1.0)
        }
    };
    let hood = neighbourhood(endpoint, probe);
    let mut checks = Checks { list: Vec::new() };
    let sign_name = match split.sign_of_f() {
        SignOfF::Positive => "f > 0",
        SignOfF::Negative => "f < 0",
        SignOfF::IdenticallyZero => "f = 0",
    };
    checks.list.push(HypothesisCheck { name: format!("{sign_name} on the sample grid"), value: None, passed: true });
    let (f, g) = (split.f(), split.g());

    if split.sign_of_f() == SignOfF::IdenticallyZero {
        return match endpoint {
            Endpoint::Infinity => {
                let xg = Expr::mul(Expr::Var, g.clone());
                checks.integrable("x*g", &hood, near_endpoint(&xg, endpoint, probe, &[g])?)?;
                Ok(Classification {
                    regime: Regime::AlgebraicInfinity,
                    reduction: Reduction::None,
                    endpoint,
                    probe,
                    checks: checks.list,
                })
            }
            Endpoint::Zero => {
                // w(s) = s u(1/s) keeps f = 0 and needs x*g in L1 near 0;
                // otherwise try the logarithmic chart.
                let xg = Expr::mul(Expr::Var, g.clone());
                if let Tail::Finite(v) = near_endpoint(&xg, endpoint, probe, &[g])? {
                    checks.list.push(HypothesisCheck { name: format!("x*g in L1{hood}"), value: Some(v), passed: true });
                    return Ok(Classification {
                        regime: Regime::AlgebraicInfinity,
                        reduction: Reduction::Inversion,
                        endpoint,
                        probe,
                        checks: checks.list,
                    });
                }
                checks.list.push(HypothesisCheck { name: format!("x*g in L1{hood}"), value: None, passed: false });
                let logged = log_substitution(split)?;
                let s0 = 0.0 - ln(probe);
                let sg = Expr::mul(Expr::Var, logged.g().clone());
                let t = near_endpoint(&sg, Endpoint::Infinity, s0, &[logged.g()])?;
                checks.integrable("s*g~ (x = exp(-s))", &neighbourhood(Endpoint::Infinity, s0), t)?;
                Ok(Classification {
                    regime: Regime::AlgebraicInfinity,
                    reduction: Reduction::LogSubstitution,
                    endpoint,
                    probe,
                    checks: checks.list,
                })
            }
        };
    }

    let rho = split.phase_density();
    checks.divergent("|f|^(1/2)", &hood, near_endpoint(&rho, endpoint, probe, &[f])?)?;
    let psi = compute_psi(split)?;
    checks.integrable("psi", &hood, near_endpoint(&psi.expr, endpoint, probe, &[f, g])?)?;
    let positive = split.sign_of_f() == SignOfF::Positive;
    let (regime, reduction) = match endpoint {
        Endpoint::Infinity => match split.constant_unit_f() {
            Some(_) if positive => (Regime::ConstantFExp, Reduction::None),
            Some(_) => (Regime::ConstantFOsc, Reduction::None),
            None if positive => (Regime::ExpInfinity, Reduction::Liouville),
            None => (Regime::OscInfinity, Reduction::Liouville),
        },
        Endpoint::Zero if positive => (Regime::ExpSingular, Reduction::Inversion),
        Endpoint::Zero => (Regime::OscSingular, Reduction::Inversion),
    };
    Ok(Classification { regime, reduction, endpoint, probe, checks: checks.list })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::transform::Interval;

    fn classify(f: &str, g: &str, endpoint: Endpoint) -> Result<Classification, TransformError> {
        let split = CoefficientSplit::new(parse(f).unwrap(), parse(g).unwrap(), Interval::half_line()).unwrap();
        classify_regime(&split, endpoint)
    }

    #[test]
    fn examples() {
        let c = classify("1", "3/(4*x^2)", Endpoint::Infinity).unwrap();
        assert_eq!(c.regime, Regime::ConstantFExp);
        let c = classify("0-1", "3/(4*x^2)", Endpoint::Infinity).unwrap();
        assert_eq!(c.regime, Regime::ConstantFOsc);
        let c = classify("1/x^2", "1 - 1/(4*x^2)", Endpoint::Zero).unwrap();
        assert_eq!((c.regime, c.reduction), (Regime::ExpSingular, Reduction::Inversion));
        let c = classify("x^2", "0", Endpoint::Infinity).unwrap();
        assert_eq!((c.regime, c.reduction), (Regime::ExpInfinity, Reduction::Liouville));
        let c = classify("0-x^2", "1/x", Endpoint::Infinity).unwrap();
        assert_eq!(c.regime, Regime::OscInfinity);
        let c = classify("0-1/x^2", "1 - 1/(4*x^2)", Endpoint::Zero).unwrap();
        assert_eq!(c.regime, Regime::OscSingular);
    }

    #[test]
    fn inverse_square_perturbation_is_rejected() {
        match classify("0", "2/x^2", Endpoint::Infinity) {
            Err(TransformError::HypothesisFailed { check, detail }) => {
                assert!(check.starts_with("x*g in L1"), "{check}");
                assert!(detail.contains("divergent"), "{detail}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn algebraic_cases() {
        let c = classify("0", "x^(-4)", Endpoint::Infinity).unwrap();
        assert_eq!(c.regime, Regime::AlgebraicInfinity);
        assert!((c.checks[1].value.unwrap() - 0.5).abs() < 1e-9);
        let c = classify("0", "1 - 1/(4*x^2)", Endpoint::Zero).unwrap();
        assert_eq!(c.reduction, Reduction::LogSubstitution);
        let c = classify("0", "1", Endpoint::Zero).unwrap();
        assert_eq!(c.reduction, Reduction::Inversion);
    }

    #[test]
    fn bounded_phase_is_rejected() {
        assert!(matches!(
            classify("x^(-4)", "0", Endpoint::Infinity),
            Err(TransformError::HypothesisFailed { .. })
        ));
    }

    #[test]
    fn deterministic() {
        let a = classify("x^2 + 1", "exp(-x)", Endpoint::Infinity).unwrap();
        let b = classify("x^2 + 1", "exp(-x)", Endpoint::Infinity).unwrap();
        assert_eq!(a, b);
    }
}
