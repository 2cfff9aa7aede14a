use alloc::vec::Vec;

use crate::expr::Expr;
use crate::math::{exp, fabs};
use crate::quadrature::Integrator;

use super::{explain, CoefficientSplit, TransformError};

/// Direction in which the phase grows away from its base point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `Phi(x) = int_base^x |f|^{1/2}`, growing towards infinity.
    Forward,
    /// `Phi(x) = int_x^base |f|^{1/2}`, growing towards zero.
    Backward,
}

const NODE_CAP: usize = 4096;

/// Numeric phase with cached checkpoints. Built once, read-only afterwards.
#[derive(Debug, Clone)]
pub struct PhaseMap {
    density: Expr,
    base: f64,
    orientation: Orientation,
    tol: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl PhaseMap {
    pub fn new(
        split: &CoefficientSplit,
        base: f64,
        orientation: Orientation,
        extent: f64,
        tol: f64,
    ) -> Result<Self, TransformError> {
        Self::from_density(split.phase_density(), base, orientation, extent, tol)
    }

    /// Checkpoints run from `base` to `extent` (beyond `base` in the
    /// direction of `orientation`).
    pub fn from_density(
        density: Expr,
        base: f64,
        orientation: Orientation,
        extent: f64,
        tol: f64,
    ) -> Result<Self, TransformError> {
        if !base.is_finite() || (orientation == Orientation::Backward && !(base > 0.0 && extent > 0.0)) {
            return Err(TransformError::InvalidInterval("phase base must be finite (and positive when growing towards zero)"));
        }
        let mut map = Self { density, base, orientation, tol, nodes: alloc::vec![base], values: alloc::vec![0.0] };
        let mut cur = base;
        while map.nodes.len() < NODE_CAP {
            let next = match orientation {
                Orientation::Forward if cur < extent => (cur * 1.25).max(cur + 0.5),
                Orientation::Backward if cur > extent => cur / 1.25,
                _ => break,
            };
            let phi = map.values[map.values.len() - 1] + map.segment(cur, next)?;
            map.nodes.push(next);
            map.values.push(phi);
            cur = next;
        }
        Ok(map)
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn density_expr(&self) -> &Expr {
        &self.density
    }

    /// `|f(x)|^{1/2}`.
    pub fn density(&self, x: f64) -> Result<f64, TransformError> {
        Ok(self.density.eval(x)?)
    }

    /// `int_a^b rho` for `a <= b`.
    fn integral(&self, a: f64, b: f64) -> Result<f64, TransformError> {
        Integrator::new(self.tol)
            .finite(|t| self.density.eval_or_nan(t), a, b)
            .map(|r| r.value)
            .map_err(|e| explain(e, &[&self.density]))
    }

    /// Phase gained moving from `from` to `to` in the orientation's sense.
    fn segment(&self, from: f64, to: f64) -> Result<f64, TransformError> {
        let ahead = match self.orientation {
            Orientation::Forward => to >= from,
            Orientation::Backward => to <= from,
        };
        let (lo, hi) = if from <= to { (from, to) } else { (to, from) };
        let v = self.integral(lo, hi)?;
        Ok(if ahead { v } else { -v })
    }

    fn beyond(&self, a: f64, b: f64) -> bool {
        match self.orientation {
            Orientation::Forward => a >= b,
            Orientation::Backward => a <= b,
        }
    }

    /// Index of the last checkpoint not beyond `x`.
    fn node_before(&self, x: f64) -> Option<usize> {
        if !self.beyond(x, self.base) {
            return None;
        }
        let n = self.nodes.partition_point(|&node| self.beyond(x, node));
        Some(n - 1)
    }

    pub fn phase(&self, x: f64) -> Result<f64, TransformError> {
        match self.node_before(x) {
            Some(i) => Ok(self.values[i] + self.segment(self.nodes[i], x)?),
            None => self.segment(self.base, x),
        }
    }

    /// `dPhi/dx`.
    pub fn phase_derivative(&self, x: f64) -> Result<f64, TransformError> {
        let rho = self.density(x)?;
        Ok(match self.orientation {
            Orientation::Forward => rho,
            Orientation::Backward => -rho,
        })
    }

    /// Solve `Phi(x) - Phi(from) = step` for `x` by safeguarded Newton.
    /// `guess` seeds the iteration.
    pub fn advance(&self, from: f64, step: f64, guess: Option<f64>) -> Result<f64, TransformError> {
        if step == 0.0 {
            return Ok(from);
        }
        let d0 = self.phase_derivative(from)?;
        let mut x = guess.unwrap_or(match self.orientation {
            Orientation::Forward => from + step / d0,
            Orientation::Backward => from * exp(step / (from * d0)),
        });
        // Bracket: `lo` is not beyond the target, `hi` (once found) is.
        let mut lo = from;
        let mut hi: Option<f64> = None;
        for _ in 0..100 {
            if !(x.is_finite()) || !self.strictly_between(lo, x, hi) {
                x = match hi {
                    Some(h) => 0.5 * (lo + h),
                    None => match self.orientation {
                        Orientation::Forward => lo + 2.0 * (lo - from + step / d0),
                        Orientation::Backward => 0.5 * lo,
                    },
                };
            }
            let r = self.segment(from, x)? - step;
            if r <= 0.0 {
                lo = x;
            } else {
                hi = Some(x);
            }
            let d = self.phase_derivative(x)?;
            // Towards zero, iterate in ln x so the iterate stays positive.
            let next = match self.orientation {
                Orientation::Forward => x - r / d,
                Orientation::Backward => x * exp(-r / (x * d)),
            };
            let converged = fabs(next - x) <= 4.0 * f64::EPSILON * fabs(x).max(1e-300)
                || fabs(r) <= 1e-14 * fabs(step);
            if converged {
                return Ok(next);
            }
            x = next;
        }
        Err(TransformError::Quadrature(crate::quadrature::QuadError::InvalidInput(
            "phase inversion did not converge",
        )))
    }

    fn strictly_between(&self, lo: f64, x: f64, hi: Option<f64>) -> bool {
        let after_lo = self.beyond(x, lo) && x != lo;
        let before_hi = hi.map_or(true, |h| self.beyond(h, x) && x != h);
        after_lo && before_hi && (self.orientation == Orientation::Forward || x > 0.0)
    }

    /// Inverse phase: the `x` with `Phi(x) = y`.
    pub fn inverse(&self, y: f64) -> Result<f64, TransformError> {
        let i = if y <= 0.0 {
            0
        } else {
            self.values.partition_point(|&v| v <= y) - 1
        };
        let guess = self.nodes.get(i + 1).and_then(|&next| {
            let span = self.values[i + 1] - self.values[i];
            (span > 0.0).then(|| self.nodes[i] + (next - self.nodes[i]) * (y - self.values[i]) / span)
        });
        self.advance(self.nodes[i], y - self.values[i], guess)
    }

    /// `n + 1` points `x_0 = start, x_k` with `Phi(x_k) - Phi(start) = k step`.
    pub fn march(&self, start: f64, step: f64, n: usize) -> Result<Vec<f64>, TransformError> {
        let mut xs = Vec::with_capacity(n + 1);
        xs.push(start);
        for k in 0..n {
            let guess = (k > 0).then(|| 2.0 * xs[k] - xs[k - 1]);
            let next = self.advance(xs[k], step, guess)?;
            xs.push(next);
        }
        Ok(xs)
    }
}

/// Signed `int_a^x |f|^{1/2}`.
pub fn liouville_phase(split: &CoefficientSplit, a: f64, x: f64) -> Result<f64, TransformError> {
    let rho = split.phase_density();
    let (lo, hi, sign) = if a <= x { (a, x, 1.0) } else { (x, a, -1.0) };
    let r = Integrator::new(1e-13)
        .finite(|t| rho.eval_or_nan(t), lo, hi)
        .map_err(|e| explain(e, &[split.f()]))?;
    Ok(sign * r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::math::{ln, rel_diff};
    use crate::transform::Interval;

    fn split(f: &str) -> CoefficientSplit {
        CoefficientSplit::new(parse(f).unwrap(), Expr::Const(0.0), Interval::half_line()).unwrap()
    }

    #[test]
    fn examples() {
        assert!(fabs(liouville_phase(&split("1"), 0.0, 5.0).unwrap() - 5.0) < 1e-13);
        let e = core::f64::consts::E;
        assert!(fabs(liouville_phase(&split("1/x^2"), 1.0, e).unwrap() - 1.0) < 1e-12);
        assert!(fabs(liouville_phase(&split("x^4"), 1.0, 2.0).unwrap() - 7.0 / 3.0) < 1e-12);
    }

    #[test]
    fn additivity_and_monotonicity() {
        let s = split("x^4 + 1/x");
        let (ab, bc, ac) = (
            liouville_phase(&s, 0.5, 2.0).unwrap(),
            liouville_phase(&s, 2.0, 9.0).unwrap(),
            liouville_phase(&s, 0.5, 9.0).unwrap(),
        );
        assert!(rel_diff(ab + bc, ac) < 1e-12);
        assert!(ab > 0.0 && bc > 0.0);
    }

    #[test]
    fn map_matches_closed_form_forward() {
        let s = split("1/x^2");
        let map = PhaseMap::new(&s, 1.0, Orientation::Forward, 1e4, 1e-13).unwrap();
        for x in [0.5, 1.0, 3.0, 77.0, 5e3, 2e5] {
            assert!(fabs(map.phase(x).unwrap() - ln(x)) < 1e-11, "x = {x}");
        }
        for y in [0.0, 0.25, 2.0, 9.0, 13.0] {
            assert!(rel_diff(map.inverse(y).unwrap(), exp(y)) < 1e-12, "y = {y}");
        }
    }

    #[test]
    fn map_matches_closed_form_backward() {
        let s = split("1/x^2");
        let map = PhaseMap::new(&s, 1.0, Orientation::Backward, 1e-6, 1e-13).unwrap();
        for x in [1e-8, 1e-3, 0.5, 1.0, 2.0] {
            assert!(fabs(map.phase(x).unwrap() + ln(x)) < 1e-11, "x = {x}");
        }
        assert!(map.phase_derivative(0.5).unwrap() < 0.0);
        for y in [0.5, 4.0, 15.0] {
            assert!(rel_diff(map.inverse(y).unwrap(), exp(-y)) < 1e-12);
        }
    }

    #[test]
    fn march_is_uniform_in_phase() {
        let s = split("x^4");
        let map = PhaseMap::new(&s, 1.0, Orientation::Forward, 100.0, 1e-13).unwrap();
        let xs = map.march(1.0, 0.05, 400).unwrap();
        for (k, &x) in xs.iter().enumerate() {
            let phi = (x * x * x - 1.0) / 3.0;
            assert!(fabs(phi - 0.05 * k as f64) < 1e-10 * (1.0 + phi), "k = {k}");
        }
    }

    #[test]
    fn zero_base_forward() {
        let map = PhaseMap::new(&split("1"), 0.0, Orientation::Forward, 50.0, 1e-13).unwrap();
        assert!(fabs(map.phase(42.5).unwrap() - 42.5) < 1e-12);
        assert!(fabs(map.phase(-1.0).unwrap() + 1.0) < 1e-12);
    }
}
