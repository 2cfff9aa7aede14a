//! Adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! Finite intervals use global adaptive bisection driven by the embedded
//! Gauss-Kronrod difference. Semi-infinite intervals are mapped onto `[0, 1)`
//! with `x = a + L t / (1 - t)` followed by `t = 1 - sigma^2`; refinements of
//! the panel touching the image of infinity are watched to detect divergent
//! tails.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

/// Default evaluation budget (2^20).
pub const DEFAULT_MAX_EVALS: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Absolute error estimate (sum of `|K15 - G7|` over panels).
    pub error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("evaluation budget exhausted after {evaluations} evaluations (estimate {value}, error {error})")]
    BudgetExceeded { evaluations: usize, value: f64, error: f64 },
    #[error("integral diverges: tail contributions are not shrinking (running value {value})")]
    Divergent { value: f64 },
    #[error("invalid quadrature input: {0}")]
    InvalidInput(&'static str),
}

/// Endpoints with an integrable singularity, handled by `x = a + (b-a) t^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Singularity {
    #[default]
    None,
    Left,
    Right,
    Both,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod panel on `[a, b]`.
fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Panel, QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadError::NonFinite { x })
        }
    };
    let fc = eval(center)?;
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, f2) = (eval(center - dx)?, eval(center + dx)?);
        kron += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok(Panel {
        a,
        b,
        value: kron * half,
        error: ((kron - gauss) * half).abs(),
        abs_value: abs_sum * half.abs(),
    })
}

/// Adaptive integrator with explicit configuration.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub tol: f64,
    pub max_evals: usize,
    pub singularity: Singularity,
}

impl Integrator {
    pub fn new(tol: f64) -> Self {
        Self { tol, max_evals: DEFAULT_MAX_EVALS, singularity: Singularity::None }
    }

    pub fn singular(mut self, singularity: Singularity) -> Self {
        self.singularity = singularity;
        self
    }

    pub fn max_evals(mut self, max_evals: usize) -> Self {
        self.max_evals = max_evals;
        self
    }

    pub fn finite<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Result<QuadResult, QuadError> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(QuadError::InvalidInput("finite endpoints required"));
        }
        if !(self.tol > 0.0) {
            return Err(QuadError::InvalidInput("tolerance must be positive"));
        }
        if a > b {
            return Err(QuadError::InvalidInput("a must not exceed b"));
        }
        if a == b {
            return Ok(QuadResult { value: 0.0, error_estimate: 0.0, evaluations: 0 });
        }
        let w = b - a;
        match self.singularity {
            Singularity::None => adapt(&mut f, a, b, self.tol, self.max_evals, None),
            Singularity::Left => remap(
                adapt(&mut |t: f64| 2.0 * w * t * f(a + w * t * t), 0.0, 1.0, self.tol, self.max_evals, None),
                |t| a + w * t * t,
            ),
            Singularity::Right => remap(
                adapt(&mut |t: f64| 2.0 * w * t * f(b - w * t * t), 0.0, 1.0, self.tol, self.max_evals, None),
                |t| b - w * t * t,
            ),
            Singularity::Both => {
                let mid = 0.5 * (a + b);
                let hw = mid - a;
                let left = remap(
                    adapt(&mut |t: f64| 2.0 * hw * t * f(a + hw * t * t), 0.0, 1.0, 0.5 * self.tol, self.max_evals, None),
                    |t| a + hw * t * t,
                )?;
                let right = remap(
                    adapt(
                        &mut |t: f64| 2.0 * hw * t * f(b - hw * t * t),
                        0.0,
                        1.0,
                        0.5 * self.tol,
                        self.max_evals.saturating_sub(left.evaluations),
                        None,
                    ),
                    |t| b - hw * t * t,
                )?;
                Ok(QuadResult {
                    value: left.value + right.value,
                    error_estimate: left.error_estimate + right.error_estimate,
                    evaluations: left.evaluations + right.evaluations,
                })
            }
        }
    }

    pub fn to_infinity<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64) -> Result<QuadResult, QuadError> {
        if !a.is_finite() {
            return Err(QuadError::InvalidInput("finite lower limit required"));
        }
        if !(self.tol > 0.0) {
            return Err(QuadError::InvalidInput("tolerance must be positive"));
        }
        // x = a + L t/(1-t), then t = 1 - sigma^2 so algebraic decay x^-p
        // becomes sigma^(2p-3) near sigma = 0. The length L = max(1, |a|)
        // keeps that regime from being masked by a large offset.
        let len = a.abs().max(1.0);
        let mut mapped = |sigma: f64| {
            let s2 = sigma * sigma;
            let v = f(a + len * (1.0 - s2) / s2);
            // Vanishing integrands far out are common; avoid 0 * inf.
            if v == 0.0 {
                0.0
            } else {
                2.0 * len * v / (s2 * sigma)
            }
        };
        remap(adapt(&mut mapped, 0.0, 1.0, self.tol, self.max_evals, Some(0.0)), |sigma| {
            a + len * (1.0 - sigma * sigma) / (sigma * sigma)
        })
    }

    /// `int_0^b f` with a possibly non-integrable point at 0, via `x = 1/s`.
    pub fn from_zero<F: FnMut(f64) -> f64>(&self, mut f: F, b: f64) -> Result<QuadResult, QuadError> {
        if !(b > 0.0) {
            return Err(QuadError::InvalidInput("upper limit must be positive"));
        }
        remap(self.to_infinity(|s: f64| f(1.0 / s) / (s * s), 1.0 / b), |s| 1.0 / s)
    }
}

/// Report a non-finite integrand at the original abscissa.
fn remap(r: Result<QuadResult, QuadError>, to_x: impl Fn(f64) -> f64) -> Result<QuadResult, QuadError> {
    r.map_err(|e| match e {
        QuadError::NonFinite { x } => QuadError::NonFinite { x: to_x(x) },
        e => e,
    })
}

/// Global adaptive bisection. When `watch` is set, refinements of the panel
/// ending at `watch` feed the divergence detector.
fn adapt<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: f64,
    max_evals: usize,
    watch: Option<f64>,
) -> Result<QuadResult, QuadError> {
    let first = kronrod(f, a, b)?;
    let mut evals = 15;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    // Panels too narrow to split any further.
    let mut frozen_err = 0.0;
    let mut increments: Vec<f64> = Vec::new();

    loop {
        let abs_total: f64 = heap.iter().map(|p| p.abs_value).sum();
        let floor = 50.0 * f64::EPSILON * abs_total;
        if total_err <= tol.max(floor) {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) <= 4.0 * f64::EPSILON * mid.abs() {
            frozen_err += worst.error;
            total_err -= worst.error;
            if heap.is_empty() {
                total_err += frozen_err;
                frozen_err = 0.0;
                break;
            }
            continue;
        }
        if evals + 30 > max_evals {
            heap.push(worst);
            return Err(QuadError::BudgetExceeded {
                evaluations: evals,
                value: total,
                error: total_err + frozen_err,
            });
        }
        let left = kronrod(f, worst.a, mid)?;
        let right = kronrod(f, mid, worst.b)?;
        evals += 30;
        let delta = left.value + right.value - worst.value;
        total += delta;
        total_err += left.error + right.error - worst.error;

        if let Some(end) = watch {
            if worst.a == end || worst.b == end {
                increments.push(delta);
                if diverging(&increments, tol) {
                    return Err(QuadError::Divergent { value: total });
                }
            }
        }
        heap.push(left);
        heap.push(right);
    }
    Ok(QuadResult { value: total, error_estimate: total_err + frozen_err, evaluations: evals })
}

/// Five consecutive tail refinements, each adding more than `10 tol` with
/// the same sign and without shrinking by at least 10%.
fn diverging(increments: &[f64], tol: f64) -> bool {
    let n = increments.len();
    if n < 5 {
        return false;
    }
    let last = &increments[n - 5..];
    let sign = last[0].signum();
    last.iter().all(|d| d.abs() > 10.0 * tol && d.signum() == sign)
        && last.windows(2).all(|w| w[1].abs() >= 0.9 * w[0].abs())
}

pub fn integrate_finite<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult, QuadError> {
    Integrator::new(tol).finite(f, a, b)
}

pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(f: F, a: f64, tol: f64) -> Result<QuadResult, QuadError> {
    Integrator::new(tol).to_infinity(f, a)
}

/// `||f||_{L^1(a, inf)}`.
pub fn l1_tail_norm<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: f64) -> Result<f64, QuadError> {
    integrate_to_infinity(|x| f(x).abs(), a, tol).map(|r| r.value)
}
