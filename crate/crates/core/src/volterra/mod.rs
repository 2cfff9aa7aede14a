//! Volterra equations for the normalised solution `z`.
//!
//! With `u = e^{zeta y} z` and `w'' = (zeta^2 + g) w`,
//! `z(y) = 1 + c int_a^y (1 - e^{-lambda (y - s)}) g(s) z(s) ds` where
//! `c = 1/(2 zeta)` and `lambda = 2 zeta`. The memory term is carried by two
//! running integrals, `A = int g z` and `B = int e^{-lambda (y - s)} g z`,
//! so each step costs O(1). `z' = B` exactly.
//!
//! For `f = 0` at infinity, `u = x z` and
//! `z(x) = 1 + P(x) - Q(x)/x` with `P = int s g z`, `Q = int s^2 g z`.

mod algebraic;
mod exponential;
mod forcing;
mod second;

use alloc::vec::Vec;

use crate::expr::EvalError;
use crate::math::Complex;
use crate::quadrature::QuadError;
use crate::transform::TransformError;

pub use algebraic::solve_algebraic;
pub use exponential::{connection_data, solve_exponential, solve_oscillatory, ConnectionData, OscillatorySolution};
pub use forcing::{ExprForcing, FnForcing, Forcing, LiouvilleForcing, Sampled, Weight};
pub use second::{second_solution, AlgebraicBranch, Branch, ExponentialBranch};

/// Default step in the working variable.
pub const DEFAULT_STEP: f64 = 0.01;
/// Default bound on the tail contribution to connection constants.
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;
/// Default cap on `X_max - a`.
pub const DEFAULT_SPAN_CAP: f64 = 16384.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VolterraError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadError),
    #[error("forcing is not finite at y = {y}")]
    NonFinite { y: f64 },
    #[error("Gronwall envelope violated at y = {y}: |z| = {value} > {bound} after {attempts} refinements")]
    GronwallViolated { y: f64, value: f64, bound: f64, attempts: usize },
    #[error("tail estimate {estimate:e} exceeds the tail tolerance {tail_tol:e}; increase X_max or the tolerance")]
    TailTooLarge { estimate: f64, tail_tol: f64 },
    #[error("solution vanishes near x = {x}")]
    VanishingBranch { x: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
}

/// Exponent of the normalisation `z = e^{-zeta y} w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zeta {
    PlusOne,
    PlusI,
    MinusI,
}

impl Zeta {
    pub fn value(self) -> Complex {
        match self {
            Zeta::PlusOne => Complex::new(1.0, 0.0),
            Zeta::PlusI => Complex::new(0.0, 1.0),
            Zeta::MinusI => Complex::new(0.0, -1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Zeta::PlusOne => "+1",
            Zeta::PlusI => "+i",
            Zeta::MinusI => "-i",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Exponential(Zeta),
    Algebraic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Start of the grid (the cutoff).
    pub a: f64,
    /// End of the grid; chosen from the tail estimate when absent.
    pub x_max: Option<f64>,
    pub h: f64,
    pub tail_tol: f64,
    /// Step halvings allowed after a Gronwall violation.
    pub max_refinements: usize,
    pub span_cap: f64,
}

impl SolveOptions {
    pub fn new(a: f64) -> Self {
        Self {
            a,
            x_max: None,
            h: DEFAULT_STEP,
            tail_tol: DEFAULT_TAIL_TOL,
            max_refinements: 3,
            span_cap: DEFAULT_SPAN_CAP,
        }
    }

    pub fn x_max(mut self, x_max: f64) -> Self {
        self.x_max = Some(x_max);
        self
    }

    pub fn step(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn tail_tol(mut self, tail_tol: f64) -> Self {
        self.tail_tol = tail_tol;
        self
    }
}

/// Sampled `z` on a uniform grid with its connection data.
#[derive(Debug, Clone)]
pub struct VolterraSolution {
    pub kernel: Kernel,
    pub a: f64,
    pub h: f64,
    pub grid: Vec<f64>,
    pub z: Vec<Complex>,
    /// `z'` on the grid.
    pub dz: Vec<Complex>,
    /// `int_a^{y_k} |g|` (`s |g|` for the algebraic kernel).
    pub cumulative_l1: Vec<f64>,
    /// Trapezoidal `int_a^X |g z|` (`s |g z|` for the algebraic kernel).
    pub running_l1_zg: f64,
    /// `||g||_{L1(a, inf)}` (weighted by `s` for the algebraic kernel).
    pub g_l1: f64,
    pub z_infinity: Complex,
    /// Opposite-exponential coefficient (oscillatory kernels; zero otherwise).
    pub opposite: Complex,
    /// Estimated error of the tail completion.
    pub tail_error: f64,
    /// Step halvings performed.
    pub refinements: usize,
}

impl VolterraSolution {
    pub fn x_max(&self) -> f64 {
        *self.grid.last().unwrap_or(&self.a)
    }

    /// `exp(int_a^{y_k} |g|)` at grid point `k`.
    pub fn envelope(&self, k: usize) -> f64 {
        crate::math::exp(self.cumulative_l1[k])
    }

    /// `z` at `y`: cubic Hermite between grid points (using `z'`), and the
    /// tail model `z_inf + (z(X) - z_inf) e^{-lambda (y - X)}` beyond `X`
    /// (`z_inf - Q(X)/y` for the algebraic kernel).
    pub fn z_at(&self, y: f64) -> Complex {
        let n = self.grid.len() - 1;
        let x_end = self.grid[n];
        if y >= x_end {
            let t = y - x_end;
            return match self.kernel {
                Kernel::Exponential(zeta) => {
                    let decay = (-zeta.value() * 2.0 * t).exp();
                    self.z_infinity + (self.z[n] - self.z_infinity) * decay
                }
                Kernel::Algebraic => {
                    // z' = Q/x^2 with Q frozen.
                    let q = self.dz[n] * x_end * x_end;
                    self.z_infinity - q / y
                }
            };
        }
        let pos = ((y - self.a) / self.h).max(0.0);
        let k = (pos as usize).min(n - 1);
        let t = (y - self.grid[k]) / self.h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        self.z[k] * h00 + self.dz[k] * (h10 * self.h) + self.z[k + 1] * h01 + self.dz[k + 1] * (h11 * self.h)
    }

    /// `z'` at `y`, from the same interpolant.
    pub fn dz_at(&self, y: f64) -> Complex {
        let n = self.grid.len() - 1;
        let x_end = self.grid[n];
        if y >= x_end {
            let t = y - x_end;
            return match self.kernel {
                Kernel::Exponential(zeta) => {
                    let lambda = zeta.value() * 2.0;
                    -(self.z[n] - self.z_infinity) * lambda * (-lambda * t).exp()
                }
                Kernel::Algebraic => self.dz[n] * (x_end * x_end) / (y * y),
            };
        }
        let pos = ((y - self.a) / self.h).max(0.0);
        let k = (pos as usize).min(n - 1);
        let t = (y - self.grid[k]) / self.h;
        let t2 = t * t;
        let d00 = (6.0 * t2 - 6.0 * t) / self.h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / self.h;
        let d11 = 3.0 * t2 - 2.0 * t;
        self.z[k] * d00 + self.dz[k] * d10 + self.z[k + 1] * d01 + self.dz[k + 1] * d11
    }

    /// Largest `|z_k| / envelope_k` over the grid.
    pub fn envelope_ratio(&self) -> f64 {
        self.z
            .iter()
            .zip(&self.cumulative_l1)
            .map(|(z, l)| z.norm() / crate::math::exp(*l))
            .fold(0.0, f64::max)
    }
}

/// Coefficients of the two oscillatory normalised solutions,
/// `u_1 ~ xi1 e^{i y} + xi2 e^{-i y}` and `u_2 ~ eta1 e^{i y} + eta2 e^{-i y}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatoryCoeffs {
    pub xi1: Complex,
    pub xi2: Complex,
    pub eta1: Complex,
    pub eta2: Complex,
}

impl OscillatoryCoeffs {
    pub fn determinant(&self) -> Complex {
        self.xi1 * self.eta2 - self.xi2 * self.eta1
    }

    /// The magnitude conditions that hold under a certified cutoff.
    pub fn well_separated(&self) -> bool {
        self.xi1.norm() > 0.5 && self.xi2.norm() < 0.5 && self.eta1.norm() < 0.5 && self.eta2.norm() > 0.5
    }
}

/// Tail remaining beyond `x_max` for the error model of the solvers.
pub(crate) fn tail_estimate(kernel: Kernel, g_abs_tail: f64, g_l1: f64) -> f64 {
    let m = crate::math::exp(g_l1);
    match kernel {
        Kernel::Exponential(zeta) => {
            let c = 1.0 / (2.0 * zeta.value().norm());
            m * c * c * g_abs_tail * g_abs_tail
        }
        Kernel::Algebraic => m * g_abs_tail * g_abs_tail,
    }
}

/// Smallest `X = a + 8 * 2^k` (capped at `a + span_cap`) whose tail estimate
/// is below `0.1 tail_tol`.
pub(crate) fn choose_x_max<F: Forcing + ?Sized>(
    g: &F,
    kernel: Kernel,
    opts: &SolveOptions,
    g_l1: f64,
) -> Result<f64, VolterraError> {
    if let Some(x) = opts.x_max {
        if !(x > opts.a) {
            return Err(VolterraError::InvalidInput("X_max must exceed the cutoff"));
        }
        return Ok(x);
    }
    let weight = match kernel {
        Kernel::Algebraic => Weight::AbsS,
        Kernel::Exponential(_) => Weight::Abs,
    };
    let mut span: f64 = 8.0;
    loop {
        let x = opts.a + span.min(opts.span_cap);
        let tail = g.tail(x, weight)?;
        if tail_estimate(kernel, tail, g_l1) <= 0.1 * opts.tail_tol || span >= opts.span_cap {
            return Ok(x);
        }
        span *= 2.0;
    }
}
