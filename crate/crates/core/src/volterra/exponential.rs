use alloc::vec::Vec;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::math::{self, fabs, Complex};
use crate::quadrature::Integrator;

use super::{
    choose_x_max, tail_estimate, Forcing, Kernel, OscillatoryCoeffs, Sampled, SolveOptions, VolterraError,
    VolterraSolution, Weight, Zeta,
};

/// Scalars the marcher runs on: `f64` for `zeta = 1`, complex for `±i`.
pub(crate) trait Field:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Mul<f64, Output = Self>
    + Neg<Output = Self>
{
    fn real(v: f64) -> Self;
    fn exp(self) -> Self;
    fn norm(self) -> f64;
    fn complex(self) -> Complex;
}

impl Field for f64 {
    fn real(v: f64) -> Self {
        v
    }
    fn exp(self) -> Self {
        math::exp(self)
    }
    fn norm(self) -> f64 {
        fabs(self)
    }
    fn complex(self) -> Complex {
        Complex::new(self, 0.0)
    }
}

impl Field for Complex {
    fn real(v: f64) -> Self {
        Complex::new(v, 0.0)
    }
    fn exp(self) -> Self {
        Complex::exp(self)
    }
    fn norm(self) -> f64 {
        math::hypot(self.re, self.im)
    }
    fn complex(self) -> Complex {
        self
    }
}

/// `(e^{-lambda h}, int_0^h e^{-lambda t} dt, int_0^h t e^{-lambda t} dt)`.
pub(crate) fn kernel_moments<T: Field>(lambda: T, h: f64) -> (T, T, T) {
    let lh = lambda * h;
    let decay = (-lh).exp();
    if lh.norm() < 0.5 {
        let mut term = T::real(1.0);
        let mut m0 = T::real(0.0);
        let mut m1 = T::real(0.0);
        for k in 0..25 {
            m0 = m0 + term * (1.0 / (k as f64 + 1.0));
            m1 = m1 + term * (1.0 / (k as f64 + 2.0));
            term = term * (-lh) * (1.0 / (k as f64 + 1.0));
        }
        (decay, m0 * h, m1 * (h * h))
    } else {
        let one = T::real(1.0);
        let m0 = (one - decay) / lambda;
        let m1 = (one - decay * (one + lh)) / (lambda * lambda);
        (decay, m0, m1)
    }
}

pub(crate) struct Marched<T> {
    pub z: Vec<T>,
    pub dz: Vec<T>,
    pub cumulative: Vec<f64>,
    pub running_l1_zg: f64,
    pub a_end: T,
    pub b_end: T,
}

pub(crate) struct Violation {
    pub k: usize,
    pub value: f64,
    pub bound: f64,
}

/// Product-trapezoid march of `z = 1 + c (A - B)`, checking the Gronwall
/// envelope at every grid point.
fn march<T: Field>(s: &Sampled, h: f64, zeta: T) -> Result<Marched<T>, Violation> {
    let lambda = zeta * 2.0;
    let c = T::real(1.0) / lambda;
    let (decay, m0, m1) = kernel_moments(lambda, h);
    let w_old = m1 * (1.0 / h);
    let w_new = m0 - w_old;
    let implicit = T::real(0.5 * h) - w_new;
    let n = s.g.len() - 1;
    let one = T::real(1.0);

    let mut out = Marched {
        z: Vec::with_capacity(n + 1),
        dz: Vec::with_capacity(n + 1),
        cumulative: Vec::with_capacity(n + 1),
        running_l1_zg: 0.0,
        a_end: T::real(0.0),
        b_end: T::real(0.0),
    };
    out.z.push(one);
    out.dz.push(T::real(0.0));
    out.cumulative.push(0.0);
    let (mut a, mut b) = (T::real(0.0), T::real(0.0));
    let mut q = one * s.g[0];
    let mut cum = 0.0;
    for k in 0..n {
        let a_star = a + q * (0.5 * h);
        let b_star = b * decay + q * w_old;
        let g1 = s.g[k + 1];
        let z1 = (one + c * (a_star - b_star)) / (one - c * implicit * g1);
        let q1 = z1 * g1;
        a = a_star + q1 * (0.5 * h);
        b = b_star + q1 * w_new;
        cum += s.cell_l1[k];
        let bound = math::exp(cum);
        if !(z1.norm() <= bound) {
            return Err(Violation { k: k + 1, value: z1.norm(), bound });
        }
        out.running_l1_zg += 0.5 * h * (q.norm() + q1.norm());
        out.z.push(z1);
        out.dz.push(b);
        out.cumulative.push(cum);
        q = q1;
    }
    out.a_end = a;
    out.b_end = b;
    Ok(out)
}

/// Tail completion of the connection data at `X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionData {
    /// `z_inf` (`xi1` for `+i`, `eta2` for `-i`).
    pub z_infinity: Complex,
    /// Coefficient of the opposite exponential (`xi2`, `eta1`); zero for `+1`.
    pub opposite: Complex,
    pub tail_error: f64,
    /// `||g||_{L1(a, inf)}`.
    pub g_l1: f64,
}

/// `int_X^inf g(s) e^{mu (s - X)} ds` by two integrations by parts plus the
/// size of the next term.
fn exp_tail<F: Forcing + ?Sized>(g: &F, x: f64, mu: Complex) -> Result<(Complex, f64), VolterraError> {
    let d = 1e-2;
    let (gm, g0, gp) = (g.value(x - d)?, g.value(x)?, g.value(x + d)?);
    let d1 = (gp - gm) / (2.0 * d);
    let d2 = (gp - 2.0 * g0 + gm) / (d * d);
    let value = -g0 / mu + d1 / (mu * mu);
    let next = fabs(d2) / mu.norm().powi(3);
    Ok((value, next))
}

/// `int_X^inf g(s) e^{-2 (s - X)} ds` by quadrature, truncated where the
/// weight drops below `e^{-80}`.
fn decaying_tail<F: Forcing + ?Sized>(g: &F, x: f64) -> Result<f64, VolterraError> {
    let mut failure = None;
    let r = Integrator::new(1e-15).finite(
        |s| {
            let w = math::exp(-2.0 * (s - x));
            match g.value(s) {
                Ok(v) => v * w,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        x,
        x + 40.0,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(r?.value),
    }
}

/// `z_inf` and, for oscillatory kernels, the opposite coefficient, from the
/// running integrals at `X` and a self-consistent model
/// `z(s) = alpha + beta e^{-lambda (s - X)}` beyond `X`.
pub fn connection_data<F: Forcing + ?Sized>(
    sol: &VolterraSolution,
    g: &F,
    a_end: Complex,
    b_end: Complex,
) -> Result<ConnectionData, VolterraError> {
    let Kernel::Exponential(zeta) = sol.kernel else {
        return Err(VolterraError::InvalidInput("connection data needs an exponential kernel"));
    };
    let x = sol.x_max();
    let n = sol.z.len() - 1;
    let lambda = zeta.value() * 2.0;
    let c = Complex::new(1.0, 0.0) / lambda;
    let big_g = Complex::new(g.tail(x, Weight::One)?, 0.0);
    let g_abs = g.tail(x, Weight::Abs)?;
    let g_l1 = sol.cumulative_l1[n] + g_abs;
    let one = Complex::new(1.0, 0.0);
    let (alpha, beta, tail_error) = match zeta {
        Zeta::PlusOne => {
            // Decaying weight: integrate directly.
            let k_minus = Complex::new(decaying_tail(g, x)?, 0.0);
            let z_x = sol.z[n];
            let alpha = (one + c * a_end + c * k_minus * z_x) / (one - c * big_g + c * k_minus);
            (alpha, Complex::new(0.0, 0.0), tail_estimate(sol.kernel, g_abs, g_l1))
        }
        Zeta::PlusI | Zeta::MinusI => {
            let (k_minus, r_minus) = exp_tail(g, x, -lambda)?;
            let (k_plus, r_plus) = exp_tail(g, x, lambda)?;
            // alpha (1 - cG) - c K- beta = 1 + c A
            // c K+ alpha + (1 + cG) beta = -c B
            let (m11, m12, r1) = (one - c * big_g, -c * k_minus, one + c * a_end);
            let (m21, m22, r2) = (c * k_plus, one + c * big_g, -c * b_end);
            let det = m11 * m22 - m12 * m21;
            let alpha = (r1 * m22 - m12 * r2) / det;
            let beta = (m11 * r2 - m21 * r1) / det;
            // K- enters alpha through beta, K+ enters beta through alpha.
            let truncation = c.norm() * (beta.norm() * r_minus).max(alpha.norm() * r_plus);
            (alpha, beta, tail_estimate(sol.kernel, g_abs, g_l1) + truncation)
        }
    };
    let opposite = beta * (lambda * (x - sol.a)).exp();
    Ok(ConnectionData { z_infinity: alpha, opposite, tail_error, g_l1 })
}

fn solve<F: Forcing + ?Sized, T: Field>(g: &F, opts: &SolveOptions, zeta: Zeta, zeta_t: T) -> Result<VolterraSolution, VolterraError> {
    if !(opts.h > 0.0) {
        return Err(VolterraError::InvalidInput("step must be positive"));
    }
    let kernel = Kernel::Exponential(zeta);
    let g_l1_guess = g.tail(opts.a, Weight::Abs)?;
    let x_max = choose_x_max(g, kernel, opts, g_l1_guess)?;
    let span = x_max - opts.a;
    let mut h = opts.h;
    let mut attempts = 0;
    loop {
        let n = libm::ceil(span / h).max(1.0) as usize;
        let h_eff = span / n as f64;
        let samples = g.sample(opts.a, h_eff, n, false)?;
        match march(&samples, h_eff, zeta_t) {
            Ok(m) => {
                let grid = (0..=n).map(|k| if k == n { x_max } else { opts.a + h_eff * k as f64 }).collect();
                let mut sol = VolterraSolution {
                    kernel,
                    a: opts.a,
                    h: h_eff,
                    grid,
                    z: m.z.iter().map(|v| v.complex()).collect(),
                    dz: m.dz.iter().map(|v| v.complex()).collect(),
                    cumulative_l1: m.cumulative,
                    running_l1_zg: m.running_l1_zg,
                    g_l1: 0.0,
                    z_infinity: Complex::new(1.0, 0.0),
                    opposite: Complex::new(0.0, 0.0),
                    tail_error: 0.0,
                    refinements: attempts,
                };
                let data = connection_data(&sol, g, m.a_end.complex(), m.b_end.complex())?;
                if data.tail_error > opts.tail_tol {
                    return Err(VolterraError::TailTooLarge { estimate: data.tail_error, tail_tol: opts.tail_tol });
                }
                sol.z_infinity = data.z_infinity;
                sol.opposite = data.opposite;
                sol.tail_error = data.tail_error;
                sol.g_l1 = data.g_l1;
                return Ok(sol);
            }
            Err(v) => {
                if attempts >= opts.max_refinements {
                    return Err(VolterraError::GronwallViolated {
                        y: opts.a + h_eff * v.k as f64,
                        value: v.value,
                        bound: v.bound,
                        attempts,
                    });
                }
                attempts += 1;
                h *= 0.5;
            }
        }
    }
}

/// `zeta = 1`: `z(y) = 1 + 1/2 int_a^y (1 - e^{-2(y-s)}) g z ds`, real
/// arithmetic. Fills `z_infinity`.
pub fn solve_exponential<F: Forcing + ?Sized>(g: &F, opts: &SolveOptions) -> Result<VolterraSolution, VolterraError> {
    solve(g, opts, Zeta::PlusOne, 1.0_f64)
}

/// Both oscillatory normalisations and their coefficients.
#[derive(Debug, Clone)]
pub struct OscillatorySolution {
    pub plus: VolterraSolution,
    pub minus: VolterraSolution,
    pub coeffs: OscillatoryCoeffs,
}

/// `zeta = ±i`. `xi1, xi2` come from the `+i` run and `eta1, eta2` from the
/// `-i` run.
pub fn solve_oscillatory<F: Forcing + ?Sized>(g: &F, opts: &SolveOptions) -> Result<OscillatorySolution, VolterraError> {
    let plus = solve(g, opts, Zeta::PlusI, Zeta::PlusI.value())?;
    let minus = solve(g, opts, Zeta::MinusI, Zeta::MinusI.value())?;
    let coeffs = OscillatoryCoeffs {
        xi1: plus.z_infinity,
        xi2: plus.opposite,
        eta1: minus.opposite,
        eta2: minus.z_infinity,
    };
    Ok(OscillatorySolution { plus, minus, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volterra::FnForcing;

    #[test]
    fn moments_match_closed_form_both_branches() {
        for lambda in [Complex::new(2.0, 0.0), Complex::new(0.0, 2.0)] {
            for h in [1e-3, 0.2, 0.3, 1.0] {
                let (_, m0, m1) = kernel_moments(lambda, h);
                let e = (-lambda * h).exp();
                let one = Complex::new(1.0, 0.0);
                let c0 = (one - e) / lambda;
                let c1 = (one - e * (one + lambda * h)) / (lambda * lambda);
                assert!((m0 - c0).norm() < 1e-12 * c0.norm().max(1e-300) + 1e-17, "{lambda} {h}");
                assert!((m1 - c1).norm() < 1e-9 * c1.norm(), "{lambda} {h}");
            }
        }
    }

    #[test]
    fn zero_forcing_gives_unit_solution() {
        let g = FnForcing::new(|_| 0.0);
        let sol = solve_exponential(&g, &SolveOptions::new(0.0).x_max(10.0)).unwrap();
        assert!(sol.z.iter().all(|z| *z == Complex::new(1.0, 0.0)));
        assert_eq!(sol.z_infinity, Complex::new(1.0, 0.0));
        let osc = solve_oscillatory(&g, &SolveOptions::new(0.0).x_max(10.0)).unwrap();
        assert_eq!(osc.coeffs.xi1, Complex::new(1.0, 0.0));
        assert_eq!(osc.coeffs.xi2, Complex::new(0.0, 0.0));
    }

    #[test]
    fn matches_closed_form_for_exponential_forcing() {
        // g = e^{-s}: with t = 2 e^{-s/2}, w = I_0(t) or K_0(t)... use the
        // conserved structure instead: compare with a direct ODE solve.
        let g = FnForcing::new(|s: f64| math::exp(-s));
        let sol = solve_exponential(&g, &SolveOptions::new(0.0).x_max(30.0).step(0.005)).unwrap();
        // z'' + 2 z' = g z, z(0) = 1, z'(0) = 0, by RK4 on a fine grid.
        let (mut z, mut dz, mut y) = (1.0_f64, 0.0_f64, 0.0_f64);
        let h = 1e-3;
        let rhs = |y: f64, z: f64, dz: f64| (dz, math::exp(-y) * z - 2.0 * dz);
        while y < 30.0 - 1e-12 {
            let k1 = rhs(y, z, dz);
            let k2 = rhs(y + h / 2.0, z + h / 2.0 * k1.0, dz + h / 2.0 * k1.1);
            let k3 = rhs(y + h / 2.0, z + h / 2.0 * k2.0, dz + h / 2.0 * k2.1);
            let k4 = rhs(y + h, z + h * k3.0, dz + h * k3.1);
            z += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            dz += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            y += h;
        }
        let n = sol.z.len() - 1;
        assert!(fabs(sol.z[n].re - z) < 1e-5, "{} vs {z}", sol.z[n].re);
        assert!(fabs(sol.z_infinity.re - z) < 1e-5);
    }
}
