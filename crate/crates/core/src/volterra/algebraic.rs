use alloc::vec::Vec;

use crate::math::{self, fabs, Complex};

use super::{choose_x_max, tail_estimate, Forcing, Kernel, SolveOptions, VolterraError, VolterraSolution, Weight};

/// `f = 0` at infinity: `u = x z` with
/// `z(x) = 1 + P(x) - Q(x)/x`, `P = int_a^x s g z`, `Q = int_a^x s^2 g z`.
/// Each cell integrates the linear interpolant of `g z` exactly against `s`
/// and `s^2`. `z' = Q / x^2`.
pub fn solve_algebraic<F: Forcing + ?Sized>(g: &F, opts: &SolveOptions) -> Result<VolterraSolution, VolterraError> {
    if !(opts.h > 0.0) || !(opts.a > 0.0) {
        return Err(VolterraError::InvalidInput("step and cutoff must be positive"));
    }
    let kernel = Kernel::Algebraic;
    let l1_guess = g.tail(opts.a, Weight::AbsS)?;
    let x_max = choose_x_max(g, kernel, opts, l1_guess)?;
    let span = x_max - opts.a;
    let mut h = opts.h;
    let mut attempts = 0;
    loop {
        let n = libm::ceil(span / h).max(1.0) as usize;
        let h_eff = span / n as f64;
        let s = g.sample(opts.a, h_eff, n, true)?;
        let grid: Vec<f64> = (0..=n).map(|k| if k == n { x_max } else { opts.a + h_eff * k as f64 }).collect();

        let mut z = Vec::with_capacity(n + 1);
        let mut dz = Vec::with_capacity(n + 1);
        let mut cumulative = Vec::with_capacity(n + 1);
        z.push(1.0);
        dz.push(0.0);
        cumulative.push(0.0);
        let (mut p, mut q) = (0.0_f64, 0.0_f64);
        let mut qz = s.g[0];
        let mut cum = 0.0;
        let mut running = 0.0;
        let mut violation = None;
        for k in 0..n {
            let (x0, x1) = (grid[k], grid[k + 1]);
            let hh = x1 - x0;
            let (h2, h3) = (hh * hh, hh * hh * hh);
            let p0 = x0 * hh / 2.0 + h2 / 6.0;
            let p1 = x0 * hh / 2.0 + h2 / 3.0;
            let q0 = x0 * x0 * hh / 2.0 + x0 * h2 / 3.0 + h3 / 12.0;
            let q1 = x0 * x0 * hh / 2.0 + 2.0 * x0 * h2 / 3.0 + h3 / 4.0;
            let p_star = p + p0 * qz;
            let q_star = q + q0 * qz;
            let g1 = s.g[k + 1];
            let z1 = (1.0 + p_star - q_star / x1) / (1.0 - g1 * (p1 - q1 / x1));
            let qz1 = g1 * z1;
            p = p_star + p1 * qz1;
            q = q_star + q1 * qz1;
            cum += s.cell_l1[k];
            let bound = math::exp(cum);
            if !(fabs(z1) <= bound) {
                violation = Some((k + 1, fabs(z1), bound));
                break;
            }
            running += 0.5 * hh * (x0 * fabs(qz) + x1 * fabs(qz1));
            z.push(z1);
            dz.push(q / (x1 * x1));
            cumulative.push(cum);
            qz = qz1;
        }
        if let Some((k, value, bound)) = violation {
            if attempts >= opts.max_refinements {
                return Err(VolterraError::GronwallViolated { y: grid[k], value, bound, attempts });
            }
            attempts += 1;
            h *= 0.5;
            continue;
        }

        // Beyond X: z(s) = alpha - Q(X)/s, so
        // alpha = 1 + P(X) + alpha G1 - Q(X) G0.
        let g0 = g.tail(x_max, Weight::One)?;
        let g1 = g.tail(x_max, Weight::S)?;
        let g1_abs = g.tail(x_max, Weight::AbsS)?;
        let z_inf = (1.0 + p - q * g0) / (1.0 - g1);
        let g_l1 = cum + g1_abs;
        let tail_error = tail_estimate(kernel, g1_abs, g_l1);
        if tail_error > opts.tail_tol {
            return Err(VolterraError::TailTooLarge { estimate: tail_error, tail_tol: opts.tail_tol });
        }
        let c = |v: &f64| Complex::new(*v, 0.0);
        return Ok(VolterraSolution {
            kernel,
            a: opts.a,
            h: h_eff,
            grid,
            z: z.iter().map(c).collect(),
            dz: dz.iter().map(c).collect(),
            cumulative_l1: cumulative,
            running_l1_zg: running,
            g_l1,
            z_infinity: Complex::new(z_inf, 0.0),
            opposite: Complex::new(0.0, 0.0),
            tail_error,
            refinements: attempts,
        });
    }
}
