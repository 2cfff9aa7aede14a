use alloc::vec::Vec;

use crate::math::fabs;

use super::OracleError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSample {
    pub x: f64,
    pub u: f64,
    pub du: f64,
}

/// Samples in increasing `x`, whatever the direction of integration.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeTrajectory {
    pub samples: Vec<OdeSample>,
    pub order: u32,
    pub tol: f64,
    pub steps: usize,
    pub rejected: usize,
}

impl OdeTrajectory {
    pub fn last(&self) -> &OdeSample {
        self.samples.last().expect("trajectories are non-empty")
    }

    /// The sample at `x` (exact match on a requested point).
    pub fn at(&self, x: f64) -> Option<&OdeSample> {
        self.samples.iter().find(|s| s.x == x)
    }

    pub fn window(&self, lo: f64, hi: f64) -> impl Iterator<Item = &OdeSample> {
        self.samples.iter().filter(move |s| s.x >= lo && s.x <= hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpOptions {
    pub tol: f64,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
}

impl IvpOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, max_steps: 10_000_000, initial_step: None }
    }
}

// Dormand-Prince 5(4).
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `u'' = V u` from `(x0, u0, du0)` to `x1` (either direction).
pub fn integrate_ivp<V: FnMut(f64) -> f64>(
    v: V,
    x0: f64,
    u0: f64,
    du0: f64,
    x1: f64,
    tol: f64,
) -> Result<OdeTrajectory, OracleError> {
    integrate_ivp_at(v, x0, u0, du0, &[x1], &IvpOptions::new(tol))
}

/// Integrate and record the solution exactly at each of `points`, which
/// must all lie on one side of `x0`. Steps are shortened to land on them.
pub fn integrate_ivp_at<V: FnMut(f64) -> f64>(
    mut v: V,
    x0: f64,
    u0: f64,
    du0: f64,
    points: &[f64],
    opts: &IvpOptions,
) -> Result<OdeTrajectory, OracleError> {
    if !(opts.tol > 0.0) {
        return Err(OracleError::InvalidInput("tolerance must be positive"));
    }
    if points.is_empty() {
        return Err(OracleError::InvalidInput("no sample points"));
    }
    let far = points.iter().copied().fold(x0, |acc, p| if fabs(p - x0) > fabs(acc - x0) { p } else { acc });
    let dir = if far >= x0 { 1.0 } else { -1.0 };
    let mut targets: Vec<f64> = points.to_vec();
    if targets.iter().any(|&p| (p - x0) * dir < 0.0) {
        return Err(OracleError::InvalidInput("sample points must lie on one side of x0"));
    }
    targets.sort_by(|a, b| (dir * a).total_cmp(&(dir * b)));

    let mut rhs = |x: f64, y: [f64; 2]| -> Result<[f64; 2], OracleError> {
        let vx = v(x);
        if !vx.is_finite() {
            return Err(OracleError::NonFinite { x });
        }
        Ok([y[1], vx * y[0]])
    };

    let mut traj = OdeTrajectory { samples: Vec::new(), order: 5, tol: opts.tol, steps: 0, rejected: 0 };
    let (mut x, mut y) = (x0, [u0, du0]);
    let span = fabs(far - x0);
    let mut h = opts.initial_step.unwrap_or((span * 1e-3).clamp(1e-8, 1e-2)) * dir;
    let mut k = [[0.0; 2]; 7];
    k[0] = rhs(x, y)?;
    for &target in &targets {
        while (target - x) * dir > 0.0 {
            if traj.steps + traj.rejected >= opts.max_steps {
                return Err(OracleError::BudgetExceeded { steps: opts.max_steps, x });
            }
            let landing = (x + h - target) * dir >= 0.0;
            let step = if landing { target - x } else { h };
            if fabs(step) < 1e-14 * fabs(x).max(1e-300) && !landing {
                return Err(OracleError::StepUnderflow { x });
            }
            for s in 1..7 {
                let mut yi = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        yi[0] += step * a * kj[0];
                        yi[1] += step * a * kj[1];
                    }
                }
                k[s] = rhs(x + C[s] * step, yi)?;
            }
            let mut y5 = y;
            let mut err = [0.0; 2];
            for s in 0..7 {
                y5[0] += step * B5[s] * k[s][0];
                y5[1] += step * B5[s] * k[s][1];
                err[0] += step * (B5[s] - B4[s]) * k[s][0];
                err[1] += step * (B5[s] - B4[s]) * k[s][1];
            }
            let scale = opts.tol * fabs(y[0]).max(fabs(y[1])).max(fabs(y5[0])).max(fabs(y5[1])).max(1e-300);
            let ratio = fabs(err[0]).max(fabs(err[1])) / scale;
            if !ratio.is_finite() {
                return Err(OracleError::NonFinite { x });
            }
            let factor = if ratio == 0.0 { 5.0 } else { (0.9 * libm::pow(ratio, -0.2)).clamp(0.2, 5.0) };
            if ratio <= 1.0 {
                traj.steps += 1;
                x = if landing { target } else { x + step };
                y = y5;
                // First-same-as-last: stage 7 is f at the new point.
                k[0] = k[6];
                if !landing || factor < 1.0 {
                    h = step * factor;
                }
            } else {
                traj.rejected += 1;
                h = step * factor.min(1.0);
                if fabs(h) < 1e-14 * fabs(x).max(1e-300) {
                    return Err(OracleError::StepUnderflow { x });
                }
            }
        }
        traj.samples.push(OdeSample { x, u: y[0], du: y[1] });
    }
    if dir < 0.0 {
        traj.samples.reverse();
    }
    Ok(traj)
}
