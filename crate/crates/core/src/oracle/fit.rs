use alloc::vec::Vec;

use crate::math::{atan2, cos, exp, fabs, hypot, ln, sin, PI};
use crate::transform::LGApproximant;

use super::{OdeTrajectory, OracleError};

/// Asymptotic model a trajectory is fitted against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// `u ~ c * approximant`, real exponent.
    Exponential,
    /// `u ~ c * |f|^{-1/4} cos(Phi + theta)`.
    Oscillatory,
    /// `u ~ c * x`.
    Linear,
    /// `u ~ c`.
    Constant,
    /// `u ~ c * |ln x|`.
    Logarithmic,
}

impl FitModel {
    pub fn name(self) -> &'static str {
        match self {
            FitModel::Exponential => "exponential",
            FitModel::Oscillatory => "oscillatory",
            FitModel::Linear => "linear",
            FitModel::Constant => "constant",
            FitModel::Logarithmic => "logarithmic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticFit {
    pub model: FitModel,
    /// Fitted constant; the signed amplitude for oscillatory fits.
    pub c: f64,
    /// `theta` in `[0, pi)`, oscillatory fits only.
    pub phase: Option<f64>,
    /// Max relative deviation of the fitted model over the window (relative
    /// to `|c|` for oscillatory fits).
    pub residual: f64,
    /// Relative change of the constant across the window: end-point ratios
    /// for ratio fits, half-window refits for oscillatory fits.
    pub drift: f64,
    pub window: (f64, f64),
    pub samples: usize,
    /// Which approximant of the pair the ratio refers to (0 or 1).
    pub branch: usize,
}

impl AsymptoticFit {
    pub fn check_drift(self, tol: f64) -> Result<Self, OracleError> {
        if self.drift > tol {
            Err(OracleError::Drift { drift: self.drift, tol })
        } else {
            Ok(self)
        }
    }
}

fn window_samples(traj: &OdeTrajectory, window: (f64, f64)) -> Result<Vec<(f64, f64)>, OracleError> {
    let pts: Vec<(f64, f64)> = traj.window(window.0, window.1).map(|s| (s.x, s.u)).collect();
    if pts.len() < 2 {
        return Err(OracleError::Window { lo: window.0, hi: window.1 });
    }
    Ok(pts)
}

/// Average `u / reference` over the window. `log_reference` returns
/// `ln |reference|` and its sign, so overflowing references are fine.
pub fn fit_ratio<R>(
    traj: &OdeTrajectory,
    window: (f64, f64),
    model: FitModel,
    mut log_reference: R,
) -> Result<AsymptoticFit, OracleError>
where
    R: FnMut(f64) -> Result<(f64, f64), OracleError>,
{
    let pts = window_samples(traj, window)?;
    let mut ratios = Vec::with_capacity(pts.len());
    for &(x, u) in &pts {
        let (log_mag, sign) = log_reference(x)?;
        let r = u * exp(-log_mag) * sign;
        if !r.is_finite() {
            return Err(OracleError::NonFinite { x });
        }
        ratios.push(r);
    }
    let c = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let residual = ratios.iter().map(|r| fabs(r / c - 1.0)).fold(0.0, f64::max);
    let drift = fabs(ratios[0] - ratios[ratios.len() - 1]) / fabs(c);
    Ok(AsymptoticFit { model, c, phase: None, residual, drift, window, samples: pts.len(), branch: 0 })
}

/// Ratio against `x`, `1` or `|ln x|`.
pub fn fit_profile(traj: &OdeTrajectory, window: (f64, f64), model: FitModel) -> Result<AsymptoticFit, OracleError> {
    let profile = match model {
        FitModel::Linear => |x: f64| (ln(fabs(x)), x.signum()),
        FitModel::Constant => |_x: f64| (0.0, 1.0),
        FitModel::Logarithmic => |x: f64| (ln(fabs(ln(x))), 1.0),
        _ => return Err(OracleError::InvalidInput("profile fits are linear, constant or logarithmic")),
    };
    fit_ratio(traj, window, model, |x| Ok(profile(x)))
}

/// Least squares of `u` against `A cos Phi` and `A sin Phi`, reported as
/// `c A cos(Phi + theta)` with `theta` in `[0, pi)` and `c` signed.
pub fn fit_oscillatory<P>(traj: &OdeTrajectory, window: (f64, f64), mut amp_phase: P) -> Result<AsymptoticFit, OracleError>
where
    P: FnMut(f64) -> Result<(f64, f64), OracleError>,
{
    let pts = window_samples(traj, window)?;
    if pts.len() < 4 {
        return Err(OracleError::Window { lo: window.0, hi: window.1 });
    }
    let mut basis = Vec::with_capacity(pts.len());
    for &(x, u) in &pts {
        let (amp, phi) = amp_phase(x)?;
        basis.push((amp * cos(phi), amp * sin(phi), u));
    }
    let (c, theta) = least_squares(&basis)?;
    let half = basis.len() / 2;
    let (c1, _) = least_squares(&basis[..half])?;
    let (c2, _) = least_squares(&basis[half..])?;
    let drift = fabs(fabs(c1) - fabs(c2)) / fabs(c);
    let residual = basis
        .iter()
        .map(|&(bc, bs, u)| {
            let model = c * (cos(theta) * bc - sin(theta) * bs);
            fabs(u - model) / fabs(c)
        })
        .fold(0.0, f64::max);
    Ok(AsymptoticFit {
        model: FitModel::Oscillatory,
        c,
        phase: Some(theta),
        residual,
        drift,
        window,
        samples: pts.len(),
        branch: 0,
    })
}

fn least_squares(rows: &[(f64, f64, f64)]) -> Result<(f64, f64), OracleError> {
    let (mut scc, mut scs, mut sss, mut scu, mut ssu) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(c, s, u) in rows {
        scc += c * c;
        scs += c * s;
        sss += s * s;
        scu += c * u;
        ssu += s * u;
    }
    let det = scc * sss - scs * scs;
    if !(fabs(det) > 1e-14 * scc * sss) {
        return Err(OracleError::InvalidInput("window does not resolve the oscillation"));
    }
    let p = (scu * sss - ssu * scs) / det;
    let q = (ssu * scc - scu * scs) / det;
    // p cos + q sin = c cos(Phi + theta) with p = c cos theta, q = -c sin theta.
    let mut c = hypot(p, q);
    let mut theta = atan2(-q, p);
    if theta < 0.0 {
        theta += PI;
        c = -c;
    }
    if theta >= PI {
        theta -= PI;
        c = -c;
    }
    Ok((c, theta))
}

/// Fit a trajectory against an approximant pair. Real exponents: ratio
/// against whichever branch gives the smaller drift. Imaginary exponents:
/// amplitude and phase. Fails if the drift exceeds `drift_tol`.
pub fn fit_asymptotic_constants(
    traj: &OdeTrajectory,
    pair: (&LGApproximant, &LGApproximant),
    window: (f64, f64),
    drift_tol: f64,
) -> Result<AsymptoticFit, OracleError> {
    if pair.0.zeta.value().im != 0.0 {
        let approx = pair.0;
        let fit = fit_oscillatory(traj, window, |x| Ok((approx.amplitude(x)?, approx.phase(x)?)))?;
        return fit.check_drift(drift_tol);
    }
    let mut best: Option<AsymptoticFit> = None;
    for (branch, approx) in [pair.0, pair.1].into_iter().enumerate() {
        let fit = fit_ratio(traj, window, FitModel::Exponential, |x| Ok((approx.log_magnitude(x)?, 1.0)));
        if let Ok(mut fit) = fit {
            fit.branch = branch;
            if best.as_ref().map_or(true, |b| fit.drift < b.drift) {
                best = Some(fit);
            }
        }
    }
    best.ok_or(OracleError::Window { lo: window.0, hi: window.1 })?.check_drift(drift_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Expr};
    use crate::math::{lin_space, sqrt};
    use crate::oracle::{integrate_ivp_at, IvpOptions, OdeSample};
    use crate::transform::{build_approximants, CoefficientSplit, Interval, Regime};

    fn synthetic(xs: &[f64], u: impl Fn(f64) -> f64) -> OdeTrajectory {
        let samples = xs.iter().map(|&x| OdeSample { x, u: u(x), du: 0.0 }).collect();
        OdeTrajectory { samples, order: 5, tol: 0.0, steps: 0, rejected: 0 }
    }

    #[test]
    fn synthetic_multiple_of_approximant() {
        let split = CoefficientSplit::new(parse("x^2").unwrap(), Expr::Const(0.0), Interval::half_line()).unwrap();
        let (plus, minus) = build_approximants(Regime::ExpInfinity, &split, 1.0).unwrap();
        let xs = lin_space(2.0, 6.0, 40);
        let traj = synthetic(&xs, |x| 2.5 * plus.normalized_value(x).unwrap().re);
        let fit = fit_asymptotic_constants(&traj, (&plus, &minus), (2.0, 6.0), 1e-9).unwrap();
        assert!(fabs(fit.c - 2.5) < 1e-10 && fit.branch == 0);
        let traj = synthetic(&xs, |x| -2.5 * minus.normalized_value(x).unwrap().re);
        let fit = fit_asymptotic_constants(&traj, (&plus, &minus), (2.0, 6.0), 1e-9).unwrap();
        assert!(fabs(fit.c + 2.5) < 1e-10 && fit.branch == 1);
    }

    #[test]
    fn exponential_trajectory() {
        let xs = lin_space(1.0, 5.0, 9);
        let traj = integrate_ivp_at(|_| 1.0, 0.0, 1.0, 1.0, &xs, &IvpOptions::new(1e-12)).unwrap();
        let fit = fit_ratio(&traj, (1.0, 5.0), FitModel::Exponential, |x| Ok((x, 1.0))).unwrap();
        assert!(fabs(fit.c - 1.0) < 1e-9 && fit.residual < 1e-9);
    }

    #[test]
    fn oscillatory_phase_normalization() {
        let xs = lin_space(0.0, 20.0, 200);
        for (c, theta) in [(1.5, 0.3), (-0.7, 2.9), (2.0, 0.0)] {
            let traj = synthetic(&xs, |x| c * cos(x + theta) / sqrt(1.0 + x));
            let fit = fit_oscillatory(&traj, (0.0, 20.0), |x| Ok((1.0 / sqrt(1.0 + x), x))).unwrap();
            let (fc, ft) = (fit.c, fit.phase.unwrap());
            assert!((0.0..PI).contains(&ft));
            assert!(fabs(fc - c) < 1e-12 && fabs(ft - theta) < 1e-12, "{fc} {ft}");
        }
        // theta outside [0, pi) flips the sign of c
        let traj = synthetic(&xs, |x| cos(x - 0.5));
        let fit = fit_oscillatory(&traj, (0.0, 20.0), |x| Ok((1.0, x))).unwrap();
        assert!(fabs(fit.c + 1.0) < 1e-12 && fabs(fit.phase.unwrap() - (PI - 0.5)) < 1e-12);
    }

    #[test]
    fn profiles_and_drift() {
        let xs = lin_space(10.0, 20.0, 11);
        let traj = synthetic(&xs, |x| 3.0 * x + 1.0);
        let fit = fit_profile(&traj, (10.0, 20.0), FitModel::Linear).unwrap();
        assert!(fabs(fit.drift - (1.0 / 10.0 - 1.0 / 20.0) / fit.c) < 1e-12);
        assert!(matches!(fit.clone().check_drift(1e-3), Err(OracleError::Drift { .. })));
        let traj = synthetic(&[1e-6, 1e-4], |x| -2.0 * ln(x));
        let fit = fit_profile(&traj, (1e-7, 1e-3), FitModel::Logarithmic).unwrap();
        assert!(fabs(fit.c - 2.0) < 1e-14 && fit.drift < 1e-14);
        assert!(matches!(fit_profile(&traj, (1.0, 2.0), FitModel::Constant), Err(OracleError::Window { .. })));
    }
}
