use crate::math::{exp, expm1, fabs, ln, pow, sqrt, tgamma, EULER_GAMMA, LN_2, PI};

use super::OracleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselKind {
    /// Modified, first kind.
    I,
    /// Modified, second kind.
    K,
    J,
    Y,
}

/// A Bessel function of a given kind and order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselFunction {
    pub kind: BesselKind,
    pub nu: f64,
}

impl BesselFunction {
    pub fn new(kind: BesselKind, nu: f64) -> Self {
        Self { kind, nu }
    }

    /// Closed forms exist for `nu = 1/2`, kinds `I` and `K`.
    pub fn has_closed_form(&self) -> bool {
        self.nu == 0.5 && matches!(self.kind, BesselKind::I | BesselKind::K)
    }

    /// `(value, derivative)` from the closed form or the ascending series.
    pub fn eval(&self, r: f64) -> Result<(f64, f64), OracleError> {
        if self.has_closed_form() {
            return Ok((closed_form_half(self.kind, r)?, closed_form_half_derivative(self.kind, r)?));
        }
        let s = match (self.kind, self.nu) {
            (BesselKind::I, nu) => bessel_i_series(nu, r, 200)?,
            (BesselKind::J, nu) => bessel_j_series(nu, r, 200)?,
            (BesselKind::Y, nu) if nu == 0.0 => bessel_y0_series(r, 200)?,
            (BesselKind::K, nu) if nu == 0.0 => bessel_k0_series(r, 200)?,
            _ => return Err(OracleError::InvalidInput("no series for this kind and order")),
        };
        Ok((s.value, s.derivative))
    }

    /// Leading small-argument coefficient `(1/2)^nu / Gamma(nu + 1)` of
    /// `r^{-nu} I_nu(r)` and `r^{-nu} J_nu(r)`.
    pub fn leading_coefficient(&self) -> f64 {
        pow(0.5, self.nu) / tgamma(self.nu + 1.0)
    }
}

/// Truncated series with a bound on the omitted remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub derivative: f64,
    pub remainder_bound: f64,
    pub terms: usize,
}

/// `I_{1/2}(r) = sqrt(2/(pi r)) sinh r`, `K_{1/2}(r) = sqrt(pi/(2r)) e^{-r}`.
pub fn closed_form_half(kind: BesselKind, r: f64) -> Result<f64, OracleError> {
    if !(r > 0.0) {
        return Err(OracleError::InvalidInput("r must be positive"));
    }
    let v = match kind {
        BesselKind::I => sqrt(2.0 / (PI * r)) * 0.5 * (exp(r) - exp(-r)),
        BesselKind::K => sqrt(PI / (2.0 * r)) * exp(-r),
        _ => return Err(OracleError::InvalidInput("closed forms exist for I and K only")),
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(OracleError::InvalidInput("I_{1/2} overflows; use log_closed_form_half_i"))
    }
}

pub fn closed_form_half_derivative(kind: BesselKind, r: f64) -> Result<f64, OracleError> {
    if !(r > 0.0) {
        return Err(OracleError::InvalidInput("r must be positive"));
    }
    let v = match kind {
        BesselKind::I => {
            let c = sqrt(2.0 / (PI * r));
            let (sh, ch) = (0.5 * (exp(r) - exp(-r)), 0.5 * (exp(r) + exp(-r)));
            c * (ch - sh / (2.0 * r))
        }
        BesselKind::K => -sqrt(PI / (2.0 * r)) * exp(-r) * (1.0 + 1.0 / (2.0 * r)),
        _ => return Err(OracleError::InvalidInput("closed forms exist for I and K only")),
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(OracleError::InvalidInput("I_{1/2}' overflows"))
    }
}

/// `ln I_{1/2}(r)`, finite for all `r > 0`.
pub fn log_closed_form_half_i(r: f64) -> Result<f64, OracleError> {
    if !(r > 0.0) {
        return Err(OracleError::InvalidInput("r must be positive"));
    }
    // sinh r = e^r (1 - e^{-2r}) / 2
    Ok(0.5 * ln(2.0 / (PI * r)) + r + ln(-expm1(-2.0 * r)) - LN_2)
}

/// Sum `t_0 + t_1 + ...` with `t_{k+1} = t_k * ratio(k)`; stops once the
/// geometric bound on the remainder is below `1e-17 |sum|`.
fn ascending<R: Fn(usize) -> f64>(
    t0: f64,
    ratio: R,
    max_terms: usize,
    alternating: bool,
) -> Result<(f64, f64, usize, [f64; 2]), OracleError> {
    // Returns (sum, bound, terms, [sum of k*t_k, unused]).
    let mut sum = 0.0;
    let mut weighted = 0.0;
    let mut t = t0;
    for k in 0..max_terms {
        sum += t;
        weighted += k as f64 * t;
        let q = ratio(k);
        let next = t * q;
        let bound = if alternating {
            fabs(next)
        } else if fabs(q) < 1.0 {
            fabs(next) / (1.0 - fabs(ratio(k + 1)).min(0.999))
        } else {
            f64::INFINITY
        };
        if bound <= 1e-17 * fabs(sum) || next == 0.0 {
            return Ok((sum, bound, k + 1, [weighted, 0.0]));
        }
        t = next;
    }
    Err(OracleError::Truncation { bound: fabs(t), terms: max_terms })
}

/// `I_nu(r) = sum (r/2)^{2k+nu} / (k! Gamma(k+nu+1))`.
pub fn bessel_i_series(nu: f64, r: f64, max_terms: usize) -> Result<SeriesValue, OracleError> {
    power_series(nu, r, max_terms, 1.0)
}

/// `J_nu(r) = sum (-1)^k (r/2)^{2k+nu} / (k! Gamma(k+nu+1))`.
pub fn bessel_j_series(nu: f64, r: f64, max_terms: usize) -> Result<SeriesValue, OracleError> {
    power_series(nu, r, max_terms, -1.0)
}

fn power_series(nu: f64, r: f64, max_terms: usize, sign: f64) -> Result<SeriesValue, OracleError> {
    if !(r > 0.0) || nu < 0.0 {
        return Err(OracleError::InvalidInput("need r > 0 and nu >= 0"));
    }
    let x = 0.25 * r * r;
    let t0 = pow(0.5 * r, nu) / tgamma(nu + 1.0);
    let ratio = |k: usize| sign * x / ((k as f64 + 1.0) * (k as f64 + nu + 1.0));
    let (sum, bound, terms, [weighted, _]) = ascending(t0, ratio, max_terms, sign < 0.0)?;
    // d/dr of (r/2)^{2k+nu} is (2k+nu)/r times the term.
    let derivative = (2.0 * weighted + nu * sum) / r;
    Ok(SeriesValue { value: sum, derivative, remainder_bound: bound, terms })
}

/// `Y_0(r) = (2/pi)(ln(r/2) + gamma) J_0(r) + (2/pi) sum_{k>=1} (-1)^{k+1} H_k (r^2/4)^k / (k!)^2`.
pub fn bessel_y0_series(r: f64, max_terms: usize) -> Result<SeriesValue, OracleError> {
    let j = bessel_j_series(0.0, r, max_terms)?;
    let (s, ds, bound, terms) = harmonic_series(r, max_terms, -1.0)?;
    let l = ln(0.5 * r) + EULER_GAMMA;
    let value = 2.0 / PI * (l * j.value + s);
    let derivative = 2.0 / PI * (j.value / r + l * j.derivative + ds);
    Ok(SeriesValue { value, derivative, remainder_bound: 2.0 / PI * (fabs(l) * j.remainder_bound + bound), terms })
}

/// `K_0(r) = -(ln(r/2) + gamma) I_0(r) + sum_{k>=1} H_k (r^2/4)^k / (k!)^2`.
pub fn bessel_k0_series(r: f64, max_terms: usize) -> Result<SeriesValue, OracleError> {
    let i = bessel_i_series(0.0, r, max_terms)?;
    let (s, ds, bound, terms) = harmonic_series(r, max_terms, 1.0)?;
    let l = ln(0.5 * r) + EULER_GAMMA;
    let value = -l * i.value + s;
    let derivative = -i.value / r - l * i.derivative + ds;
    Ok(SeriesValue { value, derivative, remainder_bound: fabs(l) * i.remainder_bound + bound, terms })
}

/// `sum_{k>=1} sign^{k+1} H_k x^k / (k!)^2` with `x = r^2/4`, and its
/// derivative in `r`.
fn harmonic_series(r: f64, max_terms: usize, sign: f64) -> Result<(f64, f64, f64, usize), OracleError> {
    if !(r > 0.0) {
        return Err(OracleError::InvalidInput("r must be positive"));
    }
    let x = 0.25 * r * r;
    let (mut sum, mut dsum) = (0.0, 0.0);
    let mut base = 1.0; // x^k / (k!)^2 with alternating sign
    let mut h = 0.0;
    for k in 1..=max_terms {
        let kf = k as f64;
        base *= x / (kf * kf);
        if k > 1 {
            base *= sign;
        }
        h += 1.0 / kf;
        let t = h * base;
        sum += t;
        dsum += 2.0 * kf * t / r;
        let next = fabs(base) * x / ((kf + 1.0) * (kf + 1.0)) * (h + 1.0 / (kf + 1.0));
        if next <= 1e-17 * fabs(sum) || next == 0.0 {
            return Ok((sum, dsum, next, k));
        }
    }
    Err(OracleError::Truncation { bound: fabs(base), terms: max_terms })
}

/// Ascending series value of `I_nu` or `J_nu`, failing unless the tracked
/// truncation bound is below `1e-12` relative.
pub fn small_argument_series(f: BesselFunction, r: f64, terms: usize) -> Result<f64, OracleError> {
    let s = match f.kind {
        BesselKind::I => bessel_i_series(f.nu, r, terms)?,
        BesselKind::J => bessel_j_series(f.nu, r, terms)?,
        _ => return Err(OracleError::InvalidInput("ascending series are provided for I and J")),
    };
    if s.remainder_bound > 1e-12 * fabs(s.value) {
        return Err(OracleError::Truncation { bound: s.remainder_bound, terms: s.terms });
    }
    Ok(s.value)
}
