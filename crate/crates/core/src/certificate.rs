//! Cutoff selection and Gronwall certificates.
//!
//! Beyond a cutoff `a` with `||g||_{L1(a, inf)} < log 2` the normalised
//! solution obeys `|z(x)| <= exp(int_a^x |g|)` and
//! `int_a^inf |g z| <= e^{||g||} - 1 < 1`, so `z_inf` lies in the disk of
//! that radius about 1 and cannot vanish.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::math::{self, fabs, LN_2};
use crate::quadrature::{Integrator, QuadError};
use crate::volterra::{Forcing, VolterraError, VolterraSolution, Weight};

/// Safety factor on the `log 2` threshold.
pub const SAFETY: f64 = 0.9;

/// Relative margin below which a tail counts as strictly under `log 2`.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

/// Default `find_cutoff` target.
pub fn default_target() -> f64 {
    LN_2 * SAFETY
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CertificateError {
    #[error("g is not integrable near infinity from {left}: {detail}")]
    NotIntegrable { left: f64, detail: String },
    #[error(transparent)]
    Volterra(#[from] VolterraError),
}

/// One inequality: `value` compared against `threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateCheck {
    pub name: String,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
    pub pass: bool,
}

impl CertificateCheck {
    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value: Some(value), threshold: Some(threshold), pass: value < threshold }
    }

    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value: Some(value), threshold: Some(threshold), pass: value <= threshold }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub cutoff_a: f64,
    /// `||g||_{L1(a, inf)}` (`s`-weighted for the algebraic kernel).
    pub g_l1_tail: f64,
    /// `e^{g_l1_tail} - 1`, the radius of the disk about 1 containing `z_inf`.
    pub zg_l1_bound: f64,
    pub weight: Weight,
    pub checks: Vec<CertificateCheck>,
}

impl Certificate {
    pub fn disk_center(&self) -> f64 {
        1.0
    }

    pub fn disk_radius(&self) -> f64 {
        self.zg_l1_bound
    }

    /// All recorded checks pass.
    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// `exp(int_a^x |g|)` by quadrature.
    pub fn pointwise_envelope<F: Forcing + ?Sized>(&self, g: &F, x: f64) -> Result<f64, CertificateError> {
        if x <= self.cutoff_a {
            return Ok(1.0);
        }
        let mut failure = None;
        let r = Integrator::new(1e-12).finite(
            |s| match g.value(s) {
                Ok(v) => match self.weight {
                    Weight::AbsS | Weight::S => s * fabs(v),
                    _ => fabs(v),
                },
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            self.cutoff_a,
            x,
        );
        if let Some(e) = failure {
            return Err(e.into());
        }
        Ok(math::exp(r.map_err(VolterraError::from)?.value))
    }
}

fn tail<F: Forcing + ?Sized>(g: &F, a: f64, weight: Weight) -> Result<f64, CertificateError> {
    match g.tail(a, weight) {
        Ok(v) => Ok(v),
        Err(VolterraError::Quadrature(QuadError::Divergent { .. })) => Err(CertificateError::NotIntegrable {
            left: a,
            detail: "the tail integral diverges".into(),
        }),
        Err(e) => Err(e.into()),
    }
}

/// Smallest point of the 3-significant-digit lattice that is `>= x`.
fn lattice_up(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let step = lattice_step(x);
    let p = libm::ceil(x / step - 1e-9) * step;
    if p < x { p + step } else { p }
}

fn lattice_step(x: f64) -> f64 {
    let e = libm::floor(libm::log10(x)) - 2.0;
    math::pow(10.0, e)
}

fn lattice_next(p: f64) -> f64 {
    if p <= 0.0 {
        return 1e-3;
    }
    lattice_up(p * (1.0 + 1e-12) + 0.5 * lattice_step(p))
}

/// Smallest `a >= left` on a 3-significant-digit lattice with
/// `||g||_{L1(a, inf)} <= target`. The lattice does not depend on `left`,
/// so the result is monotone in `left`.
pub fn find_cutoff<F: Forcing + ?Sized>(g: &F, left: f64, target: f64, weight: Weight) -> Result<f64, CertificateError> {
    let ok = |a: f64| -> Result<bool, CertificateError> { Ok(tail(g, a, weight)? <= target) };
    let start = lattice_up(left);
    if ok(start)? {
        return Ok(start);
    }
    let mut lo = start;
    let mut hi = lattice_up(2.0 * start.max(1.0));
    let mut doublings = 0;
    while !ok(hi)? {
        lo = hi;
        hi = lattice_up(2.0 * hi);
        doublings += 1;
        if doublings > 60 {
            return Err(CertificateError::NotIntegrable {
                left,
                detail: format!("the tail never drops below {target} up to {hi:e}"),
            });
        }
    }
    loop {
        let next = lattice_next(lo);
        if next >= hi {
            return Ok(hi);
        }
        let mut mid = lattice_up(0.5 * (lo + hi));
        if mid >= hi || mid <= lo {
            mid = next;
        }
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// Certificate at `a`: the tail mass, the disk radius and the `log 2` check.
pub fn gronwall_certificate<F: Forcing + ?Sized>(g: &F, a: f64, weight: Weight) -> Result<Certificate, CertificateError> {
    let g_l1_tail = tail(g, a, weight)?;
    let zg_l1_bound = math::expm1(g_l1_tail);
    // Strict, with room for the quadrature error of the tail itself.
    let checks = alloc::vec![
        CertificateCheck::below("g_l1_tail < log 2", g_l1_tail, LN_2 * (1.0 - BOUNDARY_MARGIN)),
        CertificateCheck::below("disk radius < 1", zg_l1_bound, 1.0 - BOUNDARY_MARGIN),
    ];
    Ok(Certificate { cutoff_a: a, g_l1_tail, zg_l1_bound, weight, checks })
}

/// Outcome of replaying a certificate against a computed solution.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<CertificateCheck>,
    /// Grid points violating the pointwise envelope.
    pub envelope_violations: usize,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Replays the certificate inequalities on `sol`. `sol.grid[0]` corresponds
/// to `cert.cutoff_a` (possibly in a transformed variable); masses are
/// compared, not positions.
pub fn verify_certificate(cert: &Certificate, sol: &VolterraSolution) -> VerificationReport {
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for (z, cum) in sol.z.iter().zip(&sol.cumulative_l1) {
        let ratio = z.norm() / math::exp(*cum);
        worst = worst.max(ratio);
        if !(ratio <= 1.0) {
            violations += 1;
        }
    }
    let mut checks = Vec::new();
    checks.push(CertificateCheck {
        name: "pointwise envelope |z| <= exp(int |g|)".into(),
        value: Some(worst),
        threshold: Some(1.0),
        pass: violations == 0,
    });
    let mass = *sol.cumulative_l1.last().unwrap_or(&0.0);
    checks.push(CertificateCheck::at_most(
        "grid mass <= certified tail",
        mass,
        cert.g_l1_tail * (1.0 + 1e-8) + 1e-12,
    ));
    checks.push(CertificateCheck::at_most(
        "int |g z| <= e^||g|| - 1",
        sol.running_l1_zg,
        cert.zg_l1_bound + 1e-8,
    ));
    checks.push(CertificateCheck::at_most(
        "|z_inf - 1| <= radius",
        (sol.z_infinity - 1.0).norm(),
        cert.zg_l1_bound + sol.tail_error,
    ));
    checks.push(CertificateCheck::below("radius < 1", cert.zg_l1_bound, 1.0));
    VerificationReport { checks, envelope_violations: violations }
}
