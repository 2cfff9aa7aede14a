//! Floating-point helpers backed by `libm` so the crate stays `no_std`.

pub use libm::{atan2, cos, exp, expm1, fabs, hypot, log as ln, log1p, pow, sin, sqrt, tgamma};

pub type Complex = num_complex::Complex64;

pub const LN_2: f64 = core::f64::consts::LN_2;
pub const PI: f64 = core::f64::consts::PI;
/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Relative difference `|a - b| / max(|a|, |b|, tiny)`.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = fabs(a).max(fabs(b)).max(f64::MIN_POSITIVE);
    fabs(a - b) / scale
}

/// `n` points log-spaced between `lo` and `hi` inclusive (`lo, hi > 0`).
pub fn log_space(lo: f64, hi: f64, n: usize) -> alloc::vec::Vec<f64> {
    if n == 1 {
        return alloc::vec![lo];
    }
    let (l0, l1) = (ln(lo), ln(hi));
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                exp(l0 + (l1 - l0) * i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

/// `n` points evenly spaced between `lo` and `hi` inclusive.
pub fn lin_space(lo: f64, hi: f64, n: usize) -> alloc::vec::Vec<f64> {
    if n == 1 {
        return alloc::vec![lo];
    }
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}
