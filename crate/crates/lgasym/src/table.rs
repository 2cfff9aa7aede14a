//! CSV tabulation of an analysis in the input variable.

use std::io::Write;

use lgasym_core::analysis::TableRow;
use lgasym_core::{Analysis, AnalysisError, Endpoint};

use crate::report::format_float;

pub const HEADER: [&str; 5] = ["x", "u_numeric", "approximant", "ratio", "envelope_bound"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// `count` points from `from` to `to` inclusive.
pub fn sample_points(from: f64, to: f64, count: usize, spacing: Spacing) -> Result<Vec<f64>, String> {
    if count < 2 {
        return Err("count must be at least 2".into());
    }
    if !(from.is_finite() && to.is_finite() && from < to) {
        return Err(format!("invalid range {from}..{to}"));
    }
    let n = (count - 1) as f64;
    Ok(match spacing {
        Spacing::Linear => (0..count).map(|k| from + (to - from) * k as f64 / n).collect(),
        Spacing::Log => {
            if from <= 0.0 {
                return Err("log spacing needs a positive range".into());
            }
            let (lo, hi) = (from.ln(), to.ln());
            (0..count).map(|k| (lo + (hi - lo) * k as f64 / n).exp()).collect()
        }
    })
}

/// The default range: a decade beyond the cutoff at infinity, two decades
/// below it at zero.
pub fn default_range(an: &Analysis) -> (f64, f64) {
    let a = an.cutoff_original();
    match an.endpoint {
        Endpoint::Infinity => {
            let lo = a.max(f64::MIN_POSITIVE);
            (lo, 10.0 * lo.max(1.0))
        }
        Endpoint::Zero => (a / 100.0, a),
    }
}

pub fn tabulate(an: &Analysis, xs: &[f64]) -> Result<Vec<TableRow>, AnalysisError> {
    an.table(xs)
}

pub fn write_csv<W: Write>(out: W, rows: &[TableRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([r.x, r.u, r.approximant, r.ratio, r.envelope_bound].map(format_float))?;
    }
    w.flush()?;
    Ok(())
}
