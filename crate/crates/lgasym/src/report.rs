//! The versioned JSON analysis report.

use std::time::Duration;

use lgasym_core::analysis::Solution;
use lgasym_core::certificate::CertificateCheck;
use lgasym_core::math::Complex;
use lgasym_core::{Analysis, AnalysisError, AnalysisOptions, Endpoint};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

pub const SCHEMA: u32 = 1;

/// A float printed with 17 significant digits; `null` when not finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format_float(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> Option<Num> {
    x.map(Num)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    HypothesisFailure,
    Error,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::HypothesisFailure => 2,
            Status::Error => 1,
        }
    }
}

/// The invocation as given.
#[derive(Debug, Clone, Serialize)]
pub struct InputEcho {
    pub f: String,
    pub g: String,
    pub interval: String,
    pub endpoint: &'static str,
    pub tol: Num,
    pub tail_tol: Num,
    pub step: Num,
    pub xmax: Option<Num>,
    pub target: Num,
    pub seed: Option<u64>,
}

impl InputEcho {
    pub fn new(f: &str, g: &str, interval: &str, endpoint: Endpoint, options: &AnalysisOptions, seed: Option<u64>) -> Self {
        Self {
            f: f.into(),
            g: g.into(),
            interval: interval.into(),
            endpoint: endpoint.name(),
            tol: Num(options.tol),
            tail_tol: Num(options.tail_tol),
            step: Num(options.step),
            xmax: opt(options.x_max),
            target: Num(options.target),
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Option<Num>,
    pub threshold: Option<Num>,
    pub pass: bool,
}

impl From<&CertificateCheck> for Check {
    fn from(c: &CertificateCheck) -> Self {
        Self { name: c.name.clone(), value: opt(c.value), threshold: opt(c.threshold), pass: c.pass }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChartReport {
    pub name: &'static str,
    pub description: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct WorkingReport {
    pub f: String,
    pub g: String,
    pub regime: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub cutoff_a: Num,
    pub cutoff_original: Num,
    pub g_l1_tail: Num,
    pub zg_l1_bound: Num,
    pub disk_center: Num,
    pub disk_radius: Num,
    pub holds: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationSection {
    pub passed: bool,
    pub envelope_violations: usize,
    pub checks: Vec<Check>,
}

/// One connection constant with the tolerances it was computed under.
#[derive(Debug, Clone, Serialize)]
pub struct Constant {
    pub name: &'static str,
    pub re: Num,
    pub im: Num,
    /// Estimated error of the tail completion beyond the solver grid.
    pub tail_error: Num,
    pub tail_tol: Num,
    pub step: Num,
}

#[derive(Debug, Clone, Serialize)]
pub struct Connection {
    pub kind: &'static str,
    pub constants: Vec<Constant>,
    pub grid_end: Num,
    pub grid_points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub window: [Num; 2],
    pub model: &'static str,
    pub c: Num,
    pub phase: Option<Num>,
    pub residual: Num,
    pub drift: Num,
    pub max_deviation: Num,
    pub tol: Num,
    pub steps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub analysis_ms: Num,
    pub oracle_ms: Num,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub status: Status,
    pub input: InputEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduction: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypothesis_checks: Option<Vec<Check>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub working: Option<WorkingReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub connection: Option<Connection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formulas: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

fn constant(name: &'static str, z: Complex, tail_error: f64, options: &AnalysisOptions) -> Constant {
    Constant {
        name,
        re: Num(z.re),
        im: Num(z.im),
        tail_error: Num(tail_error),
        tail_tol: Num(options.tail_tol),
        step: Num(options.step),
    }
}

fn error_kind(e: &AnalysisError) -> &'static str {
    match e {
        AnalysisError::Hypothesis { .. } => "hypothesis_failed",
        AnalysisError::NotIntegrable { .. } => "not_integrable",
        AnalysisError::Transform(_) => "transform",
        AnalysisError::Volterra(_) => "volterra",
        AnalysisError::Oracle(_) => "oracle",
        AnalysisError::InvalidInput(_) => "invalid_input",
    }
}

impl Report {
    fn empty(input: InputEcho, status: Status) -> Self {
        Self {
            schema: SCHEMA,
            status,
            input,
            regime: None,
            reduction: None,
            hypothesis_checks: None,
            chart: None,
            working: None,
            certificate: None,
            verification: None,
            connection: None,
            formulas: None,
            oracle: None,
            error: None,
            timings: None,
        }
    }

    /// A report for a run that failed before producing an analysis.
    pub fn failure(input: InputEcho, kind: &'static str, message: String, hypothesis: bool) -> Self {
        let status = if hypothesis { Status::HypothesisFailure } else { Status::Error };
        let mut r = Self::empty(input, status);
        r.error = Some(ErrorReport { kind, message });
        r
    }

    pub fn from_error(input: InputEcho, e: &AnalysisError) -> Self {
        Self::failure(input, error_kind(e), e.to_string(), e.is_hypothesis_failure())
    }

    pub fn from_analysis(input: InputEcho, an: &Analysis) -> Self {
        let mut r = Self::empty(input, Status::Ok);
        let opts = &an.options;
        r.regime = Some(an.regime().name());
        r.reduction = Some(an.classification.reduction.name());
        r.hypothesis_checks = Some(
            an.classification
                .checks
                .iter()
                .map(|c| Check { name: c.name.clone(), value: opt(c.value), threshold: None, pass: c.passed })
                .collect(),
        );
        r.chart = Some(ChartReport { name: an.chart.name(), description: an.chart.description() });
        r.working = Some(WorkingReport {
            f: an.working.f().to_string(),
            g: an.working.g().to_string(),
            regime: an.working_regime.name(),
        });
        let cert = &an.certificate;
        r.certificate = Some(CertificateReport {
            cutoff_a: Num(an.cutoff),
            cutoff_original: Num(an.cutoff_original()),
            g_l1_tail: Num(cert.g_l1_tail),
            zg_l1_bound: Num(cert.zg_l1_bound),
            disk_center: Num(cert.disk_center()),
            disk_radius: Num(cert.disk_radius()),
            holds: cert.holds(),
            checks: cert.checks.iter().map(Check::from).collect(),
        });
        r.verification = Some(VerificationSection {
            passed: an.verification.passed(),
            envelope_violations: an.verification.envelope_violations,
            checks: an.verification.checks.iter().map(Check::from).collect(),
        });
        let main = an.solution.main();
        r.connection = Some(match &an.solution {
            Solution::Oscillatory(o) => {
                let cf = o.coeffs;
                let (ep, em) = (o.plus.tail_error, o.minus.tail_error);
                Connection {
                    kind: "oscillatory",
                    constants: vec![
                        constant("xi1", cf.xi1, ep, opts),
                        constant("xi2", cf.xi2, ep, opts),
                        constant("eta1", cf.eta1, em, opts),
                        constant("eta2", cf.eta2, em, opts),
                        constant("determinant", cf.determinant(), 2.0 * (ep + em), opts),
                    ],
                    grid_end: Num(main.x_max()),
                    grid_points: main.grid.len(),
                }
            }
            Solution::Exponential(s) | Solution::Algebraic(s) => Connection {
                kind: if matches!(an.solution, Solution::Algebraic(_)) { "algebraic" } else { "exponential" },
                constants: vec![constant("z_infinity", s.z_infinity, s.tail_error, opts)],
                grid_end: Num(s.x_max()),
                grid_points: s.grid.len(),
            },
        });
        r.formulas = Some(an.formulas());
        r.oracle = an.oracle.as_ref().map(|o| OracleReport {
            window: [Num(o.window.0), Num(o.window.1)],
            model: o.fit.model.name(),
            c: Num(o.fit.c),
            phase: opt(o.fit.phase),
            residual: Num(o.fit.residual),
            drift: Num(o.fit.drift),
            max_deviation: Num(o.max_deviation),
            tol: Num(o.tol),
            steps: o.steps,
        });
        r
    }

    pub fn with_timings(mut self, analysis: Duration, oracle: Duration) -> Self {
        self.timings = Some(Timings {
            analysis_ms: Num(analysis.as_secs_f64() * 1e3),
            oracle_ms: Num(oracle.as_secs_f64() * 1e3),
        });
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
