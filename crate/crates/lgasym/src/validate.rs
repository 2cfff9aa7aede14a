//! Validation suites: the pipeline against closed forms, series and the
//! oracle integrator on the registered fixtures.

use std::f64::consts::PI;
use std::fmt;

use lgasym_core::analysis::Solution;
use lgasym_core::certificate::{default_target, find_cutoff};
use lgasym_core::expr::parse;
use lgasym_core::oracle::{
    bessel_j_series, bessel_k0_series, bessel_y0_series, closed_form_half, fit_oscillatory, integrate_ivp_at,
    BesselFunction, BesselKind, Fixture, IvpOptions, OracleError,
};
use lgasym_core::transform::{compute_psi, invert};
use lgasym_core::volterra::{solve_exponential, Branch, FnForcing, SolveOptions, Weight};
use lgasym_core::{analyze, analyze_fixture, AnalysisOptions, CoefficientSplit, Endpoint, Interval, Regime};
use serde::Serialize;

use crate::report::{format_float, Num};

pub const SUITES: [&str; 10] = [
    "bessel_half",
    "singular_inversion",
    "oscillatory",
    "resolvent",
    "gronwall",
    "convergence",
    "wronskian",
    "rejection",
    "psi_inversion",
    "log_regime",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expected {
    /// Relative error at most `tol`.
    Relative { value: f64, tol: f64 },
    Below(f64),
    Above(f64),
    Range(f64, f64),
    True,
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Expected::Relative { value, tol } => write!(f, "{} (rel tol {tol:e})", format_float(value)),
            Expected::Below(b) => write!(f, "< {b:e}"),
            Expected::Above(b) => write!(f, "> {b:e}"),
            Expected::Range(lo, hi) => write!(f, "in [{lo}, {hi}]"),
            Expected::True => write!(f, "true"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub measured: f64,
    pub expected: Expected,
    pub pass: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{status} {}/{}: measured {} expected {}", self.suite, self.name, format_float(self.measured), self.expected)
    }
}

#[derive(Serialize)]
struct CheckJson<'a> {
    suite: &'static str,
    name: &'a str,
    measured: Num,
    expected: String,
    pass: bool,
}

pub fn summary_json(checks: &[Check]) -> String {
    #[derive(Serialize)]
    struct Summary<'a> {
        schema: u32,
        passed: bool,
        checks: Vec<CheckJson<'a>>,
    }
    let s = Summary {
        schema: crate::report::SCHEMA,
        passed: checks.iter().all(|c| c.pass),
        checks: checks
            .iter()
            .map(|c| CheckJson {
                suite: c.suite,
                name: &c.name,
                measured: Num(c.measured),
                expected: c.expected.to_string(),
                pass: c.pass,
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&s).expect("summary serializes");
    out.push('\n');
    out
}

struct Suite {
    name: &'static str,
    checks: Vec<Check>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Self { name, checks: Vec::new() }
    }

    fn push(&mut self, name: impl Into<String>, measured: f64, expected: Expected) {
        let pass = match expected {
            Expected::Relative { value, tol } => rel(measured, value) <= tol,
            Expected::Below(b) => measured < b,
            Expected::Above(b) => measured > b,
            Expected::Range(lo, hi) => (lo..=hi).contains(&measured),
            Expected::True => measured == 1.0,
        };
        self.checks.push(Check { suite: self.name, name: name.into(), measured, expected, pass });
    }

    fn relative(&mut self, name: impl Into<String>, measured: f64, value: f64, tol: f64) {
        self.push(name, measured, Expected::Relative { value, tol });
    }

    fn flag(&mut self, name: impl Into<String>, ok: bool) {
        self.push(name, if ok { 1.0 } else { 0.0 }, Expected::True);
    }
}

type Res<T> = Result<T, String>;

fn err<E: fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

fn lin_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn quiet() -> AnalysisOptions {
    AnalysisOptions { oracle: false, ..AnalysisOptions::default() }
}

fn custom(f: &str, g: &str) -> Res<CoefficientSplit> {
    CoefficientSplit::new(parse(f).map_err(err)?, parse(g).map_err(err)?, Interval::half_line()).map_err(err)
}

fn bessel_half(s: &mut Suite) -> Res<()> {
    let an = analyze_fixture(Fixture::ModifiedBessel { nu: 0.5 }, Endpoint::Infinity, &quiet()).map_err(err)?;
    let (a, x) = (an.cutoff, 30.0);
    let u1 = an.dominant_branch().map_err(err)?.value(x).map_err(err)?;
    let (u2, _) = an.recessive(x).map_err(err)?;
    let i = x.sqrt() * closed_form_half(BesselKind::I, x).map_err(err)?;
    let k = x.sqrt() * closed_form_half(BesselKind::K, x).map_err(err)?;
    s.relative("sqrt(r) e^-r I_1/2 constant", i / (u1 * a.exp()), 1.0 / (2.0 * PI).sqrt(), 1e-6);
    s.relative("sqrt(r) e^r K_1/2 constant", k / (u2 * (-a).exp()), (PI / 2.0).sqrt(), 1e-6);
    Ok(())
}

fn singular_inversion(s: &mut Suite) -> Res<()> {
    let opts = AnalysisOptions { step: 1e-3, ..quiet() };
    let an = analyze_fixture(Fixture::ModifiedBessel { nu: 1.0 }, Endpoint::Zero, &opts).map_err(err)?;
    s.flag(format!("regime {} via inversion", an.regime().name()), an.regime() == Regime::ExpSingular);
    let branch = |r: f64| -> Res<f64> {
        let (w, dw) = an.recessive(an.chart.to_working(r)).map_err(err)?;
        Ok(an.chart.lift(r, w, dw).0 / r.sqrt())
    };
    let i1 = BesselFunction::new(BesselKind::I, 1.0);
    let scale = i1.eval(0.5).map_err(err)?.0 / branch(0.5)?;
    let v3 = scale * branch(1e-3)? / 1e-3;
    let v4 = scale * branch(1e-4)? / 1e-4;
    s.relative("r^-1 I_1 at r = 1e-3", v3, i1.leading_coefficient(), 1e-5);
    s.push("Cauchy drift 1e-3 vs 1e-4", rel(v3, v4), Expected::Below(1e-3));
    Ok(())
}

fn oscillatory(s: &mut Suite) -> Res<()> {
    let fx = Fixture::Bessel { nu: 0.0 };
    let an = analyze_fixture(fx, Endpoint::Infinity, &quiet()).map_err(err)?;
    if let Solution::Oscillatory(o) = &an.solution {
        s.flag("xi/eta well separated", o.coeffs.well_separated());
    }
    let a = an.cutoff;
    let model = |t: f64| {
        let z = an.ratio(t).map_err(|_| OracleError::InvalidInput("pipeline evaluation failed"))?;
        Ok((z.norm(), t - a + z.arg()))
    };
    let pts = lin_space(80.0, 160.0, 1601);
    let mut phases = Vec::new();
    for (label, series) in [("J0", bessel_j_series(0.0, 1.0, 200)), ("Y0", bessel_y0_series(1.0, 200))] {
        let v = series.map_err(err)?;
        let traj = integrate_ivp_at(
            |r| fx.eval_potential(r),
            1.0,
            v.value,
            0.5 * v.value + v.derivative,
            &pts,
            &IvpOptions::new(1e-12),
        )
        .map_err(err)?;
        let lo = fit_oscillatory(&traj, (80.0, 120.0), model).map_err(err)?;
        let hi = fit_oscillatory(&traj, (120.0, 160.0), model).map_err(err)?;
        s.relative(format!("{label} amplitude [80,120] vs [120,160]"), lo.c.abs(), hi.c.abs(), 1e-4);
        phases.push(lo.phase.unwrap_or(f64::NAN));
    }
    s.push("phase gap J0 - Y0", (phases[0] - phases[1]).abs(), Expected::Above(0.1));
    Ok(())
}

fn resolvent(s: &mut Suite) -> Res<()> {
    let target = 1.0 / (4.0 * PI);
    // lambda = 0: r v = 1/(4 pi) against the normalised u_2 = 1.
    let an = analyze_fixture(Fixture::Resolvent { n: 3, lambda: 0.0 }, Endpoint::Infinity, &quiet()).map_err(err)?;
    let lo = an.cutoff.max(10.0);
    let traj = integrate_ivp_at(|_| 0.0, 1.0, target, 0.0, &lin_space(lo, 2.0 * lo, 51), &IvpOptions::new(1e-12))
        .map_err(err)?;
    let mut c = 0.0;
    for p in &traj.samples {
        c += p.u / an.recessive(p.x).map_err(err)?.0;
    }
    s.relative("lambda = 0: r v constant", c / traj.samples.len() as f64, target, 1e-6);

    // lambda = 2: recessive branch, scaled so r v -> 1/(4 pi) at zero.
    let fx = Fixture::Resolvent { n: 3, lambda: 2.0 };
    let an = analyze_fixture(fx, Endpoint::Infinity, &quiet()).map_err(err)?;
    let far = an.cutoff + 8.0;
    let (u2, du2) = an.recessive(far).map_err(err)?;
    let back = integrate_ivp_at(|r| fx.eval_potential(r), far, u2, du2, &[1e-3, 2e-3], &IvpOptions::new(1e-12))
        .map_err(err)?;
    let w0 = 2.0 * back.samples[0].u - back.samples[1].u;
    let mut q = Vec::new();
    for r in lin_space(an.cutoff + 2.0, an.cutoff + 6.0, 41) {
        q.push((2f64.sqrt() * r).exp() * target / w0 * an.recessive(r).map_err(err)?.0);
    }
    let (qmin, qmax) = q.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    s.push("lambda = 2: drift of r e^(sqrt(2) r) v", (qmax - qmin) / qmax.abs(), Expected::Below(1e-4));
    Ok(())
}

/// Fixture runs for the envelope suite.
pub fn gronwall_runs() -> Vec<(String, Res<CoefficientSplit>, Endpoint)> {
    let mut runs = Vec::new();
    for fx in [
        Fixture::ModifiedBessel { nu: 0.0 },
        Fixture::ModifiedBessel { nu: 1.0 },
        Fixture::ModifiedBessel { nu: 1.5 },
        Fixture::ModifiedBessel { nu: 2.0 },
        Fixture::ModifiedBessel { nu: 3.0 },
        Fixture::Bessel { nu: 0.0 },
        Fixture::Bessel { nu: 1.0 },
        Fixture::Bessel { nu: 2.0 },
        Fixture::Resolvent { n: 3, lambda: 1.0 },
        Fixture::Resolvent { n: 4, lambda: 2.0 },
        Fixture::Resolvent { n: 5, lambda: 1.0 },
    ] {
        runs.push((fx.name(), fx.split_at_infinity().map_err(err), Endpoint::Infinity));
    }
    for nu in [0.0, 1.0] {
        let fx = Fixture::ModifiedBessel { nu };
        runs.push((format!("{} at zero", fx.name()), fx.split_at_zero().map_err(err), Endpoint::Zero));
    }
    for (f, g) in [("x^2 + 1", "exp(-x)"), ("0-x^2", "1/x^3"), ("0", "x^(-4)")] {
        runs.push((format!("f = {f}, g = {g}"), custom(f, g), Endpoint::Infinity));
    }
    runs
}

fn gronwall(s: &mut Suite) -> Res<()> {
    let opts = AnalysisOptions { tail_tol: 1e-6, ..quiet() };
    for (name, split, endpoint) in gronwall_runs() {
        let an = match split.and_then(|sp| analyze(sp, endpoint, &opts).map_err(err)) {
            Ok(an) => an,
            Err(e) => {
                s.flag(format!("{name}: {e}"), false);
                continue;
            }
        };
        let radius = an.certificate.disk_radius();
        let runs = match &an.solution {
            Solution::Oscillatory(o) => vec![&o.plus, &o.minus],
            other => vec![other.main()],
        };
        let mut worst_envelope: f64 = 0.0;
        let mut ok = radius < 1.0 && an.verification.passed() && an.verification.envelope_violations == 0;
        for sol in runs {
            worst_envelope = worst_envelope.max(sol.envelope_ratio());
            ok &= sol.running_l1_zg <= sol.g_l1.exp_m1() + 1e-8 && (sol.z_infinity - 1.0).norm() <= radius;
        }
        s.push(format!("{name}: max |z| / envelope"), worst_envelope, Expected::Range(0.0, 1.0));
        s.flag(format!("{name}: L1 bound, disk and radius < 1"), ok);
    }
    Ok(())
}

fn convergence(s: &mut Suite) -> Res<()> {
    let g = FnForcing::new(|x: f64| (-x).exp());
    let a = find_cutoff(&g, 0.0, default_target(), Weight::Abs).map_err(err)?;
    let z = |h: f64| -> Res<f64> {
        Ok(solve_exponential(&g, &SolveOptions::new(a).x_max(a + 40.0).step(h)).map_err(err)?.z_infinity.re)
    };
    let (z1, z2, z3) = (z(0.04)?, z(0.02)?, z(0.01)?);
    s.push("step-halving error ratio", (z1 - z2) / (z2 - z3), Expected::Range(3.5, 4.5));
    Ok(())
}

fn wronskian(s: &mut Suite) -> Res<()> {
    let an = analyze_fixture(Fixture::ModifiedBessel { nu: 1.0 }, Endpoint::Infinity, &quiet()).map_err(err)?;
    let u1 = an.dominant_branch().map_err(err)?;
    let u2 = |x: f64| an.recessive(x).map(|p| p.0).map_err(err);
    let mut ws = Vec::new();
    for x in lin_space(an.cutoff + 0.01, an.cutoff + 20.0, 41) {
        let d = 1e-3;
        let du2 = (8.0 * (u2(x + d)? - u2(x - d)?) - (u2(x + 2.0 * d)? - u2(x - 2.0 * d)?)) / (12.0 * d);
        ws.push(u1.value(x).map_err(err)? * du2 - u1.derivative(x).map_err(err)? * u2(x)?);
    }
    let drift = ws.iter().map(|w| rel(*w, ws[0])).fold(0.0, f64::max);
    let worst = ws.iter().copied().fold(ws[0], |acc, w| if rel(w, -2.0) > rel(acc, -2.0) { w } else { acc });
    s.push("relative drift over the working interval", drift, Expected::Below(1e-8));
    s.relative("W = u1 u2' - u1' u2", worst, -2.0, 1e-8);
    Ok(())
}

fn rejection(s: &mut Suite) -> Res<()> {
    let rejected = match analyze(custom("0", "2/x^2")?, Endpoint::Infinity, &quiet()) {
        Err(e) => e.is_hypothesis_failure(),
        Ok(_) => false,
    };
    s.flag("f = 0, g = 2/x^2 rejected", rejected);
    let traj = integrate_ivp_at(|x| 2.0 / (x * x), 1.0, 1.0, 1.0, &[1e2, 1e3], &IvpOptions::new(1e-12)).map_err(err)?;
    let (p, q) = (traj.samples[0], traj.samples[1]);
    s.relative("u / x^2 at 1e3", q.u / (q.x * q.x), 2.0 / 3.0, 1e-6);
    s.push("u'(1e3) / u'(1e2)", q.du / p.du, Expected::Above(9.0));
    Ok(())
}

fn psi_inversion(s: &mut Suite) -> Res<()> {
    let split = Fixture::ModifiedBessel { nu: 1.0 }.split_at_infinity().map_err(err)?;
    let psi = compute_psi(&split).map_err(err)?;
    let inv = compute_psi(&invert(&split).map_err(err)?).map_err(err)?;
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let t = 1e-2 * 1e4f64.powf(k as f64 / 19.0);
        let lhs = inv.eval(t).map_err(err)?;
        let rhs = psi.eval(1.0 / t).map_err(err)? / (t * t);
        worst = worst.max(rel(lhs, rhs));
    }
    s.push("max rel diff over 20 log points", worst, Expected::Below(1e-8));
    Ok(())
}

fn log_regime(s: &mut Suite) -> Res<()> {
    let an = analyze_fixture(Fixture::ModifiedBessel { nu: 0.0 }, Endpoint::Zero, &quiet()).map_err(err)?;
    s.flag(format!("chart {}", an.chart.name()), an.chart.name() == "logarithmic");
    // w(t) = K_0(e^{-t}), dw/dt = -r K_0'(r), matched at t0.
    let t0 = an.cutoff.max(1.0);
    let r0 = (-t0).exp();
    let k = bessel_k0_series(r0, 200).map_err(err)?;
    let (w1, dw1) = an.main_branch(t0).map_err(err)?;
    let (w2, dw2) = an.recessive(t0).map_err(err)?;
    let (w1, dw1, dk) = (w1.re, dw1.re, -r0 * k.derivative);
    let det = w1 * dw2 - w2 * dw1;
    let c1 = (k.value * dw2 - w2 * dk) / det;
    let c2 = (w1 * dk - k.value * dw1) / det;
    let predict = |r: f64| -> Res<f64> {
        let t = -r.ln();
        Ok(c1 * an.main_branch(t).map_err(err)?.0.re + c2 * an.recessive(t).map_err(err)?.0)
    };
    let (p4, p6) = (predict(1e-4)?, predict(1e-6)?);
    s.relative("K0(1e-6) against the series", p6, bessel_k0_series(1e-6, 200).map_err(err)?.value, 1e-4);
    let (q4, q6) = (p4 / 1e-4f64.ln().abs(), p6 / 1e-6f64.ln().abs());
    s.push("K0 / |ln r| at 1e-6", q6, Expected::Above(0.5));
    s.push("Cauchy drift of K0 / |ln r|, 1e-4 vs 1e-6", rel(q4, q6), Expected::Below(2e-2));
    Ok(())
}

fn runner(name: &str) -> Option<fn(&mut Suite) -> Res<()>> {
    Some(match name {
        "bessel_half" => bessel_half,
        "singular_inversion" => singular_inversion,
        "oscillatory" => oscillatory,
        "resolvent" => resolvent,
        "gronwall" => gronwall,
        "convergence" => convergence,
        "wronskian" => wronskian,
        "rejection" => rejection,
        "psi_inversion" => psi_inversion,
        "log_regime" => log_regime,
        _ => return None,
    })
}

/// Run one suite; computation errors become failed checks.
pub fn run_suite(name: &str) -> Option<Vec<Check>> {
    let run = runner(name)?;
    let key = SUITES.iter().copied().find(|s| *s == name)?;
    let mut suite = Suite::new(key);
    if let Err(e) = run(&mut suite) {
        suite.flag(format!("error: {e}"), false);
    }
    Some(suite.checks)
}

/// Run the named suites concurrently; results keep the given order.
pub fn run_suites(names: &[&str]) -> Result<Vec<Check>, String> {
    for n in names {
        if runner(n).is_none() {
            return Err(format!("unknown suite {n:?}; expected one of {} or all", SUITES.join(", ")));
        }
    }
    let results: Vec<Vec<Check>> = std::thread::scope(|scope| {
        let handles: Vec<_> = names.iter().map(|n| scope.spawn(move || run_suite(n).unwrap_or_default())).collect();
        handles
            .into_iter()
            .zip(names)
            .map(|(h, n)| {
                h.join().unwrap_or_else(|_| {
                    vec![Check {
                        suite: SUITES.iter().copied().find(|s| s == n).unwrap_or("unknown"),
                        name: "panicked".into(),
                        measured: 0.0,
                        expected: Expected::True,
                        pass: false,
                    }]
                })
            })
            .collect()
    });
    Ok(results.into_iter().flatten().collect())
}
