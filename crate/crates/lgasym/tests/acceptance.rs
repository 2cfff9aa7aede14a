//! The ten acceptance criteria, one pass/fail line each.
//!
//! Reference values come from closed forms and ascending series evaluated
//! here, and from the Dormand-Prince oracle integrator.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lgasym_core::expr::parse;
use lgasym_core::oracle::{fit_oscillatory, integrate_ivp_at, Fixture, IvpOptions, OracleError};
use lgasym_core::transform::{compute_psi, invert};
use lgasym_core::volterra::{solve_exponential, Branch, FnForcing, SolveOptions, Weight};
use lgasym_core::{analyze, analyze_fixture, AnalysisOptions, CoefficientSplit, Endpoint, Interval, Regime};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

type Criterion = fn() -> Result<Outcome, String>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn no_oracle() -> AnalysisOptions {
    AnalysisOptions { oracle: false, ..AnalysisOptions::default() }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

fn harmonic(k: usize) -> f64 {
    (1..=k).map(|j| 1.0 / j as f64).sum()
}

/// `I_nu(r)` and its derivative for integer `nu` by the ascending series.
fn bessel_i(nu: usize, r: f64) -> (f64, f64) {
    let (mut v, mut d) = (0.0, 0.0);
    for k in 0..40 {
        let p = 2 * k + nu;
        let c = 1.0 / (factorial(k) * factorial(k + nu) * 2f64.powi(p as i32));
        v += c * r.powi(p as i32);
        if p > 0 {
            d += c * p as f64 * r.powi(p as i32 - 1);
        }
    }
    (v, d)
}

fn bessel_j0(r: f64) -> (f64, f64) {
    let q = r * r / 4.0;
    let (mut v, mut d) = (0.0, 0.0);
    for k in 0..40 {
        let c = (-1f64).powi(k as i32) / factorial(k).powi(2);
        v += c * q.powi(k as i32);
        if k > 0 {
            d += c * k as f64 * q.powi(k as i32 - 1) * r / 2.0;
        }
    }
    (v, d)
}

fn bessel_y0(r: f64) -> (f64, f64) {
    let (j, dj) = bessel_j0(r);
    let q = r * r / 4.0;
    let (mut s, mut ds) = (0.0, 0.0);
    for k in 1..40 {
        let c = (-1f64).powi(k as i32 + 1) * harmonic(k) / factorial(k).powi(2);
        s += c * q.powi(k as i32);
        ds += c * k as f64 * q.powi(k as i32 - 1) * r / 2.0;
    }
    let l = (r / 2.0).ln() + EULER_GAMMA;
    (2.0 / PI * (l * j + s), 2.0 / PI * (j / r + l * dj + ds))
}

fn bessel_k0(r: f64) -> (f64, f64) {
    let (i, di) = bessel_i(0, r);
    let q = r * r / 4.0;
    let (mut s, mut ds) = (0.0, 0.0);
    for k in 1..40 {
        let c = harmonic(k) / factorial(k).powi(2);
        s += c * q.powi(k as i32);
        ds += c * k as f64 * q.powi(k as i32 - 1) * r / 2.0;
    }
    let l = (r / 2.0).ln() + EULER_GAMMA;
    (-l * i + s, -i / r - l * di + ds)
}

fn log_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64)).collect()
}

fn lin_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// Half-order modified Bessel: the dominant and recessive constants at x = 30.
fn criterion_1() -> Result<Outcome, String> {
    let start = Instant::now();
    let an = analyze_fixture(Fixture::ModifiedBessel { nu: 0.5 }, Endpoint::Infinity, &no_oracle()).map_err(|e| e.to_string())?;
    let a = an.cutoff;
    let x = 30.0;
    let u1 = an.dominant_branch().map_err(|e| e.to_string())?.value(x).map_err(|e| e.to_string())?;
    let (u2, _) = an.recessive(x).map_err(|e| e.to_string())?;
    // sqrt(r) I_{1/2}(r) = sqrt(2/pi) sinh r, sqrt(r) K_{1/2}(r) = sqrt(pi/2) e^{-r}
    let c_i = (2.0 / PI).sqrt() * x.sinh() / (u1 * a.exp());
    let c_k = (PI / 2.0).sqrt() * (-x).exp() / (u2 * (-a).exp());
    let (ei, ek) = (rel(c_i, 1.0 / (2.0 * PI).sqrt()), rel(c_k, (PI / 2.0).sqrt()));
    let elapsed = start.elapsed();
    Ok(outcome(
        ei <= 1e-6 && ek <= 1e-6 && elapsed < Duration::from_secs(5),
        format!("c_I = {c_i:.10} (rel err {ei:.1e}), c_K = {c_k:.10} (rel err {ek:.1e}), {:.2} s", elapsed.as_secs_f64()),
    ))
}

/// Order-one modified Bessel near zero through inversion.
fn criterion_2() -> Result<Outcome, String> {
    let opts = AnalysisOptions { step: 1e-3, ..no_oracle() };
    let an = analyze_fixture(Fixture::ModifiedBessel { nu: 1.0 }, Endpoint::Zero, &opts).map_err(|e| e.to_string())?;
    if an.regime() != Regime::ExpSingular {
        return Ok(outcome(false, format!("regime {}", an.regime().name())));
    }
    // I_1 is recessive at zero; in t = 1/r it is the recessive working branch.
    let branch = |r: f64| -> Result<f64, String> {
        let (w, dw) = an.recessive(an.chart.to_working(r)).map_err(|e| e.to_string())?;
        let (u, _) = an.chart.lift(r, w, dw);
        Ok(u / r.sqrt())
    };
    let scale = bessel_i(1, 0.5).0 / branch(0.5)?;
    let v3 = scale * branch(1e-3)? / 1e-3;
    let v4 = scale * branch(1e-4)? / 1e-4;
    let (e3, cauchy) = (rel(v3, 0.5), rel(v3, v4));
    Ok(outcome(
        e3 <= 1e-5 && cauchy < 1e-3,
        format!("r^-1 I_1 at 1e-3 = {v3:.10} (rel err {e3:.1e}), Cauchy 1e-3 vs 1e-4 = {cauchy:.1e}"),
    ))
}

/// Zero-order Bessel: amplitude stability across windows, distinct phases.
fn criterion_3() -> Result<Outcome, String> {
    let start = Instant::now();
    let an = analyze_fixture(Fixture::Bessel { nu: 0.0 }, Endpoint::Infinity, &no_oracle()).map_err(|e| e.to_string())?;
    let a = an.cutoff;
    let model = |t: f64| {
        let z = an.ratio(t).map_err(|_| OracleError::InvalidInput("pipeline evaluation failed"))?;
        Ok((z.norm(), t - a + z.arg()))
    };
    let pts = lin_space(80.0, 160.0, 1601);
    let fx = Fixture::Bessel { nu: 0.0 };
    let mut fits = Vec::new();
    for (z, dz) in [bessel_j0(1.0), bessel_y0(1.0)] {
        // w = sqrt(r) Z_0 from r = 1
        let traj = integrate_ivp_at(|r| fx.eval_potential(r), 1.0, z, 0.5 * z + dz, &pts, &IvpOptions::new(1e-12))
            .map_err(|e| e.to_string())?;
        let lo = fit_oscillatory(&traj, (80.0, 120.0), model).map_err(|e| e.to_string())?;
        let hi = fit_oscillatory(&traj, (120.0, 160.0), model).map_err(|e| e.to_string())?;
        fits.push((lo, hi));
    }
    let amp_j = rel(fits[0].0.c.abs(), fits[0].1.c.abs());
    let amp_y = rel(fits[1].0.c.abs(), fits[1].1.c.abs());
    let gap = (fits[0].0.phase.unwrap() - fits[1].0.phase.unwrap()).abs();
    let elapsed = start.elapsed();
    Ok(outcome(
        amp_j <= 1e-4 && amp_y <= 1e-4 && gap > 0.1 && elapsed < Duration::from_secs(10),
        format!(
            "J0 amplitude {:.8} vs {:.8} (rel {amp_j:.1e}), Y0 rel {amp_y:.1e}, phase gap {gap:.4} rad, {:.2} s",
            fits[0].0.c.abs(),
            fits[0].1.c.abs(),
            elapsed.as_secs_f64()
        ),
    ))
}

/// Fundamental solution of the radial resolvent in three dimensions.
fn criterion_4() -> Result<Outcome, String> {
    let target = 1.0 / (4.0 * PI);
    // lambda = 0: w = r v with v = 1/(4 pi r), against the normalised u_2 -> 1.
    let an0 = analyze_fixture(Fixture::Resolvent { n: 3, lambda: 0.0 }, Endpoint::Infinity, &no_oracle())
        .map_err(|e| e.to_string())?;
    let window = lin_space(an0.cutoff.max(10.0), an0.cutoff.max(10.0) * 2.0, 51);
    let traj = integrate_ivp_at(|_| 0.0, 1.0, target, 0.0, &window, &IvpOptions::new(1e-12)).map_err(|e| e.to_string())?;
    let mut cs = Vec::new();
    for s in &traj.samples {
        let (u2, _) = an0.recessive(s.x).map_err(|e| e.to_string())?;
        cs.push(s.u / u2);
    }
    let c0 = cs.iter().sum::<f64>() / cs.len() as f64;
    let e0 = rel(c0, target);

    // lambda = 2: recessive branch, normalised by r v -> 1/(4 pi) at r -> 0.
    let an = analyze_fixture(Fixture::Resolvent { n: 3, lambda: 2.0 }, Endpoint::Infinity, &no_oracle())
        .map_err(|e| e.to_string())?;
    let far = an.cutoff + 8.0;
    let (u2, du2) = an.recessive(far).map_err(|e| e.to_string())?;
    let near = [1e-3, 2e-3];
    let back = integrate_ivp_at(|_| 2.0, far, u2, du2, &near, &IvpOptions::new(1e-12)).map_err(|e| e.to_string())?;
    let w0 = 2.0 * back.samples[0].u - back.samples[1].u;
    let scale = target / w0;
    let window = lin_space(an.cutoff + 2.0, an.cutoff + 6.0, 41);
    let mut q = Vec::new();
    for &r in &window {
        let (u, _) = an.recessive(r).map_err(|e| e.to_string())?;
        q.push((2f64.sqrt() * r).exp() * scale * u);
    }
    let (qmin, qmax) = q.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mean = q.iter().sum::<f64>() / q.len() as f64;
    let drift = (qmax - qmin) / mean.abs();
    Ok(outcome(
        e0 <= 1e-6 && drift < 1e-4,
        format!("lambda=0: c = {c0:.10} (rel err {e0:.1e}); lambda=2: r e^(sqrt2 r) v = {mean:.10}, drift {drift:.1e}"),
    ))
}

fn custom(f: &str, g: &str) -> CoefficientSplit {
    CoefficientSplit::new(parse(f).unwrap(), parse(g).unwrap(), Interval::half_line()).unwrap()
}

/// Gronwall envelope and L1 bound on every grid point of many runs.
fn criterion_5() -> Result<Outcome, String> {
    let opts = AnalysisOptions { tail_tol: 1e-6, ..no_oracle() };
    let mut runs: Vec<(String, CoefficientSplit, Endpoint)> = Vec::new();
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
        runs.push((fx.name(), fx.split_at_infinity().unwrap(), Endpoint::Infinity));
    }
    for nu in [0.0, 1.0] {
        let fx = Fixture::ModifiedBessel { nu };
        runs.push((format!("{} at zero", fx.name()), fx.split_at_zero().unwrap(), Endpoint::Zero));
    }
    runs.push(("x^2 + 1 | exp(-x)".into(), custom("x^2 + 1", "exp(-x)"), Endpoint::Infinity));
    runs.push(("0-x^2 | 1/x^3".into(), custom("0-x^2", "1/x^3"), Endpoint::Infinity));
    runs.push(("0 | x^-4".into(), custom("0", "x^(-4)"), Endpoint::Infinity));

    let mut failures = Vec::new();
    let mut points = 0;
    for (name, split, end) in &runs {
        let an = match analyze(split.clone(), *end, &opts) {
            Ok(an) => an,
            Err(e) => {
                failures.push(format!("{name}: {e}"));
                continue;
            }
        };
        let radius = an.certificate.disk_radius();
        let sols = match &an.solution {
            lgasym_core::analysis::Solution::Oscillatory(o) => vec![&o.plus, &o.minus],
            s => vec![s.main()],
        };
        for sol in sols {
            points += sol.z.len();
            let bound = sol.g_l1.exp_m1();
            let envelope = sol.z.iter().zip(&sol.cumulative_l1).all(|(z, c)| z.norm() <= c.exp());
            let ok = envelope
                && sol.running_l1_zg <= bound + 1e-8
                && (sol.z_infinity - 1.0).norm() <= radius
                && radius < 1.0;
            if !ok {
                failures.push(name.clone());
            }
        }
        if !an.verification.passed() || an.verification.envelope_violations > 0 {
            failures.push(format!("{name}: verification"));
        }
    }
    Ok(outcome(
        failures.is_empty() && runs.len() >= 12,
        format!("{} runs, {points} grid points, violations: {failures:?}", runs.len()),
    ))
}

/// Step halving on g = e^{-s}.
fn criterion_6() -> Result<Outcome, String> {
    let g = FnForcing::new(|s: f64| (-s).exp());
    let a = lgasym_core::certificate::find_cutoff(&g, 0.0, lgasym_core::certificate::default_target(), Weight::Abs)
        .map_err(|e| e.to_string())?;
    let z = |h: f64| -> Result<f64, String> {
        Ok(solve_exponential(&g, &SolveOptions::new(a).x_max(a + 40.0).step(h)).map_err(|e| e.to_string())?.z_infinity.re)
    };
    let (z1, z2, z3) = (z(0.04)?, z(0.02)?, z(0.01)?);
    let ratio = (z1 - z2) / (z2 - z3);
    Ok(outcome((3.5..=4.5).contains(&ratio), format!("error ratio {ratio:.4}")))
}

/// Wronskian of (u_1, u_2) with u_2 from reduction of order.
fn criterion_7() -> Result<Outcome, String> {
    wronskian(0.01)
}

fn wronskian(step: f64) -> Result<Outcome, String> {
    let opts = AnalysisOptions { step, ..no_oracle() };
    let fx = Fixture::ModifiedBessel { nu: 1.0 };
    let an = analyze_fixture(fx, Endpoint::Infinity, &opts).map_err(|e| e.to_string())?;
    let u1 = an.dominant_branch().map_err(|e| e.to_string())?;
    let a = an.cutoff;
    let far = a + 20.0;
    let pts = lin_space(a + 0.01, far, 41);
    let u2 = |x: f64| an.recessive(x).map(|p| p.0).map_err(|e| e.to_string());
    let mut ws = Vec::new();
    for &x in &pts {
        // u_2' by a central difference so the check does not reuse the identity.
        let d = 1e-3;
        let du2 = (8.0 * (u2(x + d)? - u2(x - d)?) - (u2(x + 2.0 * d)? - u2(x - 2.0 * d)?)) / (12.0 * d);
        let w = u1.value(x).map_err(|e| e.to_string())? * du2 - u1.derivative(x).map_err(|e| e.to_string())? * u2(x)?;
        ws.push(w);
    }
    let norm = ws.iter().map(|w| rel(*w, -2.0)).fold(0.0, f64::max);
    let drift = ws.iter().map(|w| rel(*w, ws[0])).fold(0.0, f64::max);
    // Cross-check: u_2 propagated backwards by the oracle against the pipeline u_1.
    let (v, dv) = an.recessive(far).map_err(|e| e.to_string())?;
    let traj = integrate_ivp_at(|r| fx.eval_potential(r), far, v, dv, &pts[..40], &IvpOptions::new(1e-13))
        .map_err(|e| e.to_string())?;
    let mut cross: f64 = 0.0;
    for s in &traj.samples {
        let w = u1.value(s.x).map_err(|e| e.to_string())? * s.du - u1.derivative(s.x).map_err(|e| e.to_string())? * s.u;
        cross = cross.max(rel(w, -2.0));
    }
    Ok(outcome(
        drift <= 1e-8 && norm <= 1e-8,
        format!("max |W + 2|/2 = {norm:.1e}, drift {drift:.1e} over {} points; against oracle u_2 {cross:.1e}", pts.len()),
    ))
}

/// f = 0, g = 2/x^2 is rejected; the oracle shows quadratic growth.
fn criterion_8() -> Result<Outcome, String> {
    let rejected = match analyze(custom("0", "2/x^2"), Endpoint::Infinity, &no_oracle()) {
        Err(e) => e.is_hypothesis_failure(),
        Ok(_) => false,
    };
    // u = (2/3) x^2 + (1/3) x^{-1} from u(1) = u'(1) = 1.
    let traj = integrate_ivp_at(|x| 2.0 / (x * x), 1.0, 1.0, 1.0, &[1e2, 1e3], &IvpOptions::new(1e-12))
        .map_err(|e| e.to_string())?;
    let (p, q) = (traj.samples[0], traj.samples[1]);
    let (c2, c3) = (p.u / (p.x * p.x), q.u / (q.x * q.x));
    let growth = q.du / p.du;
    Ok(outcome(
        rejected && rel(c3, 2.0 / 3.0) < 1e-8 && rel(c2, c3) < 1e-4 && growth > 9.0,
        format!("rejected: {rejected}; u/x^2 = {c2:.8} at 1e2, {c3:.8} at 1e3; u'(1e3)/u'(1e2) = {growth:.4}"),
    ))
}

/// psi of the inverted problem is s^-2 psi(1/s).
fn criterion_9() -> Result<Outcome, String> {
    let split = Fixture::ModifiedBessel { nu: 1.0 }.split_at_infinity().unwrap();
    let psi = compute_psi(&split).map_err(|e| e.to_string())?;
    let inv = compute_psi(&invert(&split).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for s in log_space(1e-2, 1e2, 20) {
        let lhs = inv.eval(s).map_err(|e| e.to_string())?;
        let rhs = psi.eval(1.0 / s).map_err(|e| e.to_string())? / (s * s);
        worst = worst.max(rel(lhs, rhs));
    }
    Ok(outcome(worst <= 1e-8, format!("max rel diff {worst:.1e} over 20 points")))
}

/// Zero-order modified Bessel near zero through the log chart.
fn criterion_10() -> Result<Outcome, String> {
    let an = analyze_fixture(Fixture::ModifiedBessel { nu: 0.0 }, Endpoint::Zero, &no_oracle()).map_err(|e| e.to_string())?;
    if an.chart.name() != "logarithmic" {
        return Ok(outcome(false, format!("chart {}", an.chart.name())));
    }
    // w(t) = K_0(e^{-t}), dw/dt = -r K_0'(r).
    let t0 = an.cutoff.max(1.0);
    let r0 = (-t0).exp();
    let (k, dk) = bessel_k0(r0);
    let (w1, dw1) = an.main_branch(t0).map_err(|e| e.to_string())?;
    let (w2, dw2) = an.recessive(t0).map_err(|e| e.to_string())?;
    let (w1, dw1) = (w1.re, dw1.re);
    let det = w1 * dw2 - w2 * dw1;
    let c1 = (k * dw2 - w2 * (-r0 * dk)) / det;
    let c2 = (w1 * (-r0 * dk) - k * dw1) / det;
    let predict = |r: f64| -> Result<f64, String> {
        let t = -r.ln();
        let (w1, _) = an.main_branch(t).map_err(|e| e.to_string())?;
        let (w2, _) = an.recessive(t).map_err(|e| e.to_string())?;
        Ok(c1 * w1.re + c2 * w2)
    };
    let (p4, p6) = (predict(1e-4)?, predict(1e-6)?);
    let (e4, e6) = (rel(p4, bessel_k0(1e-4).0), rel(p6, bessel_k0(1e-6).0));
    let (q4, q6) = (p4 / 1e-4f64.ln().abs(), p6 / 1e-6f64.ln().abs());
    let drift = rel(q4, q6);
    Ok(outcome(
        drift < 2e-2 && q6 > 0.5,
        format!("K0/|ln r| = {q4:.6} at 1e-4, {q6:.6} at 1e-6 (drift {drift:.1e}); K0 rel err {e4:.1e}, {e6:.1e}"),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("half-order modified Bessel constants", criterion_1),
        ("order-one modified Bessel at zero via inversion", criterion_2),
        ("zero-order Bessel amplitude and phases", criterion_3),
        ("fundamental solution n = 3", criterion_4),
        ("Gronwall envelope suite", criterion_5),
        ("Volterra convergence order", criterion_6),
        ("Wronskian of second solutions", criterion_7),
        ("hypothesis rejection for g = 2/x^2", criterion_8),
        ("psi under inversion", criterion_9),
        ("zero-order log regime", criterion_10),
    ];
    let results: Vec<Result<Outcome, String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria.iter().map(|(_, run)| scope.spawn(*run)).collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err("panicked".into()))).collect()
    });
    let mut all = true;
    for (k, ((name, _), result)) in criteria.iter().zip(results).enumerate() {
        let (pass, detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= pass;
        println!("criterion {:>2} {} {name}: {detail}", k + 1, if pass { "PASS" } else { "FAIL" });
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
