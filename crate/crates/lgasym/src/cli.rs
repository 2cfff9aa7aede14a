//! Command-line surface: `analyze`, `validate` and `table`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lgasym_core::certificate::default_target;
use lgasym_core::expr::parse;
use lgasym_core::volterra::{DEFAULT_STEP, DEFAULT_TAIL_TOL};
use lgasym_core::{analyze, Analysis, AnalysisOptions, CoefficientSplit, Endpoint, Interval};

use crate::report::{InputEcho, Report, Status};
use crate::table::{default_range, sample_points, tabulate, write_csv, Spacing};
use crate::validate::{run_suites, summary_json, SUITES};

#[derive(Debug, Parser)]
#[command(name = "lgasym", version, about = "Certified Liouville-Green asymptotics for u'' = (f + g) u")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify, certify and solve one problem; writes a JSON report.
    Analyze(AnalyzeArgs),
    /// Run validation suites against closed forms and the oracle integrator.
    Validate(ValidateArgs),
    /// Tabulate the pipeline solution against the approximant as CSV.
    Table(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EndpointArg {
    Infinity,
    Zero,
}

impl From<EndpointArg> for Endpoint {
    fn from(e: EndpointArg) -> Self {
        match e {
            EndpointArg::Infinity => Endpoint::Infinity,
            EndpointArg::Zero => Endpoint::Zero,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpacingArg {
    Linear,
    Log,
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Leading coefficient f(x).
    #[arg(long = "f", allow_hyphen_values = true)]
    pub f: String,
    /// Perturbation g(x).
    #[arg(long = "g", allow_hyphen_values = true)]
    pub g: String,
    #[arg(long, value_enum, default_value = "infinity")]
    pub endpoint: EndpointArg,
    /// Interval LO:HI; HI may be `inf`.
    #[arg(long, default_value = "0:inf")]
    pub interval: String,
    /// Phase quadrature and oracle integrator tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Tail completion tolerance of the Volterra solver.
    #[arg(long = "tail-tol", default_value_t = DEFAULT_TAIL_TOL)]
    pub tail_tol: f64,
    /// Volterra solver step.
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub step: f64,
    /// End of the solver grid; automatic when absent.
    #[arg(long)]
    pub xmax: Option<f64>,
    /// Cutoff target for the tail mass of the perturbation (must be below ln 2).
    #[arg(long, default_value_t = default_target())]
    pub target: f64,
    /// Skip the oracle comparison.
    #[arg(long = "no-oracle")]
    pub no_oracle: bool,
    /// Reserved; the pipeline is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Also write the default table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Include wall-clock timings (the report is then not reproducible).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Suite name or `all`.
    #[arg(default_value = "all")]
    pub suite: String,
    /// Write a JSON summary here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// First point in the input variable; defaults to the cutoff side.
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, value_enum, default_value = "log")]
    pub spacing: SpacingArg,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn parse_interval(s: &str) -> Result<Interval, String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("interval {s:?} must be LO:HI"))?;
    let num = |t: &str| -> Result<f64, String> {
        match t.trim() {
            "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
            v => v.parse::<f64>().map_err(|_| format!("bad interval bound {v:?}")),
        }
    };
    Interval::new(num(lo)?, num(hi)?).map_err(|e| e.to_string())
}

impl ProblemArgs {
    fn options(&self) -> AnalysisOptions {
        AnalysisOptions {
            tol: self.tol,
            tail_tol: self.tail_tol,
            step: self.step,
            x_max: self.xmax,
            target: self.target,
            oracle: false,
            fit_window: None,
        }
    }

    fn echo(&self) -> InputEcho {
        let mut opts = self.options();
        opts.oracle = !self.no_oracle;
        InputEcho::new(&self.f, &self.g, &self.interval, self.endpoint.into(), &opts, self.seed)
    }

    fn split(&self) -> Result<CoefficientSplit, (&'static str, String)> {
        let f = parse(&self.f).map_err(|e| ("parse", format!("f: {e}")))?;
        let g = parse(&self.g).map_err(|e| ("parse", format!("g: {e}")))?;
        let interval = parse_interval(&self.interval).map_err(|e| ("invalid_input", e))?;
        CoefficientSplit::new(f, g, interval).map_err(|e| ("invalid_input", e.to_string()))
    }
}

struct Run {
    analysis: Option<Analysis>,
    report: Report,
    /// Pipeline and oracle wall-clock times.
    times: (Duration, Duration),
}

impl Run {
    fn failed(report: Report) -> Self {
        Self { analysis: None, report, times: (Duration::ZERO, Duration::ZERO) }
    }
}

/// The full pipeline; failures become report entries.
fn run_problem(p: &ProblemArgs) -> Run {
    let echo = p.echo();
    let split = match p.split() {
        Ok(s) => s,
        Err((kind, msg)) => return Run::failed(Report::failure(echo, kind, msg, false)),
    };
    let start = Instant::now();
    let mut an = match analyze(split, p.endpoint.into(), &p.options()) {
        Ok(an) => an,
        Err(e) => return Run::failed(Report::from_error(echo, &e)),
    };
    let analysis_time = start.elapsed();
    let start = Instant::now();
    if !p.no_oracle {
        match an.oracle_comparison() {
            Ok(o) => an.oracle = Some(o),
            Err(e) => return Run::failed(Report::from_error(echo, &e)),
        }
        an.options.oracle = true;
    }
    let oracle_time = start.elapsed();
    let report = Report::from_analysis(echo, &an);
    Run { analysis: Some(an), report, times: (analysis_time, oracle_time) }
}

fn open_out(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_text(path: Option<&Path>, text: &str) -> io::Result<()> {
    let mut out = open_out(path)?;
    out.write_all(text.as_bytes())?;
    out.flush()
}

fn internal(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("lgasym: {msg}");
    ExitCode::from(1)
}

fn cmd_analyze(args: &AnalyzeArgs) -> ExitCode {
    let run = run_problem(&args.problem);
    let mut report = run.report;
    if args.timings && run.analysis.is_some() {
        report = report.with_timings(run.times.0, run.times.1);
    }
    if let Some(err) = &report.error {
        eprintln!("lgasym: {}: {}", err.kind, err.message);
    }
    if let Err(e) = write_text(args.json.as_deref(), &report.to_json()) {
        return internal(e);
    }
    if let (Some(path), Some(an)) = (&args.csv, &run.analysis) {
        let (from, to) = default_range(an);
        let result = sample_points(from, to, 50, Spacing::Log)
            .and_then(|xs| tabulate(an, &xs).map_err(|e| e.to_string()))
            .and_then(|rows| {
                let file = File::create(path).map_err(|e| e.to_string())?;
                write_csv(BufWriter::new(file), &rows).map_err(|e| e.to_string())
            });
        if let Err(e) = result {
            return internal(e);
        }
    }
    ExitCode::from(report.status.exit_code())
}

fn cmd_table(args: &TableArgs) -> ExitCode {
    let mut problem = args.problem.clone();
    problem.no_oracle = true;
    let run = run_problem(&problem);
    let Some(an) = run.analysis else {
        let err = run.report.error.as_ref().map(|e| format!("{}: {}", e.kind, e.message)).unwrap_or_default();
        eprintln!("lgasym: {err}");
        return ExitCode::from(run.report.status.exit_code());
    };
    let (d_from, d_to) = default_range(&an);
    let spacing = match args.spacing {
        SpacingArg::Linear => Spacing::Linear,
        SpacingArg::Log => Spacing::Log,
    };
    let rows = sample_points(args.from.unwrap_or(d_from), args.to.unwrap_or(d_to), args.count, spacing)
        .and_then(|xs| tabulate(&an, &xs).map_err(|e| e.to_string()));
    let rows = match rows {
        Ok(r) => r,
        Err(e) => return internal(e),
    };
    match open_out(args.csv.as_deref()).map_err(|e| e.to_string()).and_then(|out| write_csv(out, &rows).map_err(|e| e.to_string())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => internal(e),
    }
}

fn cmd_validate(args: &ValidateArgs) -> ExitCode {
    let names: Vec<&str> = if args.suite == "all" { SUITES.to_vec() } else { vec![args.suite.as_str()] };
    let checks = match run_suites(&names) {
        Ok(c) => c,
        Err(e) => return internal(e),
    };
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    println!("{} checks, {} failed", checks.len(), failed);
    if let Some(path) = &args.json {
        if let Err(e) = write_text(Some(path), &summary_json(&checks)) {
            return internal(e);
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(Status::Error.exit_code())
    }
}

pub fn run(cli: &Cli) -> ExitCode {
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Validate(v) => cmd_validate(v),
        Command::Table(t) => cmd_table(t),
    }
}

/// Entry point: logging from `LG_LOG`, usage errors exit with 1.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LG_LOG", "error")).target(env_logger::Target::Stderr).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    run(&cli)
}
