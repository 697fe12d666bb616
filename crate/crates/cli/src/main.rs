//! `tangent-hp`: JSON driven front end for the interpolation, Carleson and control analyses.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 schema or flag error, 3 numeric failure,
//! 4 inconclusive verdict. Only the report path, or the report itself with `--stdout`,
//! is printed on standard output.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod report;
mod schema;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use schema::Problem;

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Schema(String),
    Numeric(tangent_hp::Error),
}

impl From<tangent_hp::Error> for CliError {
    fn from(e: tangent_hp::Error) -> Self {
        CliError::Numeric(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Schema(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Schema(m) => write!(f, "schema error: {m}"),
            CliError::Numeric(e) => write!(f, "numeric failure ({}): {e}", e.name()),
        }
    }
}

const EXIT_INCONCLUSIVE: u8 = 4;

#[derive(Parser)]
#[command(name = "tangent-hp", version, about = "Tangential interpolation, Carleson constants and controllability tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Report path; defaults to `tangent-hp-<command>.json` in the working directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the report on standard output instead of its path.
    #[arg(long)]
    stdout: bool,
    /// Also write the per-row table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Carleson constant of a discrete measure.
    Carleson {
        input: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Interpolation constant estimate, with the interpolant when targets are given.
    Interp {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = InterpRoute::Auto)]
        route: InterpRoute,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Admissibility or controllability verdict for a diagonal system.
    Control {
        input: PathBuf,
        #[arg(long, value_enum)]
        property: ControlProperty,
        #[arg(long)]
        tau: Option<f64>,
        /// Comma separated increasing truncations, for example "10,15,20".
        #[arg(long, value_delimiter = ',')]
        truncations: Option<Vec<usize>>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Null controllability table of the boundary controlled heat equation.
    HeatDemo {
        #[arg(long, default_value_t = 4.0)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.02,0.05,0.08,0.1,0.15,0.2,0.3")]
        taus: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        truncation: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Rectangle,
    Kernel,
    Balayage,
    FiniteMass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InterpRoute {
    Auto,
    Angle,
    General,
    S1,
    Weighted,
}

impl InterpRoute {
    pub fn name(self) -> &'static str {
        match self {
            InterpRoute::Auto => "auto",
            InterpRoute::Angle => "angle",
            InterpRoute::General => "general",
            InterpRoute::S1 => "s1",
            InterpRoute::Weighted => "weighted",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ControlProperty {
    Admissible,
    Exact,
    Null,
    Approx,
    Joint,
}

impl ControlProperty {
    fn name(self) -> &'static str {
        match self {
            ControlProperty::Admissible => "admissible",
            ControlProperty::Exact => "exact",
            ControlProperty::Null => "null",
            ControlProperty::Approx => "approx",
            ControlProperty::Joint => "joint",
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("TANGENT_HP_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| CliError::Schema(format!("TANGENT_HP_THREADS={v:?} is not a positive integer")))?;
        if n == 0 {
            return Err(CliError::Schema("TANGENT_HP_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(())
}

fn load(path: &Path) -> Result<Problem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Problem::parse(&text)
}

fn wrong_kind(expected: &str, got: &Problem) -> CliError {
    CliError::Schema(format!("expected a problem of kind {expected:?}, found {:?}", got.kind()))
}

/// Everything needed to write a report, whether the analysis succeeded or not.
struct Job {
    command: &'static str,
    kind: String,
    input: Value,
    config: Value,
    output: OutputArgs,
}

fn prepare(cli: &Cli) -> Result<(Job, Result<commands::Outcome, CliError>), CliError> {
    let echo = |p: &Problem| serde_json::to_value(p).map_err(|e| CliError::Io(e.to_string()));
    Ok(match &cli.command {
        Command::Carleson { input, alpha, method, output } => {
            let p = load(input)?;
            let Problem::Measure(m) = &p else { return Err(wrong_kind("measure", &p)) };
            let config = json!({ "alpha": report::num(*alpha), "method": method.to_possible_value().map(|v| v.get_name().to_string()) });
            let job = Job { command: "carleson", kind: p.kind().into(), input: echo(&p)?, config, output: output.clone() };
            (job, commands::carleson(m, *alpha, *method))
        }
        Command::Interp { input, route, output } => {
            let p = load(input)?;
            let Problem::Interpolation(m) = &p else { return Err(wrong_kind("interpolation", &p)) };
            let config = json!({ "route": route.name() });
            let job = Job { command: "interp", kind: p.kind().into(), input: echo(&p)?, config, output: output.clone() };
            (job, commands::interp(m, *route))
        }
        Command::Control { input, property, tau, truncations, output } => {
            let p = load(input)?;
            let Problem::System(m) = &p else { return Err(wrong_kind("system", &p)) };
            let config = json!({ "property": property.name(), "tau": tau.map(report::num), "truncations": truncations });
            let job = Job { command: "control", kind: p.kind().into(), input: echo(&p)?, config, output: output.clone() };
            (job, commands::control(m, *property, *tau, truncations.clone()))
        }
        Command::HeatDemo { p, taus, truncation, output } => {
            let config = json!({ "p": report::num(*p), "taus": taus.iter().map(|&t| report::num(t)).collect::<Vec<_>>(), "truncation": truncation });
            let job = Job { command: "heat-demo", kind: "heat".into(), input: Value::Null, config, output: output.clone() };
            (job, commands::heat(*p, taus, *truncation))
        }
    })
}

fn emit(job: &Job, report: &Value, csv: Option<&str>) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    let mut text = serde_json::to_string_pretty(report).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    if let (Some(path), Some(csv)) = (&job.output.csv, csv) {
        report::write_atomic(path, csv.as_bytes()).map_err(io)?;
    }
    let path = match (&job.output.out, job.output.stdout) {
        (Some(p), _) => Some(p.clone()),
        (None, true) => None,
        (None, false) => Some(PathBuf::from(format!("tangent-hp-{}.json", job.command))),
    };
    if let Some(p) = &path {
        report::write_atomic(p, text.as_bytes()).map_err(io)?;
    }
    if job.output.stdout {
        print!("{text}");
    } else if let Some(p) = &path {
        println!("{}", p.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    configure_threads()?;
    let (job, outcome) = prepare(cli)?;
    let (results, csv, code) = match outcome {
        Ok(o) => {
            let mut r = o.results;
            r["status"] = json!("ok");
            (r, o.csv, if o.inconclusive { EXIT_INCONCLUSIVE } else { 0 })
        }
        Err(CliError::Numeric(e)) => {
            let r = json!({ "status": "error", "error": { "name": e.name(), "message": e.to_string() } });
            eprintln!("tangent-hp: {}", CliError::Numeric(e.clone()));
            (r, None, 3)
        }
        Err(other) => return Err(other),
    };
    let full = report::envelope(job.command, &job.kind, job.input.clone(), job.config.clone(), results);
    emit(&job, &full, csv.as_deref())?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("tangent-hp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
