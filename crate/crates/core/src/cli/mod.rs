//! The `idde` command line: scenario files in, CSV and reports out.
//!
//! Exit codes: 0 success, 1 failed verification property, 2 configuration or
//! usage error, 3 numerical failure.

mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::criteria::{certify, CriteriaError, CSV_HEADER};
use crate::empirics::{sweep, write_sweep_csv, SweepError};
use crate::impulse_algebra::AlgebraError;
use crate::integrator::{fmt17, solve, IntegratorError};
use crate::transform::{remove_impulses, TransformError};
use crate::verify::{run_suite, Suite, VerifyError};

pub use config::{
    OutputSection, PeriodicSection, ProblemSection, RunSection, ScenarioConfig, ScheduleSection,
    SweepSection, TermSection,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("output: {0}")]
    Output(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<IntegratorError> for CliError {
    fn from(e: IntegratorError) -> Self {
        match e {
            IntegratorError::NonFiniteState { .. } | IntegratorError::MissingSlice { .. } => {
                CliError::Numeric(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<AlgebraError> for CliError {
    fn from(e: AlgebraError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<CriteriaError> for CliError {
    fn from(e: CriteriaError) -> Self {
        match e {
            CriteriaError::Inconsistent { .. } => CliError::Numeric(e.to_string()),
            CriteriaError::Transform(e) => e.into(),
            CriteriaError::Algebra(e) => e.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Criteria(e) => e.into(),
            SweepError::Integrator(e) => e.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "idde",
    version,
    about = "Impulsive delay differential equations: simulate, transform, certify"
)]
pub struct Cli {
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Seed for random initial functions and verification cases.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the scenario and write the trajectory CSV.
    Simulate,
    /// Run every criterion and report the first decisive verdict.
    Certify,
    /// Write the coefficients of the impulse-free equivalent equation.
    Transform,
    /// Certify and simulate over the values of the `[sweep]` knob.
    Sweep,
    /// Run a property suite: lemma1, transform-equivalence, threshold,
    /// comparison or corollary2.
    Verify { suite: String },
}

/// Parse arguments, run, print errors to stderr and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("idde: {e}");
            e.exit_code()
        }
    }
}

/// Run one command, writing the summary to `out`. Returns 0, or 1 when a
/// verification property fails.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    if let Command::Verify { suite } = &cli.command {
        let suite: Suite = suite.parse().map_err(CliError::Usage)?;
        return run_verify(suite, cli.seed, out);
    }
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Usage("this command needs --config <path>".into()))?;
    let config = ScenarioConfig::load(path)?;
    fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Output(format!("cannot create {}: {e}", cli.out.display())))?;
    match cli.command {
        Command::Simulate => run_simulate(&config, &cli.out, out),
        Command::Certify => run_certify(&config, &cli.out, out),
        Command::Transform => run_transform(&config, &cli.out, out),
        Command::Sweep => run_sweep(&config, &cli.out, cli.seed, out),
        Command::Verify { .. } => unreachable!("handled above"),
    }?;
    Ok(0)
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
    let path = dir.join(name);
    let file = File::create(&path)
        .map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))?;
    Ok((path, BufWriter::new(file)))
}

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Output(format!("cannot write {}: {e}", path.display()))
}

fn say(out: &mut dyn Write, line: &str) -> Result<(), CliError> {
    writeln!(out, "{line}").map_err(|e| CliError::Output(e.to_string()))
}

pub fn run_simulate(
    config: &ScenarioConfig,
    dir: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let problem = config.problem()?;
    let traj = solve(&problem, config.run.horizon, config.run.step)?;
    let (path, mut file) = create(dir, &config.output.trajectory)?;
    traj.write_csv(&mut file)
        .and_then(|_| file.flush())
        .map_err(write_err(&path))?;
    let crossings = traj.sign_changes(config.run.transient_cut);
    let last = crossings.last().map_or("none".to_string(), |&t| fmt17(t));
    say(
        out,
        &format!(
            "final_value={} sign_changes={} last_crossing={last} trajectory={}",
            fmt17(traj.final_value()),
            crossings.len(),
            path.display()
        ),
    )
}

pub fn run_certify(
    config: &ScenarioConfig,
    dir: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let problem = config.problem()?;
    let certification = certify(&problem, config.run.horizon, &config.criteria())?;

    let (path, mut file) = create(dir, &config.output.report)?;
    let mut text = certification.decision.to_key_value();
    for (i, report) in certification.reports.iter().enumerate() {
        text.push_str(&format!("\n[report.{}]\n{}", i + 1, report.to_key_value()));
    }
    file.write_all(text.as_bytes())
        .and_then(|_| file.flush())
        .map_err(write_err(&path))?;

    let (csv_path, mut csv) = create(dir, &config.output.report_csv)?;
    let mut rows = vec![CSV_HEADER.to_string()];
    rows.extend(
        certification
            .reports
            .iter()
            .map(|r| r.csv_row(&config.problem.name)),
    );
    csv.write_all((rows.join("\n") + "\n").as_bytes())
        .and_then(|_| csv.flush())
        .map_err(write_err(&csv_path))?;

    out.write_all(certification.decision.to_key_value().as_bytes())
        .map_err(|e| CliError::Output(e.to_string()))
}

pub fn run_transform(
    config: &ScenarioConfig,
    dir: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let problem = config.problem()?;
    let transformed = remove_impulses(&problem, config.run.horizon)?;
    let (path, mut file) = create(dir, &config.output.coefficients)?;
    transformed
        .write_coefficients_csv(
            &mut file,
            problem.t0(),
            config.run.horizon,
            config.output.samples,
        )
        .and_then(|_| file.flush())
        .map_err(write_err(&path))?;
    say(out, &format!("coefficients={}", path.display()))
}

pub fn run_sweep(
    config: &ScenarioConfig,
    dir: &Path,
    seed: u64,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let problem = config.problem()?;
    let (knob, values, settings) = config.sweep_plan(seed)?;
    let rows = sweep(&problem, knob, &values, &settings)?;
    let (path, mut file) = create(dir, &config.output.sweep)?;
    write_sweep_csv(&mut file, &rows, settings.seeds)
        .and_then(|_| file.flush())
        .map_err(write_err(&path))?;
    for row in &rows {
        let classes: Vec<String> = row.empirical.iter().map(|e| e.class.to_string()).collect();
        say(
            out,
            &format!(
                "{knob}={} {} ({}) empirical=[{}]",
                row.value,
                row.certified,
                row.certified_theorem,
                classes.join(" ")
            ),
        )?;
    }
    say(out, &format!("sweep={}", path.display()))
}

pub fn run_verify(suite: Suite, seed: u64, out: &mut dyn Write) -> Result<i32, CliError> {
    let results = run_suite(suite, seed)?;
    for r in &results {
        say(out, &r.to_string())?;
    }
    let passed = results.iter().filter(|r| r.passed).count();
    say(
        out,
        &format!(
            "suite {suite}: {passed}/{} properties passed",
            results.len()
        ),
    )?;
    Ok(if passed == results.len() { 0 } else { 1 })
}
