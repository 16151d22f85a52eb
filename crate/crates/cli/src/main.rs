use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dq_cli::checks::{run_checks, Sizes};
use dq_cli::pipeline::{run_pipeline, star, Built, Outcome, PipelineRun};
use dq_cli::problem::{load_problem, validate, with_caps, ProblemError, ProblemSpec};
use dq_cli::report::{Report, SeriesEntry};

/// Deformation quantization of polynomial symplectic and Poisson data.
#[derive(Parser, Debug)]
#[command(name = "dq", version)]
struct Cli {
    /// Override the ε cap N_ε.
    #[arg(long, global = true)]
    eps: Option<u32>,
    /// Override the fiber-degree cap N_y.
    #[arg(long, global = true)]
    ny: Option<u32>,
    /// Override the base-degree cap N_x.
    #[arg(long, global = true)]
    nx: Option<u32>,
    /// Write the machine-readable report here.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Corrupt γ at order ε¹ after solving, to exercise failure reporting.
    #[arg(long, global = true)]
    negative_control: bool,
    /// Include per-stage wall-clock timing in the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build everything and run all verification suites.
    Check { problem: PathBuf },
    /// Build everything and report γ, F and the quantized functions.
    Run { problem: PathBuf },
    /// Print f ⋆ g for two named functions.
    Star { problem: PathBuf, f: String, g: String },
    /// Print the flat section ρ(f).
    Quantize { problem: PathBuf, f: String },
    /// Print the Weyl curvature F.
    Curvature { problem: PathBuf },
    /// Print the flattening one-form γ.
    Gamma { problem: PathBuf },
}

/// Bad input: exit status 2.
struct InputError(String);

impl From<ProblemError> for InputError {
    fn from(e: ProblemError) -> Self {
        InputError(e.to_string())
    }
}

fn load(cli: &Cli, path: &Path) -> Result<ProblemSpec, InputError> {
    let spec = load_problem(path)?;
    if cli.eps.is_none() && cli.ny.is_none() && cli.nx.is_none() {
        return Ok(spec);
    }
    Ok(validate(with_caps(spec.source, cli.eps, cli.ny, cli.nx))?)
}

fn function<'a>(spec: &'a ProblemSpec, name: &str) -> Result<&'a dq_core::fps::Series, InputError> {
    spec.function(name)
        .ok_or_else(|| InputError(format!("unknown function name {name:?}")))
}

fn execute(cli: &Cli) -> Result<Report, InputError> {
    let (name, path) = match &cli.command {
        Command::Check { problem } => ("check", problem),
        Command::Run { problem } => ("run", problem),
        Command::Star { problem, .. } => ("star", problem),
        Command::Quantize { problem, .. } => ("quantize", problem),
        Command::Curvature { problem } => ("curvature", problem),
        Command::Gamma { problem } => ("gamma", problem),
    };
    let spec = load(cli, path)?;
    if let Command::Star { f, g, .. } = &cli.command {
        function(&spec, f)?;
        function(&spec, g)?;
    }
    if let Command::Quantize { f, .. } = &cli.command {
        function(&spec, f)?;
    }
    let run = run_pipeline(&spec, cli.negative_control);
    let mut report = Report::new(name, &spec).with_stages(&run.stages);
    if cli.timing {
        report = report.with_timing(&run.timing);
    }
    match &cli.command {
        Command::Check { .. } => {
            let suites = run_checks(&spec, &run, Sizes::default());
            report = report.with_suites(&suites);
        }
        Command::Run { .. } => results_for_run(&spec, &run, &mut report),
        Command::Star { f, g, .. } => {
            if let Some(built) = usable(&run, &mut report) {
                let (a, b) = (function(&spec, f)?, function(&spec, g)?);
                match star(&spec, built, a, b) {
                    Ok(p) => report.push_result(SeriesEntry::new(format!("{f} * {g}"), &p)),
                    Err(e) => {
                        let failed = Outcome::from_error("star", &e);
                        report.stages.push((&failed).into());
                        report.fail();
                    }
                }
            }
        }
        Command::Quantize { f, .. } => {
            if run.ok() {
                match run.sections.iter().find(|(n, _)| n == f) {
                    Some((_, s)) => report.push_result(SeriesEntry::new(format!("rho({f})"), &s.sigma)),
                    None => report.fail(),
                }
            } else {
                report.fail();
            }
        }
        Command::Curvature { .. } => match run.solution().filter(|_| run.ok()) {
            Some(sol) => {
                report.results = SeriesEntry::form("F", sol.connection().curvature());
            }
            None => report.fail(),
        },
        Command::Gamma { .. } => match run.solution().filter(|_| run.ok()) {
            Some(sol) => report.results = SeriesEntry::form("gamma", sol.gamma()),
            None => report.fail(),
        },
    }
    Ok(report)
}

fn usable<'a>(run: &'a PipelineRun, report: &mut Report) -> Option<&'a Built> {
    if run.ok() {
        run.built.as_ref()
    } else {
        report.fail();
        None
    }
}

fn results_for_run(spec: &ProblemSpec, run: &PipelineRun, report: &mut Report) {
    let Some(built) = usable(run, report) else { return };
    if let Built::Fedosov(sol) = built {
        report.results.extend(SeriesEntry::form("F", sol.connection().curvature()));
        report.results.extend(SeriesEntry::form("gamma", sol.gamma()));
        for (n, s) in &run.sections {
            report.push_result(SeriesEntry::new(format!("rho({n})"), &s.sigma));
        }
    }
    for (a, f) in &spec.functions {
        for (b, g) in &spec.functions {
            match star(spec, built, f, g) {
                Ok(p) => report.push_result(SeriesEntry::new(format!("{a} * {b}"), &p)),
                Err(_) => report.fail(),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(report) => {
            print!("{}", report.to_text());
            if let Some(path) = &cli.report {
                if let Err(e) = std::fs::write(path, report.to_json()) {
                    eprintln!("error: cannot write report {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
