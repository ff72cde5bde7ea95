use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use spectral_orbits_cli::commands::{self, DecideKind, RunOptions, DEFAULT_TOL};
use spectral_orbits_cli::document;
use spectral_orbits_cli::report::{Body, Report};
use spectral_orbits_cli::CliError;

#[derive(Parser)]
#[command(name = "spectral-orbits", version, about = "Orbit decisions and distance bounds for rasterized normal spectra")]
struct Cli {
    /// Numerical tolerance for comparisons.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Built-in profile overriding the document profile (O2, O<n>, Calkin, TypeIII).
    #[arg(long, global = true)]
    profile: Option<String>,
    /// Reject isolated points within one resolution of a region box.
    #[arg(long, global = true)]
    resolution_check: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    report: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Decision {
    Aue,
    Simorbit,
    Nilpotent,
    Ii1,
}

#[derive(Subcommand)]
enum Command {
    /// Decide an orbit relation for the document's spectra.
    Decide {
        #[arg(value_enum)]
        kind: Decision,
        file: PathBuf,
    },
    /// Lower and upper bounds on the distance between unitary orbits.
    Dist { file: PathBuf },
    /// Build a pairing plan between the document's spectra.
    Plan {
        file: PathBuf,
        /// Write the plan as JSON to this file.
        #[arg(long)]
        emit_plan: Option<PathBuf>,
    },
    /// Run matrix checks on a plan or a matrices document.
    Sandbox {
        file: PathBuf,
        /// Also run the dense lower-bound, unitarity, rank and spectrum checks.
        #[arg(long)]
        verify: bool,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn run(cli: &Cli, opts: &RunOptions) -> Result<Report, CliError> {
    if !(opts.tol.is_finite() && opts.tol >= 0.0) {
        return Err(CliError::Input(format!("--tol: must be a non-negative number, got {}", opts.tol)));
    }
    match &cli.command {
        Command::Decide { kind, file } => {
            let doc = document::parse(&read(file)?)?;
            let kind = match kind {
                Decision::Aue => DecideKind::Aue,
                Decision::Simorbit => DecideKind::SimOrbit,
                Decision::Nilpotent => DecideKind::Nilpotent,
                Decision::Ii1 => DecideKind::Ii1,
            };
            commands::decide(kind, &doc, opts)
        }
        Command::Dist { file } => commands::dist(&document::parse(&read(file)?)?, opts),
        Command::Plan { file, emit_plan } => {
            let (mut report, plan) = commands::plan(&document::parse(&read(file)?)?, opts)?;
            if let Some(out) = emit_plan {
                let mut text = serde_json::to_string_pretty(&plan).expect("plans serialize");
                text.push('\n');
                std::fs::write(out, text).map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
                if let Body::Plan { plan_file, .. } = &mut report.result {
                    *plan_file = Some(out.display().to_string());
                }
            }
            Ok(report)
        }
        Command::Sandbox { file, verify } => commands::sandbox(&commands::parse_sandbox(&read(file)?)?, *verify, opts),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Decide { .. } => "decide",
        Command::Dist { .. } => "dist",
        Command::Plan { .. } => "plan",
        Command::Sandbox { .. } => "sandbox",
    }
}

fn emit(report: &Report, format: Format) {
    let text = match format {
        Format::Text => report.to_string(),
        Format::Json => report.to_json(),
    };
    // A closed pipe is not an error for a report writer.
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions { tol: cli.tol, profile: cli.profile.clone(), resolution_check: cli.resolution_check };
    let code = match run(&cli, &opts) {
        Ok(report) => {
            emit(&report, cli.report);
            report.exit_code
        }
        Err(e @ CliError::Hypothesis(_)) => {
            emit(&commands::failure_report(command_name(&cli.command), &e, &opts), cli.report);
            e.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
