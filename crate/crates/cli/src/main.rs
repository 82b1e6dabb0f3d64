mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use operadic::io::LoadOptions;

use report::{exit_code_for, ConfigEcho, Report};

#[derive(Parser)]
#[command(name = "operadic", version, about = "Exact computations with operads, their algebras and modules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args, Clone)]
pub struct Flags {
    /// Arity cap for built-in operads.
    #[arg(long, global = true)]
    arity_cap: Option<usize>,
    /// Weight cap for free algebras, overriding the files.
    #[arg(long, global = true)]
    weight_cap: Option<u32>,
    /// Degree window `lo:hi`; carriers leaving it are truncation-limited.
    #[arg(long, global = true, value_parser = parse_window, allow_hyphen_values = true)]
    degrees: Option<(i32, i32)>,
    /// Series order for gauge families.
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Treat axiom failures in loaded files as errors.
    #[arg(long, global = true)]
    strict: bool,
    /// Write the report here and print the summary to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Include wall-clock timing in the report (breaks byte-identical output).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the axiom checkers on operad, algebra, module or MC files.
    Check { paths: Vec<PathBuf> },
    /// Weight and degree dimension tables of an algebra or module.
    Free { path: PathBuf },
    /// Jet module, both Atiyah classes and their agreement.
    Atiyah { path: PathBuf },
    /// Curvature forms, flatness and Bianchi witnesses for an algebra or MC file.
    Curvature { path: PathBuf },
    /// Maurer–Cartan check, deformation, R(g), gauge flow and transport.
    Mc { path: PathBuf },
}

fn parse_window(s: &str) -> Result<(i32, i32), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: i32 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: i32 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    if lo > hi {
        return Err("empty window".into());
    }
    Ok((lo, hi))
}

impl Flags {
    fn options(&self) -> LoadOptions {
        LoadOptions { arity_cap: self.arity_cap, weight_cap: self.weight_cap, strict: self.strict }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.flags.arity_cap == Some(0) || cli.flags.weight_cap == Some(0) {
        eprintln!("error: caps must be positive");
        return ExitCode::from(3);
    }
    let (name, inputs) = match &cli.command {
        Command::Check { paths } => ("check", paths.clone()),
        Command::Free { path } => ("free", vec![path.clone()]),
        Command::Atiyah { path } => ("atiyah", vec![path.clone()]),
        Command::Curvature { path } => ("curvature", vec![path.clone()]),
        Command::Mc { path } => ("mc", vec![path.clone()]),
    };
    let f = &cli.flags;
    let config = ConfigEcho {
        inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
        arity_cap: f.arity_cap,
        weight_cap: f.weight_cap,
        degrees: f.degrees,
        order: f.order,
        strict: f.strict,
    };
    let mut report = Report::new(name, config);
    let start = Instant::now();
    let run = match &cli.command {
        Command::Check { paths } => commands::check(&mut report, f, paths),
        Command::Free { path } => commands::free(&mut report, f, path),
        Command::Atiyah { path } => commands::atiyah(&mut report, f, path),
        Command::Curvature { path } => commands::curvature(&mut report, f, path),
        Command::Mc { path } => commands::mc(&mut report, f, path),
    };
    if let Err(e) = run {
        eprintln!("error: {e}");
        return ExitCode::from(exit_code_for(&e));
    }
    if f.timing {
        report.timing_ms = Some(start.elapsed().as_millis());
    }
    let json = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
    match &f.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, json) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(3);
            }
            print!("{}", report.summary());
        }
        None => {
            print!("{json}");
            eprint!("{}", report.summary());
        }
    }
    ExitCode::from(report.exit_code())
}
