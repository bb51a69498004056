use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use shmcam_cli::config::{load, Loaded, ScenarioConfig};
use shmcam_cli::pipeline;
use shmcam_cli::plot::{plot, PlotKind};
use shmcam_cli::report::{compare_runs, RunReport};
use shmcam_cli::{CliError, Result};

#[derive(Parser)]
#[command(name = "shmcam", version, about = "Camera-based vibration measurement and damage detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Console,
}

#[derive(clap::Args)]
struct CaseArgs {
    /// Scenario file or suite file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed of every case.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the structural response.
    Simulate(CaseArgs),
    /// Render frames from the simulated response.
    Render(CaseArgs),
    /// Track marker and reference tag through the rendered frames.
    Track(CaseArgs),
    /// Identify the fundamental frequency from the stored trace.
    Analyze(CaseArgs),
    /// Score healthy/damaged pairs from stored reports.
    Assess(CaseArgs),
    /// All stages, then assessment and comparison.
    Run {
        #[command(flatten)]
        args: CaseArgs,
        #[arg(long, value_enum, default_value = "console")]
        format: Format,
    },
    /// Tabulate stored reports against the reference frequencies.
    Compare {
        #[command(flatten)]
        args: CaseArgs,
        #[arg(long, value_enum, default_value = "console")]
        format: Format,
    },
    /// Render a CSV artifact as SVG.
    Plot {
        artifact: PathBuf,
        /// timeseries, spectrum or trajectory
        #[arg(long)]
        kind: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn cases(args: &CaseArgs) -> Result<Vec<ScenarioConfig>> {
    Ok(match load(&args.config, args.seed)? {
        Loaded::Scenario(c) => vec![*c],
        Loaded::Suite(cs) => cs,
    })
}

fn each<T: Send>(cases: &[ScenarioConfig], f: impl Fn(&ScenarioConfig) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    cases.par_iter().map(f).collect()
}

fn print_table(reports: &[RunReport], cases: &[ScenarioConfig], format: Format, out: &Path) -> Result<()> {
    let a = &cases[0].analysis;
    let table = compare_runs(reports, (a.reference_healthy, a.reference_damaged))
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let csv = table.to_csv();
    pipeline::write_text(&out.join("comparison.csv"), &csv).map_err(|e| CliError::Stage {
        stage: "compare",
        case: "*".into(),
        message: e.to_string(),
    })?;
    match format {
        Format::Csv => {
            print!("{csv}");
            for w in &table.warnings {
                eprintln!("warning: {w}");
            }
        }
        Format::Console => print!("{}", table.to_console()),
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => {
            each(&cases(&a)?, |c| pipeline::simulate(c, &a.out))?;
        }
        Command::Render(a) => {
            each(&cases(&a)?, |c| pipeline::render(c, &a.out))?;
        }
        Command::Track(a) => {
            each(&cases(&a)?, |c| pipeline::track(c, &a.out))?;
        }
        Command::Analyze(a) => {
            for r in each(&cases(&a)?, |c| pipeline::analyze(c, &a.out))? {
                println!("{}: {:.4} Hz ({:.1} % from {:.2} Hz)", r.case_id, r.modal.frequency, r.percent_error, r.reference);
            }
        }
        Command::Assess(a) => {
            let cs = cases(&a)?;
            let mut reports = pipeline::load_reports(&cs, &a.out)?;
            pipeline::attach_assessments(&cs, &mut reports, &a.out)?;
            for r in reports.iter().filter(|r| r.condition == shmcam_cli::config::Condition::Healthy) {
                match &r.assessment {
                    Some(x) => println!(
                        "{}: shift {:.3} Hz, threshold {:.3} Hz, damage {}",
                        r.pair,
                        x.shift,
                        x.threshold,
                        if x.damage_detected { "detected" } else { "not detected" }
                    ),
                    None => eprintln!("warning: {} has no damaged counterpart", r.case_id),
                }
            }
        }
        Command::Run { args, format } => {
            let cs = cases(&args)?;
            let reports = pipeline::run_suite(&cs, &args.out)?;
            print_table(&reports, &cs, format, &args.out)?;
        }
        Command::Compare { args, format } => {
            let cs = cases(&args)?;
            let reports = pipeline::load_reports(&cs, &args.out)?;
            print_table(&reports, &cs, format, &args.out)?;
        }
        Command::Plot { artifact, kind, out } => {
            let kind: PlotKind = kind.parse()?;
            let dest = plot(&artifact, kind, out.as_deref())?;
            println!("{}", dest.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
