//! Command-line front end for `hbt-core`: runs built-in or configured
//! interference scenarios, writes curves, coincidence histograms and a JSON
//! report, and compares reports from separate runs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod compare;
pub mod config;
pub mod error;
pub mod presets;
pub mod report;
pub mod run;
pub mod table;

use std::fmt::Write as _;
use std::path::PathBuf;

pub use error::CliError;

use args::{Cli, Command, CompareArgs, Format, RunArgs};
use compare::{compare_files, CompareOptions};
use config::{ConfigBuilder, ScenarioConfig};
use report::RunReport;

/// Executes a parsed command line and returns the process exit code.
pub fn execute(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = build_config(&args)?;
            let (out, files) = run::run_scenario(&cfg)?;
            print!("{}", run_summary(&out.report, &files));
            Ok(0)
        }
        Command::Presets => {
            print!("{}", presets::table());
            Ok(0)
        }
        Command::Compare(args) => compare(&args),
    }
}

/// Preset, then config file, then `--set` overrides, then dedicated flags.
pub fn build_config(args: &RunArgs) -> Result<ScenarioConfig, CliError> {
    let mut b = ConfigBuilder::new();
    if let Some(name) = &args.preset {
        b.preset(name)?;
    }
    if let Some(path) = &args.config {
        b.file(path)?;
    }
    for s in &args.set {
        b.set(s)?;
    }
    if let Some(seed) = args.seed {
        b.insert("seed", &seed.to_string());
    }
    if let Some(n) = args.samples {
        b.insert("mc.samples", &n.to_string());
    }
    if let Some(dir) = &args.out {
        b.insert("output.directory", &dir.display().to_string());
    }
    if let Some(format) = args.format {
        b.insert("output.formats", format.name());
    }
    b.build()
}

fn compare(args: &CompareArgs) -> Result<u8, CliError> {
    let options = CompareOptions {
        curve_tolerance: args.curve_tol,
        period_tolerance: args.period_tol,
        visibility_tolerance: args.visibility_tol,
    };
    let summary = compare_files(&args.report_a, &args.report_b, &options)?;
    match args.format {
        Some(Format::Json) => println!(
            "{}",
            serde_json::to_string_pretty(&summary).expect("summary serializes")
        ),
        _ => print!("{}", summary.to_text()),
    }
    Ok(if summary.pass { 0 } else { error::EXIT_PHYSICS })
}

fn run_summary(report: &RunReport, files: &[PathBuf]) -> String {
    let mut out = String::new();
    writeln!(out, "scenario {} (seed {})", report.scenario, report.seed).unwrap();
    for arm in &report.arms {
        write!(out, "arm {}:", arm.name).unwrap();
        if let Some(p) = arm.analytic.fringe_period {
            write!(out, " period {p:.6}").unwrap();
        }
        write!(out, " visibility {:.6}", arm.analytic.visibility).unwrap();
        if let Some(mc) = &arm.mc {
            write!(
                out,
                " | fit period {:.6} visibility {:.4} acceptance {:.4}",
                mc.fit.period, mc.fit.visibility, mc.acceptance_rate
            )
            .unwrap();
        }
        writeln!(out).unwrap();
        for c in &arm.comparisons {
            writeln!(out, "  {}", comparison_line(c)).unwrap();
        }
    }
    for c in &report.comparisons {
        writeln!(out, "{}", comparison_line(c)).unwrap();
    }
    for f in files {
        writeln!(out, "wrote {}", f.display()).unwrap();
    }
    out
}

fn comparison_line(c: &report::Comparison) -> String {
    format!(
        "{:<34} {:.6} vs {:.6} ({:?}, delta {:.3e}, tol {:.1e}) {}",
        c.name,
        c.value,
        c.reference,
        c.kind,
        c.delta,
        c.tolerance,
        if c.pass { "pass" } else { "FAIL" }
    )
}
