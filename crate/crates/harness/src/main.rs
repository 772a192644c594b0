use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dexp_harness::emit::{read_trace, write_csv, write_json};
use dexp_harness::sweep::{sweep, GridAxis};
use dexp_harness::{audit, audit_all, emit, run, Algorithm, Format, ScenarioSpec};

#[derive(Parser)]
#[command(
    name = "dexp",
    version,
    about = "Run and audit discounted expert-advice and regression learners"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play a scenario and write its audited trace.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the scenario's `algo`.
        #[arg(long, value_enum)]
        algo: Option<Algorithm>,
        /// Trace file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Summarize the checks stored in a JSON trace.
    Audit {
        #[arg(long)]
        trace: PathBuf,
        /// Comma-separated check names; all checks in the trace when absent.
        #[arg(long, value_delimiter = ',')]
        theorems: Option<Vec<String>>,
    },
    /// Run a scenario over a parameter grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// `KEY=V1,V2,...`; repeat for a product grid.
        #[arg(long, required = true)]
        grid: Vec<GridAxis>,
        #[arg(long, value_enum)]
        algo: Option<Algorithm>,
        /// Directory receiving one trace per grid point.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every audited check passed.
fn execute(cli: Cli) -> dexp_harness::Result<bool> {
    match cli.command {
        Command::Run {
            config,
            algo,
            out,
            format,
            seed,
        } => {
            let mut spec = ScenarioSpec::load(&config)?;
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            let algo = algo.or(spec.algo).ok_or_else(|| {
                dexp_harness::Error::Config(
                    "no algorithm given (use --algo or `algo` in the scenario)".into(),
                )
            })?;
            let trace = run(&spec, algo)?;
            let summary = audit_all(&trace);
            match out {
                Some(path) => emit(&trace, &summary, format, &path)?,
                None => {
                    let stdout = io::stdout().lock();
                    match format {
                        Format::Csv => write_csv(&trace, stdout)?,
                        Format::Json => write_json(&trace, Some(&summary), stdout)?,
                    }
                }
            }
            eprint!("{summary}");
            Ok(summary.passed())
        }
        Command::Audit { trace, theorems } => {
            let trace = read_trace(&trace)?;
            let summary = match &theorems {
                Some(names) => {
                    let names: Vec<&str> = names
                        .iter()
                        .map(|s| s.trim())
                        .filter(|s| !s.is_empty())
                        .collect();
                    audit(&trace, &names)
                }
                None => audit_all(&trace),
            };
            print!("{summary}");
            for s in summary.theorems.iter().filter(|s| s.checks == 0) {
                eprintln!("warning: the trace has no `{}` checks", s.theorem);
            }
            Ok(summary.passed())
        }
        Command::Sweep {
            config,
            grid,
            algo,
            out_dir,
            format,
        } => {
            if let Some(dir) = &out_dir {
                std::fs::create_dir_all(dir)?;
            }
            let mut all_passed = true;
            let mut stdout = io::stdout().lock();
            for (i, point) in sweep(&config, &grid, algo)?.into_iter().enumerate() {
                let label: Vec<String> = point
                    .assignment
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect();
                match point.outcome {
                    Ok((trace, summary)) => {
                        let worst = summary
                            .theorems
                            .iter()
                            .min_by(|a, b| a.min_slack.total_cmp(&b.min_slack))
                            .map_or("-".to_string(), |s| {
                                format!("{} {:.6e}", s.theorem, s.min_slack)
                            });
                        let status = if summary.passed() { "ok" } else { "VIOLATED" };
                        writeln!(stdout, "{}\t{status}\tmin slack: {worst}", label.join(" "))?;
                        all_passed &= summary.passed();
                        if let Some(dir) = &out_dir {
                            let ext = match format {
                                Format::Csv => "csv",
                                Format::Json => "json",
                            };
                            emit(
                                &trace,
                                &summary,
                                format,
                                &dir.join(format!("point-{i:04}.{ext}")),
                            )?;
                        }
                    }
                    Err(e) => {
                        writeln!(stdout, "{}\terror\t{e}", label.join(" "))?;
                        all_passed = false;
                    }
                }
            }
            Ok(all_passed)
        }
    }
}
