//! Command-line front end: generalize demonstrations, recognize observed
//! streams, execute strategies on scenarios, benchmark, and plot.
//!
//! Exit codes for `execute`: 0 when the run reached its final goal, 2 when
//! the budget ran out first, 1 on any error. All experiment parameters live
//! in files; the only environment variable is `CGDA_LOG` (log level).

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use cgda::model::{generalize, load_demonstrations, read_action, write_action};
use cgda::report::{
    read_report, recognize_stream, report_plot_svg, run_bench, write_report, BenchConfig,
};
use cgda::scenario::Scenario;
use cgda::strategies::{execute_scenario, StrategyKind};

#[derive(Parser)]
#[command(name = "cgda", version, about = "Goal-directed action imitation over simulated worlds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generalize demonstration CSVs into an action JSON.
    Generalize {
        /// Directory containing demo CSV files.
        #[arg(long)]
        demos: PathBuf,
        /// Minimum seconds between intermediate goals.
        #[arg(long)]
        tmin: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Discrepancy between an observed sample stream and an action.
    Recognize {
        #[arg(long)]
        action: PathBuf,
        /// Observed stream in demo CSV format.
        #[arg(long)]
        observed: PathBuf,
        /// Observation slicing interval; defaults to the action's t_min.
        #[arg(long)]
        tinterval: Option<f64>,
    },
    /// Run one execution strategy on a scenario.
    Execute {
        #[arg(long)]
        strategy: String,
        #[arg(long)]
        action: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every configured strategy x repeats and write tables and plots.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        repeats: usize,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a report as an SVG goal-achievement plot.
    Plot {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("CGDA_LOG")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> cgda::Result<ExitCode> {
    match command {
        Command::Generalize { demos, tmin, out } => {
            let loaded = load_demonstrations(&demos)?;
            let action = generalize(&loaded, tmin)?;
            write_action(&out, &action)?;
            log::info!(
                "generalized {} demos into {} goals x {} features",
                loaded.len(),
                action.n(),
                action.m()
            );
            println!(
                "{}",
                serde_json::json!({
                    "demos": loaded.len(),
                    "features": action.m(),
                    "goals": action.n(),
                    "out": out,
                })
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Recognize {
            action,
            observed,
            tinterval,
        } => {
            let (discrepancy, columns) = recognize_stream(&action, &observed, tinterval)?;
            println!(
                "{}",
                serde_json::json!({
                    "discrepancy": discrepancy,
                    "observed_columns": columns,
                })
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Execute {
            strategy,
            action,
            scenario,
            seed,
            out,
        } => {
            let kind = StrategyKind::from_str(&strategy)?;
            let action = read_action(&action)?;
            let scenario = Scenario::load(&scenario)?;
            let report = execute_scenario(&action, &scenario, Some(kind), seed)?;
            write_report(&out, &report)?;
            let achieved = report.goal_achieved();
            println!(
                "{}",
                serde_json::json!({
                    "strategy": report.strategy,
                    "seed": report.seed,
                    "evaluations": report.total_evaluations,
                    "discrepancy": report.final_discrepancy,
                    "termination": report.termination_reason,
                    "goal_achieved": achieved,
                    "out": out,
                })
            );
            Ok(if achieved {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Bench {
            config,
            repeats,
            out,
        } => {
            let cfg = BenchConfig::load(&config)?;
            let config_dir = config
                .parent()
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."));
            let table = run_bench(&cfg, &config_dir, repeats, &out)?;
            for row in &table.rows {
                println!(
                    "{}: evals {:.1}±{:.1}  discrepancy {:.3}±{:.3}  rit {:.4}±{:.4} s  {} {:.3}±{:.3}",
                    row.strategy,
                    row.evaluations.mean,
                    row.evaluations.std,
                    row.discrepancy.mean,
                    row.discrepancy.std,
                    row.rit.mean,
                    row.rit.std,
                    row.success_metric,
                    row.success.mean,
                    row.success.std,
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot { report, out } => {
            let report = read_report(&report)?;
            let svg = report_plot_svg(&report)?;
            std::fs::write(&out, svg)?;
            println!("{}", serde_json::json!({ "out": out }));
            Ok(ExitCode::SUCCESS)
        }
    }
}
