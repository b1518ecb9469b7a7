use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use hybrid_pdem::config::{ExperimentConfig, ProblemKind, SCHEMA};
use hybrid_pdem::{compare_runs, run_experiment, CheckKind, Overrides};

#[derive(Parser)]
#[command(name = "hybrid-pdem", version, about = "Hybrid aleatory/epistemic uncertainty propagation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; results do not depend on this.
        #[arg(long, env = "HYBRID_PDEM_WORKERS")]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two stored results; A is treated as the outer bounds.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0.02)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = CheckKind::Agreement)]
        check: CheckKind,
    },
    /// List the built-in problems.
    ListProblems,
    /// Print an annotated configuration listing every key.
    PrintSchema,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config, seed, workers, out } => {
            let c = ExperimentConfig::load(&config)?;
            let o = run_experiment(&c, &Overrides { seed, out, workers })?;
            println!(
                "{} / {}: {} points, {:.2} s, artifacts in {}",
                o.manifest.problem,
                o.manifest.engine,
                o.result.x.len(),
                o.manifest.runtime_secs,
                o.output_dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { a, b, tol, check } => {
            let r = compare_runs(&a, &b, tol, check)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
            Ok(if r.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::ListProblems => {
            for p in ProblemKind::ALL {
                println!("{:<16} {}", p.name(), p.description());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::PrintSchema => {
            print!("{SCHEMA}");
            Ok(ExitCode::SUCCESS)
        }
    }
}
