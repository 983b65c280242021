use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wellopt_harness::export::{aggregate_csv, beanplot_csv, write_atomic};
use wellopt_harness::{
    export, load_report, parallel_runs, parse_processor_list, run_experiment, ExperimentConfig, ExperimentReport,
    HarnessError, Processors, Result,
};

#[derive(Parser)]
#[command(name = "wellopt", version, about = "Well-rate optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write its result directory.
    Run {
        config: PathBuf,
        /// Override the config's output directory.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Size of the evaluation pool.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print trial statistics of a result directory.
    Stats { dir: PathBuf },
    /// Print simulation-run counts per trial for hypothetical machines.
    Runs {
        dir: PathBuf,
        #[arg(long, default_value = "1,8,32,inf")]
        processors: String,
    },
    /// Rewrite the CSVs of one or more result directories from their logs,
    /// optionally combining aggregate and beanplot tables.
    Export {
        dirs: Vec<PathBuf>,
        /// Combined beanplot CSV over all directories.
        #[arg(long)]
        beanplot: Option<PathBuf>,
        /// Combined aggregate CSV over all directories.
        #[arg(long)]
        aggregate: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, output, workers } => {
            let (mut cfg, base) = ExperimentConfig::load(&config)?;
            if let Some(w) = workers {
                cfg.workers = Some(w);
            }
            cfg.validate()?;
            let dir = output.unwrap_or_else(|| base.join(&cfg.output_dir));
            let report = run_experiment(&cfg, &base)?;
            export(&report, &dir)?;
            print_stats(&report);
            println!("results written to {}", dir.display());
        }
        Command::Stats { dir } => print_stats(&load_report(&dir)?),
        Command::Runs { dir, processors } => {
            let report = load_report(&dir)?;
            let list = parse_processor_list(&processors)?;
            print_runs(&report, &list);
        }
        Command::Export {
            dirs,
            beanplot,
            aggregate,
        } => {
            if dirs.is_empty() {
                return Err(HarnessError::Usage("name at least one result directory".into()));
            }
            let reports = dirs.iter().map(|d| load_report(d)).collect::<Result<Vec<_>>>()?;
            for (dir, report) in dirs.iter().zip(&reports) {
                export(report, dir)?;
            }
            let refs: Vec<&ExperimentReport> = reports.iter().collect();
            if let Some(path) = beanplot {
                write_atomic(&path, beanplot_csv(&refs).as_bytes())?;
            }
            if let Some(path) = aggregate {
                write_atomic(&path, aggregate_csv(&refs).as_bytes())?;
            }
        }
    }
    Ok(())
}

fn print_stats(report: &ExperimentReport) {
    println!(
        "{}: {} variables, budget {}, {} trial(s)",
        report.label,
        report.dimension,
        report.budget,
        report.trials.len()
    );
    for t in &report.trials {
        match &t.status {
            wellopt_harness::TrialStatus::Completed => println!(
                "  trial {} (seed {}): best {} after {} evaluations",
                t.trial,
                t.seed,
                t.best_value,
                t.log.consumed()
            ),
            wellopt_harness::TrialStatus::Failed { reason } => {
                println!("  trial {} (seed {}): FAILED ({reason})", t.trial, t.seed)
            }
        }
    }
    match report.stats() {
        Some(s) => println!(
            "  max {} min {} mean {} median {} std {}",
            s.max,
            s.min,
            s.mean,
            s.median,
            s.std.map(|v| v.to_string()).unwrap_or_else(|| "-".into())
        ),
        None => println!("  no completed trials"),
    }
}

fn print_runs(report: &ExperimentReport, list: &[Processors]) {
    let header: Vec<String> = list.iter().map(|p| format!("P={p}")).collect();
    println!("trial\tevaluations\t{}", header.join("\t"));
    for t in &report.trials {
        let counts: Vec<String> = list.iter().map(|p| parallel_runs(&t.log, *p).to_string()).collect();
        println!("{}\t{}\t{}", t.trial, t.log.consumed(), counts.join("\t"));
    }
}
