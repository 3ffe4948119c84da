use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vsv_harness::config::{load_config, ExperimentConfig};
use vsv_harness::convergence::{run_convergence_study, DEFAULT_LEVELS, DEFAULT_REFERENCE};
use vsv_harness::paths::dump_paths;
use vsv_harness::report::{emit_report, write_report, ReportRow};
use vsv_harness::table::{reproduce_table, Table, TABLE_HURST, TABLE_PATHS, TABLE_STEPS};
use vsv_harness::{run_pricing, with_threads, HarnessError};

/// Monte Carlo pricing under Volterra sandwiched volatility.
#[derive(Debug, Parser)]
#[command(name = "vsv", version)]
struct Cli {
    /// Experiment file; the built-in reference experiment when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of Monte Carlo paths M.
    #[arg(long, global = true)]
    paths: Option<usize>,
    /// Grid sizes N, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    grid: Vec<usize>,
    /// Estimators, comma separated: naive, rep1, rep2, mmm, cond-gauss.
    #[arg(long, global = true, value_delimiter = ',')]
    estimator: Vec<String>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "VSV_THREADS")]
    threads: Option<usize>,
    /// Write zero runtimes so that repeated runs give identical files.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Evaluate the configured estimators on one grid.
    Price,
    /// Empirical strong convergence rates; --grid gives the coarse levels.
    Convergence {
        /// Steps of the reference grid.
        #[arg(long, default_value_t = DEFAULT_REFERENCE)]
        reference: usize,
    },
    /// Sweep N and H with the double-discretization and conditional-Gaussian estimators.
    Table1,
    /// Sweep N and H with the measure-change estimator.
    Table2,
    /// Dump raw simulated paths.
    Paths,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), HarnessError> {
    let mut config = match &cli.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::reference(),
    };
    if let Some(seed) = cli.seed {
        config.run.seed = seed;
    }
    if let Some(paths) = cli.paths {
        config.run.paths = paths;
    }
    if !cli.estimator.is_empty() {
        config.run.estimators = cli.estimator.clone();
    }
    if cli.no_timing {
        config.run.timing = false;
    }
    let out = cli.out.clone().or_else(|| config.run.output.clone());

    with_threads(cli.threads, || match cli.verb {
        Verb::Price => {
            if let Some(&n) = cli.grid.first() {
                config.run.steps = n;
            }
            config.validate()?;
            if config.run.paths == 0 {
                eprintln!("warning: zero paths requested, the report is empty");
            }
            write_rows(&run_pricing(&config)?, out.as_deref())
        }
        Verb::Table1 | Verb::Table2 => {
            if cli.paths.is_none() {
                config.run.paths = TABLE_PATHS;
            }
            let steps = if cli.grid.is_empty() { TABLE_STEPS.to_vec() } else { cli.grid.clone() };
            let which = if matches!(cli.verb, Verb::Table1) { Table::One } else { Table::Two };
            write_rows(&reproduce_table(which, &config, &steps, &TABLE_HURST)?, out.as_deref())
        }
        Verb::Convergence { reference } => {
            let levels = if cli.grid.is_empty() { DEFAULT_LEVELS.to_vec() } else { cli.grid.clone() };
            let report = run_convergence_study(&config, &levels, reference)?;
            for (name, fit) in [("volatility", report.volatility), ("log-price", report.price)] {
                eprintln!("{name} slope {:.4} (95% band {:.4} to {:.4})", fit.slope, fit.lower, fit.upper);
            }
            write_with(out.as_deref(), |w| report.write_csv(w))
        }
        Verb::Paths => {
            if let Some(&n) = cli.grid.first() {
                config.run.steps = n;
            }
            let count = cli.paths.unwrap_or(10);
            let mut buf = Vec::new();
            dump_paths(&config, count, &mut buf)?;
            write_with(out.as_deref(), |w| w.write_all(&buf))
        }
    })?
}

fn write_rows(rows: &[ReportRow], out: Option<&std::path::Path>) -> Result<(), HarnessError> {
    match out {
        Some(path) => emit_report(rows, path),
        None => write_with(None, |w| write_report(rows, w)),
    }
}

fn write_with(out: Option<&std::path::Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), HarnessError> {
    let (result, path) = match out {
        Some(path) => (std::fs::File::create(path).and_then(|mut file| f(&mut file)), path.to_path_buf()),
        None => (f(&mut io::stdout().lock()), PathBuf::from("<stdout>")),
    };
    result.map_err(|source| HarnessError::Io { path, source })
}
