//! Command-line front end for `scaling-lab`: config-driven sweeps, theory tables and
//! the validation suite.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 a scientific check failed
//! (a flagged sweep row or a failing invariant).

pub mod config;
pub mod gnuplot;
pub mod report;
pub mod theory_cmd;

use clap::{Parser, Subcommand};
use config::ExperimentConfig;
use scaling_lab::validation::{run_validation, Fault, ValidationOptions};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_CHECK: i32 = 2;

pub const CSV_NAME: &str = "sweep.csv";
pub const GNUPLOT_NAME: &str = "sweep.gp";

#[derive(Debug, Parser)]
#[command(name = "scaling-lab", version, about = "Optimal-scaling experiments for local Metropolis-Hastings samplers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scaling sweep described by a TOML config and write sweep.csv.
    Sweep {
        config: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long, env = "SCALING_LAB_THREADS")]
        threads: Option<usize>,
        /// Also write sweep.gp, a gnuplot script for the acceptance and SJD figures.
        #[arg(long)]
        gnuplot: bool,
        /// Write outputs here instead of the config's output_path.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Suppress the summary table.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Print limiting constants, optimal step constants and acceptance curves.
    Theory(theory_cmd::TheoryArgs),
    /// Run the fast invariant suite.
    Validate {
        #[arg(long, default_value_t = ValidationOptions::default().seed)]
        seed: u64,
        /// Deliberately break a kernel to check that the suite notices.
        #[arg(long, hide = true)]
        inject_fault: Option<Fault>,
    },
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Sweep { config, threads, gnuplot, output_dir, quiet } => {
            cmd_sweep(&config, threads, gnuplot, output_dir.as_deref(), quiet)
        }
        Command::Theory(args) => match theory_cmd::render(&args) {
            Ok(table) => {
                print!("{table}");
                EXIT_OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_CONFIG
            }
        },
        Command::Validate { seed, inject_fault } => cmd_validate(seed, inject_fault),
    }
}

fn cmd_sweep(path: &Path, threads: Option<usize>, gnuplot: bool, output_dir: Option<&Path>, quiet: bool) -> i32 {
    let config = match ExperimentConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    match threads {
        Some(0) => {
            eprintln!("error: --threads must be at least 1");
            return EXIT_CONFIG;
        }
        Some(t) => builder = builder.num_threads(t),
        None => {}
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_CONFIG;
        }
    };
    let result = match pool.install(|| scaling_lab::scaling_sweep(&config.sweep())) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return EXIT_CONFIG;
        }
    };

    let dir = output_dir.map_or_else(|| PathBuf::from(&config.output_path), Path::to_path_buf);
    if let Err(e) = write_outputs(&dir, &result.rows, gnuplot) {
        eprintln!("error: writing {}: {e}", dir.display());
        return EXIT_CONFIG;
    }
    if !quiet {
        print!("{}", report::summary_table(&result.rows));
    }
    println!("wrote {}", dir.join(CSV_NAME).display());
    let flagged: Vec<_> = result.rows.iter().filter(|r| !r.flags.is_empty()).collect();
    if flagged.is_empty() {
        EXIT_OK
    } else {
        eprintln!("{} of {} rows flagged against theory", flagged.len(), result.rows.len());
        EXIT_CHECK
    }
}

fn write_outputs(dir: &Path, rows: &[scaling_lab::SweepRow], gnuplot: bool) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let file = std::fs::File::create(dir.join(CSV_NAME))?;
    report::write_csv(rows, std::io::BufWriter::new(file)).map_err(std::io::Error::other)?;
    if gnuplot {
        std::fs::write(dir.join(GNUPLOT_NAME), gnuplot::script(rows, CSV_NAME))?;
    }
    Ok(())
}

fn cmd_validate(seed: u64, fault: Option<Fault>) -> i32 {
    let options = ValidationOptions { seed, fault, ..Default::default() };
    let report = run_validation(&options);
    let mut out = std::io::stdout().lock();
    for check in &report.checks {
        let _ = writeln!(out, "{check}");
    }
    let failed: Vec<&str> = report.failed().map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        let _ = writeln!(out, "all {} invariants passed", report.checks.len());
        EXIT_OK
    } else {
        eprintln!("failed invariants: {}", failed.join(", "));
        EXIT_CHECK
    }
}
