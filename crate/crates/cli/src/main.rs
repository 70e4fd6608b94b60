//! `ppt-steer`: verification, parameter scans and see-saw searches for steering of PPT
//! two-qutrit states.

mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use ppt_steering::family::{DataSource, FamilyParams, Grid, PUBLISHED_PARAMS};
use ppt_steering::seesaw::SearchConfig;

use output::{exit, Failure, Outcome, RunReport, SCHEMA_VERSION};

/// Worker threads for scans and searches; defaults to one per core.
const THREADS_VAR: &str = "PPT_STEER_THREADS";

#[derive(Parser)]
#[command(
    version,
    about = "Steering certification of bound-entangled qutrit states"
)]
struct Cli {
    /// Print the run report as JSON instead of a summary.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DataArg {
    /// Published data for ε > 0 at the published parameters, closed forms otherwise.
    Auto,
    Analytic,
    Published,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the closed-form inequality on the closed-form state, with optional noise.
    Verify {
        #[arg(long, default_value_t = PUBLISHED_PARAMS.x)]
        x: f64,
        #[arg(long, default_value_t = PUBLISHED_PARAMS.m1)]
        m1: f64,
        #[arg(long, default_value_t = PUBLISHED_PARAMS.m2)]
        m2: f64,
        /// Identity admixture applied to both functional and state.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, value_enum, default_value = "auto")]
        data: DataArg,
        /// Write the verification report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate C over a grid; each axis is `start:stop:steps` or a single value.
    Scan {
        #[arg(long, default_value = "0.1578")]
        x: Grid,
        #[arg(long, default_value = "0:1:20")]
        m1: Grid,
        #[arg(long, default_value = "0:1:20")]
        m2: Grid,
        /// CSV output with columns x,m1,m2,C,valid.
        #[arg(long)]
        out: PathBuf,
    },
    /// See-saw search from random pure states, one run per seed.
    Search {
        /// Number of independent runs, with seeds seed, seed+1, ...
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        max_rounds: usize,
        #[arg(long, default_value_t = 100)]
        restart_budget: usize,
        #[arg(long, default_value_t = 1e-6)]
        stall_tolerance: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decide LHS membership of an assemblage file and extract an inequality if steerable.
    CheckEnsemble {
        #[arg(long = "in")]
        input: PathBuf,
        /// Functional output; defaults to <input stem>.functional.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the closed-form state for (m1, m2).
    ExportState {
        #[arg(long)]
        m1: f64,
        #[arg(long)]
        m2: f64,
        #[arg(long)]
        out: PathBuf,
        /// Also write its assemblage under the two bases.
        #[arg(long)]
        assemblage: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::input(format!("{THREADS_VAR} = '{v}' is not a positive integer"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::input(format!("cannot configure {n} threads: {e}")))
}

fn dispatch(command: &Command) -> Result<Outcome, Failure> {
    match command {
        Command::Verify {
            x,
            m1,
            m2,
            eps,
            data,
            out,
        } => {
            let data = match data {
                DataArg::Auto => None,
                DataArg::Analytic => Some(DataSource::Analytic),
                DataArg::Published => Some(DataSource::Published),
            };
            let p = FamilyParams {
                x: *x,
                m1: *m1,
                m2: *m2,
            };
            commands::verify(p, *eps, data, out.as_deref())
        }
        Command::Scan { x, m1, m2, out } => commands::scan_grid(*x, *m1, *m2, out),
        Command::Search {
            seeds,
            seed,
            max_rounds,
            restart_budget,
            stall_tolerance,
            out,
        } => {
            let config = SearchConfig {
                seed: *seed,
                max_rounds: *max_rounds,
                restart_budget: *restart_budget,
                stall_tolerance: *stall_tolerance,
                ..SearchConfig::default()
            };
            commands::search(config, *seeds, out)
        }
        Command::CheckEnsemble { input, out } => commands::check_ensemble(input, out.as_deref()),
        Command::ExportState {
            m1,
            m2,
            out,
            assemblage,
        } => commands::export_state(*m1, *m2, out, assemblage.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = configure_threads().and_then(|()| dispatch(&cli.command));
    let outcome = match outcome {
        Ok(o) => o,
        Err(f) => {
            eprintln!("error: {f}");
            return ExitCode::from(f.code);
        }
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    // a closed pipe on stdout must not turn a verdict into a panic
    let mut stdout = std::io::stdout().lock();
    if cli.json {
        let report = RunReport {
            schema_version: SCHEMA_VERSION,
            command: std::env::args().skip(1).collect(),
            config: outcome.config,
            verdict: outcome.verdict.clone(),
            result: outcome.result,
            artifacts: outcome.artifacts,
            warnings: outcome.warnings,
            duration_seconds: start.elapsed().as_secs_f64(),
        };
        let _ = writeln!(
            stdout,
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    } else {
        for line in &outcome.lines {
            let _ = writeln!(stdout, "{line}");
        }
        for path in &outcome.artifacts {
            let _ = writeln!(stdout, "wrote {}", path.display());
        }
        let _ = writeln!(stdout, "verdict: {}", outcome.verdict);
    }
    ExitCode::from(if outcome.positive {
        exit::POSITIVE
    } else {
        exit::NEGATIVE
    })
}
