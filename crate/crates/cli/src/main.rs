//! `freqctl` command-line front end.
//!
//! Exit codes: 0 on success, 2 when a simulation ends without converging to
//! the optimal cost, 1 on any error (unreadable or invalid scenario, I/O).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use freqctl::repro::{self, Experiment};
use freqctl::{
    optimal_dispatch, run_scenario, scenario_file, stability, toy_grid, MessageInterval, Scenario,
    Scheme,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const DEFAULT_SEED: u64 = 20_240_611;

#[derive(Parser)]
#[command(
    name = "freqctl",
    version,
    about = "Distributed frequency control simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario, writing the trajectory CSV and a summary JSON.
    Simulate {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Trajectory CSV path.
        #[arg(short, long, default_value = "trajectory.csv")]
        output: PathBuf,
        /// Summary JSON path.
        #[arg(long, default_value = "summary.json")]
        summary: PathBuf,
    },
    /// Optimal dispatch for the scenario's post-disturbance powers.
    Optimal {
        scenario: PathBuf,
        /// JSON output path (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Small-signal stability report for the scenario's final configuration.
    Stability {
        scenario: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Number of sample points for the characteristic identity check.
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run one of the bundled experiments and print a comparison table (CSV).
    Repro {
        /// failure_costs, convergence_vs_T, multi_failure or sequential.
        experiment: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the bundled ten-node example as a scenario file.
    Toy {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Values that shadow those in the scenario file.
#[derive(Args, Clone, Default)]
struct Overrides {
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    horizon: Option<f64>,
    /// Scheme tag, e.g. CONSENSUS or HYBRID_SINGLE.
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<Scheme>,
    /// Message interval in seconds, or "continuous".
    #[arg(long = "T", value_parser = parse_interval, allow_negative_numbers = true)]
    interval: Option<MessageInterval>,
}

impl Overrides {
    fn apply(&self, mut s: Scenario) -> Scenario {
        if let Some(dt) = self.dt {
            s.dt = dt;
        }
        if let Some(h) = self.horizon {
            s.horizon = h;
        }
        if let Some(scheme) = self.scheme {
            s.scheme = scheme;
        }
        if let Some(t) = self.interval {
            s.comm.message_interval = t;
        }
        s
    }
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    Scheme::from_tag(&s.to_ascii_uppercase()).ok_or_else(|| {
        let tags: Vec<_> = Scheme::ALL.iter().map(|s| s.tag()).collect();
        format!("unknown scheme {s:?}; expected one of {}", tags.join(", "))
    })
}

fn parse_interval(s: &str) -> Result<MessageInterval, String> {
    if s.eq_ignore_ascii_case("continuous") {
        return Ok(MessageInterval::Continuous);
    }
    s.parse::<f64>()
        .map(MessageInterval::Every)
        .map_err(|_| format!("expected seconds or \"continuous\", got {s:?}"))
}

fn load(path: &Path, overrides: &Overrides) -> Result<Scenario> {
    let s = scenario_file::from_path(path)?;
    Ok(overrides.apply(s))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn annulus_samples(seed: u64, count: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            Complex64::from_polar(
                rng.random_range(0.5..5.0),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect()
}

fn simulate(
    path: &Path,
    overrides: &Overrides,
    output: &Path,
    summary_path: &Path,
) -> Result<ExitCode> {
    let scenario = load(path, overrides)?;
    let (traj, summary) = run_scenario(&scenario)?;
    let mut w = sink(Some(output))?;
    traj.write_csv(&mut w)?;
    w.flush()?;
    write_json(&summary, Some(summary_path))?;
    for warning in &summary.warnings {
        eprintln!("warning: {warning}");
    }
    if summary.convergence_time.is_converged() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "not converged: cost {:.6} vs optimal {:.6} at t = {}",
            summary.steady_cost_paper, summary.cost_star, scenario.horizon
        );
        Ok(ExitCode::from(2))
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate {
            scenario,
            overrides,
            output,
            summary,
        } => simulate(&scenario, &overrides, &output, &summary),
        Command::Optimal { scenario, output } => {
            let s = scenario_file::from_path(&scenario)?;
            let r = optimal_dispatch(&s.grid, &s.steady_fixed_powers())?;
            write_json(&r, output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Stability {
            scenario,
            overrides,
            samples,
            seed,
            output,
        } => {
            let s = load(&scenario, &overrides)?;
            let report = stability::analyze(&s, &annulus_samples(seed, samples))?;
            write_json(&report, output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Repro { experiment, output } => {
            let experiment: Experiment = experiment.parse()?;
            let rows = repro::run(experiment)?;
            let mut w = sink(output.as_deref())?;
            repro::write_csv(&rows, &mut w)?;
            w.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Toy { overrides, output } => {
            let s = overrides.apply(toy_grid());
            let mut w = sink(output.as_deref())?;
            writeln!(w, "{}", scenario_file::to_json(&s))?;
            w.flush()?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    // usage errors share exit code 1 with other failures; 2 means "not converged"
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
