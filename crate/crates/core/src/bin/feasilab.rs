use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use feasilab::metrics::{excess_local, GapSampler};
use feasilab::perturbations::{parse_coords, ScheduleSpec};
use feasilab::scenarios::{list_scenarios, run_scenario, Overrides};
use feasilab::{verify, Error, Result, SetDescription};

#[derive(Parser)]
#[command(
    name = "feasilab",
    version,
    about = "Alternating projections and their perturbations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List bundled scenarios.
    List,
    /// Run a scenario and persist trace, verdict and regularity report.
    Run {
        #[arg(long)]
        scenario: String,
        /// Schedule override: JSON, `constant`, `adversarial`,
        /// `translation:RULE:x,y[:a|b|both]` or `jitter:RATE[:SEED]`.
        #[arg(long)]
        schedule: Option<ScheduleSpec>,
        #[arg(long)]
        iters: Option<u64>,
        /// Single start point, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        start: Option<String>,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        /// Skip the regularity report.
        #[arg(long)]
        no_regularity: bool,
    },
    /// Run the internal verification suites.
    Verify {
        /// Only run suites whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Localized excess and Hausdorff gap between two sets given as JSON files.
    Gap {
        #[arg(long = "setA")]
        set_a: PathBuf,
        #[arg(long = "setB")]
        set_b: PathBuf,
        #[arg(long = "N", default_value_t = 5)]
        n: u32,
        #[arg(long, default_value_t = 512)]
        samples: usize,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
    },
}

#[derive(Serialize)]
struct GapOutput {
    n: u32,
    excess_ab: feasilab::metrics::GapEstimate,
    excess_ba: feasilab::metrics::GapEstimate,
    hausdorff: f64,
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    match writeln!(out, "{}", serde_json::to_string_pretty(v)?) {
        // a closed pipe (`feasilab list | head`) is not an error
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn read_set(path: &Path) -> Result<feasilab::ConvexSet> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let desc: SetDescription = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    desc.build()
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::List => {
            print_json(&list_scenarios()?)?;
            Ok(true)
        }
        Command::Run {
            scenario,
            schedule,
            iters,
            start,
            out,
            no_regularity,
        } => {
            let overrides = Overrides {
                schedule,
                iterations: iters,
                start: start.as_deref().map(parse_coords).transpose()?,
                skip_regularity: no_regularity,
            };
            let report = run_scenario(&scenario, &overrides, &out)?;
            print_json(&report)?;
            Ok(report.passed != Some(false))
        }
        Command::Verify { filter } => {
            let summary = verify::run_suites(filter.as_deref())?;
            print_json(&summary)?;
            Ok(summary.passed)
        }
        Command::Gap {
            set_a,
            set_b,
            n,
            samples,
            seed,
        } => {
            let a = read_set(&set_a)?;
            let b = read_set(&set_b)?;
            let sampler = GapSampler::boundary(samples, seed);
            let excess_ab = excess_local(&a, &b, n, &sampler)?;
            let excess_ba = excess_local(&b, &a, n, &sampler)?;
            let hausdorff = excess_ab.value.max(excess_ba.value);
            print_json(&GapOutput {
                n,
                excess_ab,
                excess_ba,
                hausdorff,
            })?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() {
                3
            } else if e.is_config() || matches!(e, Error::Io(_)) {
                2
            } else {
                1
            })
        }
    }
}
