//! Command-line front end: seeded experiment runs, report comparison, and a
//! worked example of the group-decision pipeline.

use clap::{Args, Parser, Subcommand};
use spadepso::harness::{
    compare, load_report, run_experiment, write_report, ExperimentConfig, Report,
};
use spadepso::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "spadepso",
    version,
    about = "Particle-swarm experiments with a surprisingly-popular decision rule"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded experiment and write report.json, summary.csv and traces.
    Run(RunArgs),
    /// Compare two reports problem-by-problem with a signed-rank verdict.
    Compare(CompareArgs),
    /// Print the worked decision-pipeline example with exact arithmetic.
    SpaDemo,
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` config file; flags below override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Optimizer: spade, pso, or clpso.
    #[arg(long)]
    optimizer: Option<String>,
    /// Problem id or comma-separated list (e.g. f8 or f5,f8,ssrp).
    #[arg(long)]
    problem: Option<String>,
    /// Dimension for problems that need one (benchmarks: 10/30/50/100).
    #[arg(long)]
    dim: Option<usize>,
    /// Independent runs; seeds are seed..seed+runs-1.
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Evaluation budget per run (default: problem-dependent protocol).
    #[arg(long)]
    budget: Option<u64>,
    /// Decision-graph variant for spade: distance, serial, or combined.
    #[arg(long)]
    topology: Option<String>,
    /// Swarm size override.
    #[arg(long)]
    population: Option<usize>,
    /// Directory with benchmark transform files (<id>_D<dim>.txt).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory for the report artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra config override, repeatable (e.g. --set w=0.9,0.3).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct CompareArgs {
    /// First report.json (its optimizer is the table's reference point).
    #[arg(long)]
    a: PathBuf,
    /// Second report.json.
    #[arg(long)]
    b: PathBuf,
    /// Emit the machine-readable CSV table instead of the aligned text.
    #[arg(long)]
    csv: bool,
}

fn run_cmd(args: &RunArgs) -> spadepso::Result<()> {
    let mut config = ExperimentConfig::default();
    if let Some(path) = &args.config {
        config.apply_file(path)?;
    }
    if let Some(v) = &args.optimizer {
        config.set("optimizer", v)?;
    }
    if let Some(v) = &args.problem {
        config.set("problems", v)?;
    }
    if let Some(v) = args.dim {
        config.set("dimension", &v.to_string())?;
    }
    if let Some(v) = args.runs {
        config.set("runs", &v.to_string())?;
    }
    if let Some(v) = args.seed {
        config.set("seed", &v.to_string())?;
    }
    if let Some(v) = args.budget {
        config.set("budget", &v.to_string())?;
    }
    if let Some(v) = &args.topology {
        config.set("topology", v)?;
    }
    if let Some(v) = args.population {
        config.set("population", &v.to_string())?;
    }
    if let Some(v) = &args.data {
        config.data_dir = Some(v.clone());
    }
    for kv in &args.set {
        let (key, value) = kv.split_once('=').ok_or_else(|| {
            Error::InvalidInput(format!("--set expects KEY=VALUE, found `{kv}`"))
        })?;
        config.set(key.trim(), value.trim())?;
    }
    if let Some(v) = &args.out {
        config.out_dir = Some(v.clone());
    }
    let out = config.out_dir.clone().ok_or_else(|| {
        Error::InvalidConfig("no output directory (pass --out or set `out_dir`)".into())
    })?;
    let report = run_experiment(&config)?;
    write_report(&report, &out)?;
    print_summary(&report);
    println!("report written to {}", out.join("report.json").display());
    Ok(())
}

fn print_summary(report: &Report) {
    for e in &report.file.entries {
        println!(
            "{} D{} budget {} runs {}: best {:e} mean {:e} std {:e}",
            e.problem,
            e.dimension,
            e.budget,
            e.runs.len(),
            e.stats.min,
            e.stats.mean,
            e.stats.std_dev
        );
    }
}

fn compare_cmd(args: &CompareArgs) -> spadepso::Result<()> {
    let a = load_report(&args.a)?;
    let b = load_report(&args.b)?;
    let table = compare(&a, &b)?;
    if args.csv {
        print!("{}", table.to_csv());
    } else {
        println!("{table}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run_cmd(args),
        Command::Compare(args) => compare_cmd(args),
        Command::SpaDemo => {
            print!("{}", spadepso::spa::demo::walkthrough());
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
