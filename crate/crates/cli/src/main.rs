//! `cellsched`: generate networks, solve single instances, and run seeded
//! sweeps over deadlines and neighbor-set sizes.

mod config;
mod output;
mod sweep;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;

use cellsched::algorithms::{self, Algorithm, SolveReport};
use cellsched::model::{validate_schedule, NetworkInstance};
use cellsched::netgen::generate;
use cellsched::pricing_local::MPolicy;
use cellsched::Error;

use config::{FileConfig, NetArgs};
use sweep::Plan;

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or input files: exit 2.
    Config(String),
    /// Solver or I/O failure: exit 3.
    Fault(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Fault(m) => write!(f, "internal fault: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::Model(_)
            | Error::TooManyCells { .. }
            | Error::TooLarge(_) => CliError::Config(e.to_string()),
            _ => CliError::Fault(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "cellsched",
    version,
    about = "Energy-minimal multi-cell scheduling experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one network instance and write it as JSON.
    Gen(GenArgs),
    /// Solve one instance file with one algorithm.
    Solve(SolveArgs),
    /// Run algorithms over a batch of seeded instances and a deadline sweep.
    Run(RunArgs),
    /// Run the lower/upper bounding pair over a batch and report the gaps.
    Bound(BoundArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LeModeArg {
    On,
    Off,
    Both,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    net: NetArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Deadline stored in the instance, seconds.
    #[arg(long = "T")]
    deadline: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// ocs, le-off, le-on, near, tdma, allon or bound.
    #[arg(long, default_value = "ocs")]
    algo: String,
    /// Overrides the deadline stored in the instance, seconds.
    #[arg(long = "T")]
    deadline: Option<f64>,
    /// Neighbor-set size for the local-enumeration algorithms.
    #[arg(long = "M", default_value = "5")]
    m: String,
    /// Allow exact pricing on networks above the soft cell limit.
    #[arg(long)]
    force_exact: bool,
    /// Solver options file (TOML, `[solver]` table).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print every scheduled column.
    #[arg(long)]
    schedule: bool,
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub net: NetArgs,
    /// Deadlines in seconds.
    #[arg(long = "T", value_delimiter = ',')]
    pub deadlines: Option<Vec<f64>>,
    /// Neighbor-set sizes: integers, `neighbor` or `full`.
    #[arg(long = "M", value_delimiter = ',')]
    pub m: Option<Vec<String>>,
    #[arg(long)]
    pub instances: Option<usize>,
    /// Seed of instance 0; instance k uses `seed + k`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    #[arg(long)]
    pub force_exact: bool,
    /// Also write wall-clock times to `timing.csv`.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// Comma list of ocs, le-off, le-on, near, tdma, allon, bound.
    #[arg(long, value_delimiter = ',')]
    algos: Option<Vec<String>>,
    /// Which local-enumeration runs `bound` expands to.
    #[arg(long, value_enum)]
    le_mode: Option<LeModeArg>,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long, value_enum)]
    le_mode: Option<LeModeArg>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CELLSCHED_LOG", "warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Run(a) => {
            let file = FileConfig::load(a.sweep.net.config.as_deref());
            file.and_then(|f| {
                let plan = Plan::for_run(&a.sweep, &f, a.algos.as_deref(), a.le_mode)?;
                sweep::execute(&plan)
            })
        }
        Command::Bound(a) => {
            let file = FileConfig::load(a.sweep.net.config.as_deref());
            file.and_then(|f| {
                let plan = Plan::for_bound(&a.sweep, &f, a.le_mode)?;
                sweep::execute(&plan)
            })
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cellsched: {e}");
            ExitCode::from(match e {
                CliError::Config(_) => 2,
                CliError::Fault(_) => 3,
            })
        }
    }
}

fn cmd_gen(a: GenArgs) -> CliResult<()> {
    let file = FileConfig::load(a.net.config.as_deref())?;
    let mut cfg = a.net.apply(file.generator.clone())?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(t) = a.deadline {
        cfg.deadline_s = t;
    }
    let inst = generate(&cfg)?;
    inst.save_file(&a.out)
        .map_err(|e| CliError::Fault(format!("writing {}: {e}", a.out.display())))?;
    println!(
        "wrote {} ({} layout, {} cells, {} users, seed {})",
        a.out.display(),
        cfg.layout.name(),
        inst.cell_count(),
        inst.user_count(),
        cfg.seed
    );
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> CliResult<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let mut inst = NetworkInstance::load_file(&a.instance)
        .map_err(|e| CliError::Config(format!("reading {}: {e}", a.instance.display())))?;
    if let Some(t) = a.deadline {
        inst = inst.with_deadline(t).map_err(Error::from)?;
    }
    let policy: MPolicy = a.m.parse()?;
    let mut opts = file.solver.clone();
    let algo = a.algo.trim().to_ascii_lowercase();
    let n = inst.cell_count();
    if algo == "ocs" {
        sweep::check_exact(n, a.force_exact, &mut opts)?;
    }

    println!(
        "instance     {} ({} cells, {} users)",
        a.instance.display(),
        n,
        inst.user_count()
    );
    println!("T            {} s", inst.deadline());
    let start = Instant::now();
    if algo == "bound" {
        let b = algorithms::bound(&inst, &policy, &opts)?;
        println!("M            {}", b.policy);
        println!(
            "lower        {} J (le-off, {})",
            b.lower(),
            b.le_off.termination
        );
        println!(
            "upper        {} J (le-on, {})",
            b.upper(),
            b.le_on.termination
        );
        println!("near         {} J", b.near.energy);
        match b.gap() {
            Some(g) => println!("gap          {:.4} %", 100.0 * g),
            None => println!("gap          unbounded"),
        }
        println!("wall time    {:.3} s", start.elapsed().as_secs_f64());
        if a.schedule {
            print_schedule(&inst, &b.near);
        }
        return Ok(());
    }

    let alg: Algorithm = algo.parse()?;
    let rep = match alg {
        Algorithm::Ocs => algorithms::ocs(&inst, &opts)?,
        Algorithm::Tdma => algorithms::tdma(&inst),
        Algorithm::AllOn => algorithms::all_on(&inst, &opts)?,
        Algorithm::Near => algorithms::near(&inst, &policy, &opts)?,
        Algorithm::LeOff | Algorithm::LeOn => {
            let b = algorithms::bound(&inst, &policy, &opts)?;
            if alg == Algorithm::LeOff {
                b.le_off
            } else {
                b.le_on
            }
        }
    };
    println!("algorithm    {}", rep.algorithm);
    if matches!(alg, Algorithm::LeOff | Algorithm::LeOn | Algorithm::Near) {
        println!("M            {policy}");
    }
    println!("energy       {} J", rep.energy);
    println!("feasible     {}", rep.feasible);
    println!("termination  {}", rep.termination);
    println!("iterations   {}", rep.iterations);
    println!("active cols  {}", rep.active_columns());
    if let Some(mk) = rep.makespan {
        println!("makespan     {mk} s");
    }
    println!("pricing time {:.3} s", rep.pricing_time.as_secs_f64());
    println!("wall time    {:.3} s", start.elapsed().as_secs_f64());
    if a.schedule {
        print_schedule(&inst, &rep);
    }
    Ok(())
}

fn print_schedule(inst: &NetworkInstance, rep: &SolveReport) {
    if rep.schedule.is_empty() {
        println!("(no schedule)");
        return;
    }
    let check = validate_schedule(inst, &rep.schedule);
    if !check.feasible() {
        warn!(
            "schedule fails validation (worst slack {:e})",
            check.worst_slack()
        );
    }
    println!(
        "{:>12}  {:>10}  cluster / served users",
        "duration_s", "power_w"
    );
    for e in rep.schedule.entries() {
        let served: Vec<String> = e
            .column
            .assignments()
            .map(|(i, j)| format!("{i}:{j}"))
            .collect();
        println!(
            "{:>12.6}  {:>10.3}  {}  {}",
            e.duration,
            e.column.power(),
            e.column.cluster(),
            served.join(" ")
        );
    }
}
