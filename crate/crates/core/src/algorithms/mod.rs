//! End-to-end scheduling procedures.
//!
//! * [`ocs`]: exact column generation, globally optimal.
//! * [`bound`]: local-enumeration runs bracketing the optimum, plus [`near`].
//! * [`tdma`] and [`all_on`]: the two reference schemes.

mod baselines;
mod cg;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use baselines::{all_on, all_on_completion_time, tdma, tdma_times};
pub use cg::{
    column_generation, full_cluster_columns, initial_columns, pair_columns, staircase_columns,
    tdma_columns, CgRun, ExactPricer, FullClusterPricer, LocalPricer, Pricer,
};

use crate::error::{Error, Result};
use crate::master::{self, reduced_cost, ColumnPool, Objective};
use crate::model::{Column, ExactRates, NetworkInstance, Schedule, ScheduledColumn};
use crate::pricing_exact::DEFAULT_EXACT_LIMIT;
use crate::pricing_local::{build_scenarios, select_neighbors, LeMode, MPolicy, ScenarioTable};

/// Reduced-cost threshold below which a priced column enters the master.
pub const DEFAULT_EPS_RC: f64 = 1e-7;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Ocs,
    LeOff,
    LeOn,
    Near,
    Tdma,
    AllOn,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Ocs,
        Algorithm::LeOff,
        Algorithm::LeOn,
        Algorithm::Near,
        Algorithm::Tdma,
        Algorithm::AllOn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ocs => "ocs",
            Algorithm::LeOff => "le-off",
            Algorithm::LeOn => "le-on",
            Algorithm::Near => "near",
            Algorithm::Tdma => "tdma",
            Algorithm::AllOn => "allon",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "ocs" => Ok(Algorithm::Ocs),
            "le-off" | "leoff" => Ok(Algorithm::LeOff),
            "le-on" | "leon" => Ok(Algorithm::LeOn),
            "near" => Ok(Algorithm::Near),
            "tdma" => Ok(Algorithm::Tdma),
            "allon" | "all-on" => Ok(Algorithm::AllOn),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    Infeasible,
    IterationCap,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Converged => "converged",
            Termination::Infeasible => "infeasible",
            Termination::IterationCap => "iteration-cap",
        })
    }
}

/// Choice of starting columns.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialColumns {
    /// TDMA singletons plus full-cluster columns.
    #[default]
    Default,
    /// As `Default`, plus every two-cell cluster with every served-user pair.
    Pairs,
}

impl FromStr for InitialColumns {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "default" => Ok(InitialColumns::Default),
            "pairs" => Ok(InitialColumns::Pairs),
            other => Err(Error::Config(format!(
                "unknown initial column set `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub initial: InitialColumns,
    pub eps_rc: f64,
    pub max_iterations: usize,
    /// Largest cell count for which exact pricing scans all clusters.
    pub exact_limit: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            initial: InitialColumns::Default,
            eps_rc: DEFAULT_EPS_RC,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            exact_limit: DEFAULT_EXACT_LIMIT,
        }
    }
}

/// Result of one procedure on one instance.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub algorithm: Algorithm,
    /// Joules. For infeasible column-generation runs this is infinite; the
    /// reference schemes report the energy of their overlong schedule.
    pub energy: f64,
    pub feasible: bool,
    /// Columns with positive duration.
    pub schedule: Schedule,
    /// Pricing rounds.
    pub iterations: usize,
    pub pricing_time: Duration,
    pub termination: Termination,
    /// Final working set.
    pub columns: ColumnPool,
    /// Smallest reduced cost over the working set at the final duals.
    pub min_held_reduced_cost: Option<f64>,
    /// Shortest makespan found when the starting columns missed the deadline.
    pub makespan: Option<f64>,
}

impl SolveReport {
    pub fn active_columns(&self) -> usize {
        self.schedule.active_count()
    }
}

fn schedule_from(columns: &[Column], durations: &[f64]) -> Schedule {
    Schedule::new(
        columns
            .iter()
            .zip(durations)
            .filter(|(_, &x)| x > 0.0)
            .map(|(c, &x)| ScheduledColumn {
                column: c.clone(),
                duration: x,
            })
            .collect(),
    )
}

fn report_from(algorithm: Algorithm, run: CgRun) -> SolveReport {
    let (schedule, energy, min_rc) = match &run.solution {
        Some(sol) => {
            let sched = schedule_from(run.pool.columns(), &sol.durations);
            let min_rc = run
                .pool
                .columns()
                .iter()
                .map(|c| reduced_cost(c, &sol.duals, Objective::Energy))
                .fold(f64::INFINITY, f64::min);
            let e = sched.total_energy();
            (sched, e, Some(min_rc))
        }
        None => (Schedule::default(), f64::INFINITY, None),
    };
    SolveReport {
        algorithm,
        energy,
        feasible: run.solution.is_some(),
        schedule,
        iterations: run.iterations,
        pricing_time: run.pricing_time,
        termination: run.termination,
        columns: run.pool,
        min_held_reduced_cost: min_rc,
        makespan: run.makespan,
    }
}

/// Globally optimal schedule by column generation with exact pricing.
pub fn ocs(inst: &NetworkInstance, options: &SolveOptions) -> Result<SolveReport> {
    ocs_warm(inst, options, &[])
}

/// [`ocs`] seeded with columns from an earlier run. Columns built for fewer
/// users are padded with zero rates.
pub fn ocs_warm(
    inst: &NetworkInstance,
    options: &SolveOptions,
    prior: &[Column],
) -> Result<SolveReport> {
    let n = inst.cell_count();
    if n > options.exact_limit {
        return Err(Error::TooManyCells {
            cells: n,
            limit: options.exact_limit,
        });
    }
    let pricer = ExactPricer::new(inst, options.exact_limit);
    let mut seed = initial_columns(inst, pricer.rates(), options.initial);
    seed.extend_from_slice(prior);
    Ok(report_from(
        Algorithm::Ocs,
        column_generation(inst, &pricer, options, seed)?,
    ))
}

/// Column generation with local-enumeration rates and pricing in `mode`.
pub fn le_run(
    inst: &NetworkInstance,
    table: &ScenarioTable,
    mode: LeMode,
    options: &SolveOptions,
) -> Result<SolveReport> {
    let pricer = LocalPricer::new(table, mode);
    let alg = match mode {
        LeMode::Off => Algorithm::LeOff,
        LeMode::On => Algorithm::LeOn,
    };
    let seed = initial_columns(inst, pricer.rates(), options.initial);
    Ok(report_from(
        alg,
        column_generation(inst, &pricer, options, seed)?,
    ))
}

/// Re-rates the active columns of an LE-on optimum with exact coefficients
/// and re-solves the master over exactly those columns.
pub fn near_from_le_on(inst: &NetworkInstance, le_on: &SolveReport) -> Result<SolveReport> {
    let base = SolveReport {
        algorithm: Algorithm::Near,
        energy: f64::INFINITY,
        feasible: false,
        schedule: Schedule::default(),
        iterations: le_on.iterations,
        pricing_time: le_on.pricing_time,
        termination: Termination::Infeasible,
        columns: ColumnPool::new(),
        min_held_reduced_cost: None,
        makespan: None,
    };
    if !le_on.feasible {
        return Ok(base);
    }
    let exact = ExactRates::new(inst);
    let pool: ColumnPool = le_on
        .schedule
        .entries()
        .iter()
        .map(|e| e.column.rerated(inst, &exact))
        .collect();
    match master::solve_master(inst, pool.columns())?.optimal() {
        Some(sol) => {
            let schedule = schedule_from(pool.columns(), &sol.durations);
            Ok(SolveReport {
                energy: schedule.total_energy(),
                feasible: true,
                schedule,
                termination: le_on.termination,
                columns: pool,
                ..base
            })
        }
        None => Err(Error::Internal(
            "exact rates made an LE-on schedule infeasible".into(),
        )),
    }
}

/// LE-on run followed by the exact-rate repair.
pub fn near(
    inst: &NetworkInstance,
    policy: &MPolicy,
    options: &SolveOptions,
) -> Result<SolveReport> {
    let table = build_scenarios(inst, &select_neighbors(inst, policy)?)?;
    near_from_le_on(inst, &le_run(inst, &table, LeMode::On, options)?)
}

/// Lower and upper bounds from the two local-enumeration modes.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub policy: MPolicy,
    pub le_off: SolveReport,
    pub le_on: SolveReport,
    pub near: SolveReport,
}

impl BoundReport {
    /// Lower bound; infinite when even optimistic rates miss the deadline.
    pub fn lower(&self) -> f64 {
        self.le_off.energy
    }

    /// Upper bound; infinite when pessimistic rates miss the deadline.
    pub fn upper(&self) -> f64 {
        self.le_on.energy
    }

    /// `(upper - lower) / lower`, when both bounds are finite.
    pub fn gap(&self) -> Option<f64> {
        (self.le_off.feasible && self.le_on.feasible)
            .then(|| (self.upper() - self.lower()) / self.lower())
    }
}

pub fn bound(
    inst: &NetworkInstance,
    policy: &MPolicy,
    options: &SolveOptions,
) -> Result<BoundReport> {
    let table = build_scenarios(inst, &select_neighbors(inst, policy)?)?;
    bound_with_table(inst, &table, policy.clone(), options)
}

/// [`bound`] over a prebuilt scenario table.
pub fn bound_with_table(
    inst: &NetworkInstance,
    table: &ScenarioTable,
    policy: MPolicy,
    options: &SolveOptions,
) -> Result<BoundReport> {
    let le_off = le_run(inst, table, LeMode::Off, options)?;
    let le_on = le_run(inst, table, LeMode::On, options)?;
    let near = near_from_le_on(inst, &le_on)?;
    Ok(BoundReport {
        policy,
        le_off,
        le_on,
        near,
    })
}

#[cfg(test)]
mod tests;
