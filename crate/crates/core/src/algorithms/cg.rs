use std::time::{Duration, Instant};

use log::{debug, warn};

use crate::error::{Error, Result};
use crate::master::{self, ColumnPool, Duals, MasterOutcome, MasterSolution, Objective};
use crate::model::{Cluster, Column, ExactRates, NetworkInstance, RateModel};
use crate::pricing_exact::{price_all, price_cluster, Priced};
use crate::pricing_local::{solve_pricing_local, LeMode, LeRates, ScenarioTable};

use super::{InitialColumns, SolveOptions, Termination};

/// Rate model plus the matching pricing oracle.
pub trait Pricer: Sync {
    /// Rates used for every column of the run, including the initial ones.
    fn rates(&self) -> &dyn RateModel;

    /// Column of minimum reduced cost under `duals`.
    fn price(&self, inst: &NetworkInstance, duals: &Duals, objective: Objective) -> Result<Priced>;
}

/// Scans every cluster with exact rates.
pub struct ExactPricer<'a> {
    rates: ExactRates<'a>,
    limit: usize,
}

impl<'a> ExactPricer<'a> {
    pub fn new(inst: &'a NetworkInstance, limit: usize) -> Self {
        ExactPricer {
            rates: ExactRates::new(inst),
            limit,
        }
    }
}

impl Pricer for ExactPricer<'_> {
    fn rates(&self) -> &dyn RateModel {
        &self.rates
    }

    fn price(&self, inst: &NetworkInstance, duals: &Duals, objective: Objective) -> Result<Priced> {
        price_all(inst, &self.rates, duals, objective, self.limit)
    }
}

/// Prices only the cluster of all cells.
pub struct FullClusterPricer<'a> {
    rates: ExactRates<'a>,
}

impl<'a> FullClusterPricer<'a> {
    pub fn new(inst: &'a NetworkInstance) -> Self {
        FullClusterPricer {
            rates: ExactRates::new(inst),
        }
    }
}

impl Pricer for FullClusterPricer<'_> {
    fn rates(&self) -> &dyn RateModel {
        &self.rates
    }

    fn price(&self, inst: &NetworkInstance, duals: &Duals, objective: Objective) -> Result<Priced> {
        let full = Cluster::full(inst.cell_count());
        Ok(price_cluster(inst, &self.rates, full, duals, objective))
    }
}

/// Local-enumeration pricing in one mode.
pub struct LocalPricer<'a> {
    table: &'a ScenarioTable,
    rates: LeRates<'a>,
}

impl<'a> LocalPricer<'a> {
    pub fn new(table: &'a ScenarioTable, mode: LeMode) -> Self {
        LocalPricer {
            table,
            rates: table.rates(mode),
        }
    }
}

impl Pricer for LocalPricer<'_> {
    fn rates(&self) -> &dyn RateModel {
        &self.rates
    }

    fn price(&self, inst: &NetworkInstance, duals: &Duals, objective: Objective) -> Result<Priced> {
        Ok(
            solve_pricing_local(inst, self.table, duals, self.rates.mode(), objective)
                .into_priced(inst),
        )
    }
}

fn vertex(inst: &NetworkInstance, rates: &dyn RateModel, s: Cluster, served: Vec<usize>) -> Column {
    Column::vertex(inst, rates, s, served).expect("served users belong to their cells")
}

/// One singleton column per user: each cell alone serving one user.
pub fn tdma_columns(inst: &NetworkInstance, rates: &dyn RateModel) -> Vec<Column> {
    (0..inst.cell_count())
        .flat_map(|i| inst.users_of(i).iter().map(move |&j| (i, j)))
        .map(|(i, j)| vertex(inst, rates, Cluster::singleton(i), vec![j]))
        .collect()
}

/// Full-cluster columns serving each user in turn, with every other cell on
/// its lowest-id user.
pub fn full_cluster_columns(inst: &NetworkInstance, rates: &dyn RateModel) -> Vec<Column> {
    let n = inst.cell_count();
    let full = Cluster::full(n);
    let lowest: Vec<usize> = (0..n)
        .map(|i| *inst.users_of(i).iter().min().expect("nonempty"))
        .collect();
    (0..inst.user_count())
        .map(|j| {
            let own = inst.cell_of(j);
            let served = (0..n)
                .map(|i| if i == own { j } else { lowest[i] })
                .collect();
            vertex(inst, rates, full, served)
        })
        .collect()
}

/// Full-cluster columns of the all-on schedule in which every cell serves
/// its users back to back in id order. Each interval between consecutive
/// completion times becomes one column, so these columns alone meet every
/// demand within the all-on completion time.
pub fn staircase_columns(inst: &NetworkInstance, rates: &dyn RateModel) -> Vec<Column> {
    let n = inst.cell_count();
    let full = Cluster::full(n);
    let queues: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            let mut users = inst.users_of(i).to_vec();
            users.sort_unstable();
            let mut t = 0.0;
            users
                .into_iter()
                .map(|j| {
                    t += inst.demand(j) / rates.rate(full, i, j);
                    (j, t)
                })
                .collect()
        })
        .collect();
    let mut pos = vec![0usize; n];
    let mut out = Vec::new();
    loop {
        let next = (0..n)
            .filter(|&i| pos[i] < queues[i].len())
            .map(|i| queues[i][pos[i]].1)
            .fold(f64::INFINITY, f64::min);
        if !next.is_finite() {
            break;
        }
        let served = (0..n)
            .map(|i| queues[i][pos[i].min(queues[i].len() - 1)].0)
            .collect();
        out.push(vertex(inst, rates, full, served));
        for i in 0..n {
            if pos[i] < queues[i].len() && queues[i][pos[i]].1 <= next {
                pos[i] += 1;
            }
        }
    }
    out
}

/// All two-cell clusters with every combination of served users.
pub fn pair_columns(inst: &NetworkInstance, rates: &dyn RateModel) -> Vec<Column> {
    let n = inst.cell_count();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let s = Cluster::from_cells([a, b]).expect("two cells");
            for &ja in inst.users_of(a) {
                for &jb in inst.users_of(b) {
                    out.push(vertex(inst, rates, s, vec![ja, jb]));
                }
            }
        }
    }
    out
}

/// Starting working set for a run.
pub fn initial_columns(
    inst: &NetworkInstance,
    rates: &dyn RateModel,
    kind: InitialColumns,
) -> Vec<Column> {
    let mut cols = tdma_columns(inst, rates);
    if kind == InitialColumns::Pairs {
        cols.extend(pair_columns(inst, rates));
    }
    cols.extend(full_cluster_columns(inst, rates));
    cols.extend(staircase_columns(inst, rates));
    cols
}

/// Raw outcome of a column-generation run.
#[derive(Debug, Clone)]
pub struct CgRun {
    pub pool: ColumnPool,
    /// Energy-master optimum over the final pool, if the deadline is met.
    pub solution: Option<MasterSolution>,
    /// Shortest makespan reached while restoring feasibility; `None` when the
    /// starting columns already fit in the deadline.
    pub makespan: Option<f64>,
    pub iterations: usize,
    pub pricing_time: Duration,
    pub termination: Termination,
}

struct Engine<'a> {
    inst: &'a NetworkInstance,
    pricer: &'a dyn Pricer,
    options: &'a SolveOptions,
    pool: ColumnPool,
    iterations: usize,
    pricing_time: Duration,
}

impl Engine<'_> {
    fn price(&mut self, duals: &Duals, objective: Objective) -> Result<Priced> {
        let start = Instant::now();
        let p = self.pricer.price(self.inst, duals, objective);
        self.pricing_time += start.elapsed();
        self.iterations += 1;
        p
    }

    /// Adds the priced column when it improves the master; `false` means
    /// the current master is optimal over all columns.
    fn accept(&mut self, p: Priced) -> bool {
        if p.reduced_cost >= -self.options.eps_rc {
            return false;
        }
        if self.pool.insert(p.column) {
            true
        } else {
            warn!(
                "pricing returned a held column with reduced cost {:e}",
                p.reduced_cost
            );
            false
        }
    }

    fn energy_master(&self) -> Result<MasterOutcome> {
        master::solve_master(self.inst, self.pool.columns())
    }

    /// Generates makespan columns until the energy master becomes feasible.
    /// Returns the energy optimum, or `None` with the best makespan when the
    /// deadline cannot be met.
    fn restore_feasibility(&mut self) -> Result<(Option<MasterSolution>, f64, Termination)> {
        let deadline = self.inst.deadline();
        loop {
            let mk = master::solve(self.inst, self.pool.columns(), Objective::Makespan)?
                .optimal()
                .ok_or_else(|| Error::Internal("makespan master infeasible".into()))?;
            debug!("makespan round {}: {:.9}", self.iterations, mk.objective);
            if mk.objective <= deadline {
                if let MasterOutcome::Optimal(sol) = self.energy_master()? {
                    return Ok((Some(sol), mk.objective, Termination::Converged));
                }
            }
            if self.iterations >= self.options.max_iterations {
                return Ok((None, mk.objective, Termination::IterationCap));
            }
            let p = self.price(&mk.duals, Objective::Makespan)?;
            if !self.accept(p) {
                return Ok((None, mk.objective, Termination::Infeasible));
            }
        }
    }
}

/// Column generation around `pricer`, starting from `seed` (the configured
/// initial columns, possibly with columns of an earlier run). Seed columns
/// built for fewer users are padded with zero rates.
pub fn column_generation(
    inst: &NetworkInstance,
    pricer: &dyn Pricer,
    options: &SolveOptions,
    seed: Vec<Column>,
) -> Result<CgRun> {
    let mut pool = ColumnPool::new();
    for c in seed {
        if c.rates().len() > inst.user_count() {
            return Err(Error::Config(
                "seed column covers more users than the instance".into(),
            ));
        }
        pool.insert(c.extended(inst.user_count()));
    }
    let mut eng = Engine {
        inst,
        pricer,
        options,
        pool,
        iterations: 0,
        pricing_time: Duration::ZERO,
    };

    let mut makespan = None;
    let mut sol = match eng.energy_master()? {
        MasterOutcome::Optimal(s) => s,
        MasterOutcome::Infeasible => {
            let (sol, mk, term) = eng.restore_feasibility()?;
            makespan = Some(mk);
            match sol {
                Some(s) => s,
                None => {
                    return Ok(CgRun {
                        pool: eng.pool,
                        solution: None,
                        makespan,
                        iterations: eng.iterations,
                        pricing_time: eng.pricing_time,
                        termination: term,
                    })
                }
            }
        }
    };

    let termination = loop {
        if eng.iterations >= options.max_iterations {
            break Termination::IterationCap;
        }
        let p = eng.price(&sol.duals, Objective::Energy)?;
        debug!(
            "round {}: energy {:.9} best reduced cost {:e}",
            eng.iterations, sol.objective, p.reduced_cost
        );
        if !eng.accept(p) {
            break Termination::Converged;
        }
        sol = eng.energy_master()?.optimal().ok_or_else(|| {
            Error::Internal("master lost feasibility after adding a column".into())
        })?;
    };
    Ok(CgRun {
        pool: eng.pool,
        solution: Some(sol),
        makespan,
        iterations: eng.iterations,
        pricing_time: eng.pricing_time,
        termination,
    })
}
