use std::time::Duration;

use crate::error::Result;
use crate::master::ColumnPool;
use crate::model::{
    cluster_power, coupling_coeff, vertex_rate, Cluster, Column, ExactRates, NetworkInstance,
};
use crate::model::{Schedule, ScheduledColumn};

use super::{
    column_generation, full_cluster_columns, report_from, staircase_columns, Algorithm,
    FullClusterPricer, Pricer, SolveOptions, SolveReport, Termination,
};

/// Time each user needs when its cell transmits alone, indexed by user.
pub fn tdma_times(inst: &NetworkInstance) -> Vec<f64> {
    (0..inst.user_count())
        .map(|j| {
            let i = inst.cell_of(j);
            let r =
                vertex_rate(inst, Cluster::singleton(i), i, j).expect("user served by its cell");
            inst.demand(j) / r
        })
        .collect()
}

/// One base station at a time, each user at its interference-free rate.
/// Infeasible when the summed times exceed the deadline; the energy of the
/// overlong schedule is still reported.
pub fn tdma(inst: &NetworkInstance) -> SolveReport {
    let exact = ExactRates::new(inst);
    let times = tdma_times(inst);
    let entries: Vec<ScheduledColumn> = times
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let i = inst.cell_of(j);
            let column =
                Column::vertex(inst, &exact, Cluster::singleton(i), vec![j]).expect("own cell");
            ScheduledColumn {
                column,
                duration: t,
            }
        })
        .collect();
    let total: f64 = times.iter().sum();
    let feasible = total <= inst.deadline();
    let columns: ColumnPool = entries.iter().map(|e| e.column.clone()).collect();
    let schedule = Schedule::new(entries);
    SolveReport {
        algorithm: Algorithm::Tdma,
        energy: schedule.total_energy(),
        feasible,
        schedule,
        iterations: 0,
        pricing_time: Duration::ZERO,
        termination: if feasible {
            Termination::Converged
        } else {
            Termination::Infeasible
        },
        columns,
        min_held_reduced_cost: None,
        makespan: Some(total),
    }
}

/// Shortest time in which the full cluster meets every demand:
/// `max_i sum_j b_ij d_j / (l_i W B)`.
pub fn all_on_completion_time(inst: &NetworkInstance) -> f64 {
    let full = Cluster::full(inst.cell_count());
    (0..inst.cell_count())
        .map(|i| {
            inst.users_of(i)
                .iter()
                .map(|&j| coupling_coeff(inst, full, i, j).expect("member") * inst.demand(j))
                .sum::<f64>()
                / (inst.load(i) * inst.capacity_scale())
        })
        .fold(0.0, f64::max)
}

/// Every cell transmits until all demands are met; rates optimized by column
/// generation over the full cluster's vertices. When the deadline is missed
/// the energy of the shortest all-on schedule is still reported.
pub fn all_on(inst: &NetworkInstance, options: &SolveOptions) -> Result<SolveReport> {
    let pricer = FullClusterPricer::new(inst);
    let mut seed = full_cluster_columns(inst, pricer.rates());
    seed.extend(staircase_columns(inst, pricer.rates()));
    let run = column_generation(inst, &pricer, options, seed)?;
    let makespan = run.makespan;
    let mut rep = report_from(Algorithm::AllOn, run);
    if !rep.feasible {
        if let Some(t) = makespan {
            rep.energy = cluster_power(inst, Cluster::full(inst.cell_count())) * t;
        }
    }
    Ok(rep)
}
