//! Brute-force references for tests and cross-checks.
//!
//! Nothing here runs on the solve path. The routines enumerate every
//! cluster, every vertex or every active set explicitly and share only the
//! model arithmetic and the LP solver with the production code.

use crate::error::{Error, Result};
use crate::lp::{LpProblem, LpStatus, Relation};
use crate::master::{Duals, Objective};
use crate::model::{cluster_power, vertex_rate, Cluster, Column, ExactRates, NetworkInstance};
use crate::model::{Schedule, ScheduledColumn};
use crate::pricing_local::{LeMode, ScenarioTable};

/// Largest number of columns the full formulation may have.
pub const MAX_FULL_COLUMNS: u128 = 1_000_000;

/// Largest cell count for exhaustive active-set enumeration.
pub const MAX_ENUMERATED_CELLS: usize = 20;

/// Number of vertex columns over all clusters: `sum_s prod_{i in s} J_i`,
/// which equals `prod_i (1 + J_i) - 1`.
pub fn full_column_count(inst: &NetworkInstance) -> u128 {
    (0..inst.cell_count()).fold(1u128, |acc, i| {
        acc.saturating_mul(1 + inst.users_of(i).len() as u128)
    }) - 1
}

/// Every served-user combination of `s`, in odometer order over the cells.
pub fn vertex_choices(inst: &NetworkInstance, s: Cluster) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for i in s.cells() {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                inst.users_of(i).iter().map(move |&j| {
                    let mut v = prefix.clone();
                    v.push(j);
                    v
                })
            })
            .collect();
    }
    out
}

/// All vertex columns of all clusters with exact rates.
pub fn full_columns(inst: &NetworkInstance) -> Result<Vec<Column>> {
    let count = full_column_count(inst);
    if count > MAX_FULL_COLUMNS {
        return Err(Error::TooLarge(count));
    }
    let exact = ExactRates::new(inst);
    let mut cols = Vec::with_capacity(count as usize);
    for bits in 1..(1u64 << inst.cell_count()) {
        let s = Cluster::from_bits(bits)?;
        for served in vertex_choices(inst, s) {
            cols.push(Column::vertex(inst, &exact, s, served)?);
        }
    }
    Ok(cols)
}

/// The complete energy LP over `columns`, written out directly from the
/// rate arithmetic: one demand row per user, one deadline row.
pub fn full_problem(inst: &NetworkInstance, columns: &[Column]) -> LpProblem {
    let costs = columns
        .iter()
        .map(|c| cluster_power(inst, c.cluster()))
        .collect();
    let mut p = LpProblem::new(costs);
    for j in 0..inst.user_count() {
        let row: Vec<f64> = columns
            .iter()
            .map(|c| match c.assignments().find(|&(_, u)| u == j) {
                Some((i, _)) => vertex_rate(inst, c.cluster(), i, j).expect("member"),
                None => 0.0,
            })
            .collect();
        p.add_row(&row, Relation::Ge, inst.demand(j))
            .expect("row width");
    }
    p.add_row(&vec![1.0; columns.len()], Relation::Le, inst.deadline())
        .expect("row width");
    p
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub feasible: bool,
    /// Joules; infinite when infeasible.
    pub energy: f64,
    pub schedule: Schedule,
}

/// Global optimum of the energy problem by solving the LP over every
/// vertex column of every cluster.
pub fn brute_force_p2(inst: &NetworkInstance) -> Result<OracleSolution> {
    let cols = full_columns(inst)?;
    let sol = full_problem(inst, &cols).solve()?;
    match sol.status {
        LpStatus::Optimal => {
            let entries = cols
                .into_iter()
                .zip(&sol.x)
                .filter(|(_, &x)| x > 0.0)
                .map(|(column, &duration)| ScheduledColumn { column, duration })
                .collect();
            Ok(OracleSolution {
                feasible: true,
                energy: sol.objective,
                schedule: Schedule::new(entries),
            })
        }
        LpStatus::Infeasible => Ok(OracleSolution {
            feasible: false,
            energy: f64::INFINITY,
            schedule: Schedule::default(),
        }),
        LpStatus::Unbounded => Err(Error::Internal("full problem unbounded".into())),
    }
}

/// Shortest time in which all demands can be met.
pub fn brute_force_min_makespan(inst: &NetworkInstance) -> Result<f64> {
    let cols = full_columns(inst)?;
    let mut p = LpProblem::new(vec![1.0; cols.len()]);
    for j in 0..inst.user_count() {
        let row: Vec<f64> = cols.iter().map(|c| c.rate(j)).collect();
        p.add_row(&row, Relation::Ge, inst.demand(j))?;
    }
    let sol = p.solve()?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective),
        _ => Err(Error::Internal("makespan problem not optimal".into())),
    }
}

/// `max sum pi_j r_j` over every vertex of cluster `s`, by enumeration.
pub fn brute_force_cluster_omega(inst: &NetworkInstance, s: Cluster, duals: &Duals) -> f64 {
    vertex_choices(inst, s)
        .into_iter()
        .map(|served| {
            s.cells()
                .zip(served)
                .map(|(i, j)| duals.demand[j] * vertex_rate(inst, s, i, j).expect("member"))
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Minimum reduced cost over all clusters by vertex enumeration; ties go to
/// the lowest mask.
pub fn brute_force_price_all(
    inst: &NetworkInstance,
    duals: &Duals,
    objective: Objective,
) -> (Cluster, f64) {
    let mut best = (Cluster::singleton(0), f64::INFINITY);
    for bits in 1..(1u64 << inst.cell_count()) {
        let s = Cluster::from_bits(bits).expect("nonzero");
        let cost = match objective {
            Objective::Energy => cluster_power(inst, s),
            Objective::Makespan => 1.0,
        };
        let rc = cost - brute_force_cluster_omega(inst, s, duals) - duals.time;
        if rc < best.1 {
            best = (s, rc);
        }
    }
    best
}

/// Maximizes the local pricing objective over every nonempty active set.
/// Returns the lowest-mask maximizer and its value.
pub fn brute_force_local_pricing(
    inst: &NetworkInstance,
    table: &ScenarioTable,
    duals: &Duals,
    mode: LeMode,
    objective: Objective,
) -> Result<(Cluster, f64)> {
    let n = inst.cell_count();
    if n > MAX_ENUMERATED_CELLS {
        return Err(Error::TooManyCells {
            cells: n,
            limit: MAX_ENUMERATED_CELLS,
        });
    }
    let fixed = match objective {
        Objective::Energy => 0.0,
        Objective::Makespan => 1.0,
    };
    let mut best = (Cluster::singleton(0), f64::NEG_INFINITY);
    for bits in 1..(1u64 << n) {
        let z = Cluster::from_bits(bits)?;
        let mut value = 0.0;
        for i in z.cells() {
            let mut e = 0usize;
            for (t, &k) in table.neighbors().of(i).iter().enumerate() {
                if z.contains(k) {
                    e |= 1 << t;
                }
            }
            let gain = inst
                .users_of(i)
                .iter()
                .map(|&j| duals.demand[j] * table.rate(mode, i, e, j))
                .fold(f64::NEG_INFINITY, f64::max);
            let cost = match objective {
                Objective::Energy => inst.cell_power(i),
                Objective::Makespan => 0.0,
            };
            value += gain - cost;
        }
        value -= fixed;
        if value > best.1 {
            best = (z, value);
        }
    }
    Ok(best)
}
