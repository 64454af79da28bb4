//! Restricted master problem over a working set of columns.
//!
//! ```text
//! min  sum_c p_c x_c
//! s.t. sum_c r_cj x_c >= d_j   for every user j
//!      sum_c x_c      <= T
//!      x >= 0
//! ```
//!
//! The makespan variant drops the deadline row and prices every column at
//! one, so its optimum is the shortest time in which the held columns can
//! meet all demands.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::lp::{LpProblem, LpStatus, Relation};
use crate::model::{Cluster, Column, ColumnKey, NetworkInstance};

/// What a column costs per second of activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Cluster power `p_s`: the energy problem.
    Energy,
    /// One per second: the minimum-makespan problem.
    Makespan,
}

impl Objective {
    /// Part of the cost charged per member cell.
    #[inline]
    pub fn cell_cost(self, inst: &NetworkInstance, cell: usize) -> f64 {
        match self {
            Objective::Energy => inst.cell_power(cell),
            Objective::Makespan => 0.0,
        }
    }

    /// Part of the cost charged once per cluster.
    #[inline]
    pub fn fixed_cost(self) -> f64 {
        match self {
            Objective::Energy => 0.0,
            Objective::Makespan => 1.0,
        }
    }

    pub fn cluster_cost(self, inst: &NetworkInstance, s: Cluster) -> f64 {
        self.fixed_cost() + s.cells().map(|i| self.cell_cost(inst, i)).sum::<f64>()
    }

    pub fn column_cost(self, col: &Column) -> f64 {
        match self {
            Objective::Energy => col.power(),
            Objective::Makespan => 1.0,
        }
    }
}

/// Dual prices of a master optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct Duals {
    /// One per user, `>= 0`.
    pub demand: Vec<f64>,
    /// Deadline row, `<= 0`. Zero for the makespan master.
    pub time: f64,
}

impl Duals {
    pub fn zero(users: usize) -> Self {
        Duals {
            demand: vec![0.0; users],
            time: 0.0,
        }
    }
}

/// Reduced cost `cost - sum_j pi_j r_j - lambda` of a column.
pub fn reduced_cost(col: &Column, duals: &Duals, objective: Objective) -> f64 {
    let value: f64 = col
        .assignments()
        .map(|(_, j)| duals.demand[j] * col.rate(j))
        .sum();
    objective.column_cost(col) - value - duals.time
}

/// Ordered working set of columns with a duplicate guard.
#[derive(Debug, Clone, Default)]
pub struct ColumnPool {
    columns: Vec<Column>,
    keys: HashSet<ColumnKey>,
}

impl ColumnPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `col` unless an identical (cluster, served users) column is held.
    pub fn insert(&mut self, col: Column) -> bool {
        if self.keys.insert(col.key()) {
            self.columns.push(col);
            true
        } else {
            false
        }
    }

    pub fn contains(&self, col: &Column) -> bool {
        self.keys.contains(&col.key())
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

impl FromIterator<Column> for ColumnPool {
    fn from_iter<I: IntoIterator<Item = Column>>(iter: I) -> Self {
        let mut pool = ColumnPool::new();
        for c in iter {
            pool.insert(c);
        }
        pool
    }
}

/// Optimum of a restricted master problem.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterSolution {
    /// Activation time per held column, in pool order.
    pub durations: Vec<f64>,
    pub duals: Duals,
    pub objective: f64,
}

/// Working set plus its latest master optimum.
#[derive(Debug, Clone, Default)]
pub struct MasterState {
    pub pool: ColumnPool,
    pub solution: Option<MasterSolution>,
}

impl MasterState {
    pub fn new(pool: ColumnPool) -> Self {
        MasterState {
            pool,
            solution: None,
        }
    }
}

/// Builds the energy master: `J + 1` rows, one variable per column.
pub fn build(inst: &NetworkInstance, columns: &[Column]) -> LpProblem {
    let mut p = build_rows(inst, columns, Objective::Energy);
    p.add_row(&vec![1.0; columns.len()], Relation::Le, inst.deadline())
        .expect("row length matches column count");
    p
}

/// Builds the makespan master: `J` demand rows, unit costs.
pub fn build_makespan(inst: &NetworkInstance, columns: &[Column]) -> LpProblem {
    build_rows(inst, columns, Objective::Makespan)
}

fn build_rows(inst: &NetworkInstance, columns: &[Column], objective: Objective) -> LpProblem {
    let mut p = LpProblem::new(columns.iter().map(|c| objective.column_cost(c)).collect());
    let mut row = vec![0.0; columns.len()];
    for j in 0..inst.user_count() {
        for (v, c) in row.iter_mut().zip(columns) {
            *v = c.rate(j);
        }
        p.add_row(&row, Relation::Ge, inst.demand(j))
            .expect("row length matches column count");
    }
    p
}

#[derive(Debug, Clone, PartialEq)]
pub enum MasterOutcome {
    Optimal(MasterSolution),
    /// The held columns cannot meet the demands (within the deadline, for
    /// the energy master).
    Infeasible,
}

impl MasterOutcome {
    pub fn optimal(self) -> Option<MasterSolution> {
        match self {
            MasterOutcome::Optimal(s) => Some(s),
            MasterOutcome::Infeasible => None,
        }
    }
}

/// Solves the master for `objective` over `columns`.
///
/// Unboundedness cannot occur with positive costs and is reported as an
/// internal fault.
pub fn solve(
    inst: &NetworkInstance,
    columns: &[Column],
    objective: Objective,
) -> Result<MasterOutcome> {
    let p = match objective {
        Objective::Energy => build(inst, columns),
        Objective::Makespan => build_makespan(inst, columns),
    };
    let sol = p.solve()?;
    match sol.status {
        LpStatus::Infeasible => Ok(MasterOutcome::Infeasible),
        LpStatus::Unbounded => Err(Error::Internal("master problem reported unbounded".into())),
        LpStatus::Optimal => {
            let users = inst.user_count();
            let time = if objective == Objective::Energy {
                sol.duals[users].min(0.0)
            } else {
                0.0
            };
            let demand = sol.duals[..users].iter().map(|y| y.max(0.0)).collect();
            Ok(MasterOutcome::Optimal(MasterSolution {
                durations: sol.x,
                duals: Duals { demand, time },
                objective: sol.objective,
            }))
        }
    }
}

/// Solves the energy master over `columns`.
pub fn solve_master(inst: &NetworkInstance, columns: &[Column]) -> Result<MasterOutcome> {
    solve(inst, columns, Objective::Energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testing::instance;
    use crate::model::{ExactRates, InstanceData};

    fn one_user(demand: f64, deadline: f64) -> NetworkInstance {
        NetworkInstance::new(InstanceData {
            cell_count: 1,
            users_of_cell: vec![vec![0]],
            gain: vec![vec![1.0]],
            tx_power_per_ru: vec![1.0],
            circuit_power: 5.0,
            ru_count: 25,
            ru_bandwidth: 1.0 / 25.0,
            noise: 1.0,
            load: vec![1.0],
            demand: vec![demand],
            deadline,
            metadata: None,
        })
        .unwrap()
    }

    #[test]
    fn single_column_master() {
        // rate 1 (W B = 1, SINR = 1), p = 5 + 25 = 30, d = 1, T = 2
        let inst = one_user(1.0, 2.0);
        let col = Column::vertex(
            &inst,
            &ExactRates::new(&inst),
            Cluster::singleton(0),
            vec![0],
        )
        .unwrap();
        assert!((col.rate(0) - 1.0).abs() < 1e-15);
        let p = build(&inst, std::slice::from_ref(&col));
        assert_eq!(p.num_rows(), 2);
        assert_eq!(p.costs(), &[30.0]);
        assert_eq!(p.row(0), &[col.rate(0)]);
        assert_eq!(p.relation(1), Relation::Le);

        let sol = solve_master(&inst, std::slice::from_ref(&col))
            .unwrap()
            .optimal()
            .unwrap();
        assert!((sol.durations[0] - 1.0).abs() < 1e-12);
        assert!((sol.objective - 30.0).abs() < 1e-12);
        assert!((sol.duals.demand[0] - 30.0).abs() < 1e-12);
        assert_eq!(sol.duals.time, 0.0);
        assert!(reduced_cost(&col, &sol.duals, Objective::Energy).abs() < 1e-12);
    }

    #[test]
    fn unreachable_demand_is_infeasible() {
        let inst = one_user(3.0, 2.0);
        let col = Column::vertex(
            &inst,
            &ExactRates::new(&inst),
            Cluster::singleton(0),
            vec![0],
        )
        .unwrap();
        assert_eq!(
            solve_master(&inst, std::slice::from_ref(&col)).unwrap(),
            MasterOutcome::Infeasible
        );
        let mk = solve(&inst, &[col], Objective::Makespan)
            .unwrap()
            .optimal()
            .unwrap();
        assert!((mk.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn same_cluster_columns_share_cost() {
        let inst = instance(
            vec![vec![0, 1]],
            vec![vec![1.0], vec![2.0]],
            vec![1.0, 1.0],
            10.0,
        );
        let exact = ExactRates::new(&inst);
        let s = Cluster::singleton(0);
        let cols = vec![
            Column::vertex(&inst, &exact, s, vec![0]).unwrap(),
            Column::vertex(&inst, &exact, s, vec![1]).unwrap(),
        ];
        let p = build(&inst, &cols);
        assert_eq!(p.costs()[0], p.costs()[1]);
        assert_eq!(p.row(0)[1], 0.0);
        assert_eq!(p.row(1)[0], 0.0);
    }

    #[test]
    fn pool_rejects_duplicates() {
        let inst = instance(
            vec![vec![0, 1]],
            vec![vec![1.0], vec![2.0]],
            vec![1.0, 1.0],
            10.0,
        );
        let exact = ExactRates::new(&inst);
        let s = Cluster::singleton(0);
        let mut pool = ColumnPool::new();
        assert!(pool.insert(Column::vertex(&inst, &exact, s, vec![0]).unwrap()));
        assert!(!pool.insert(Column::vertex(&inst, &exact, s, vec![0]).unwrap()));
        assert!(pool.insert(Column::vertex(&inst, &exact, s, vec![1]).unwrap()));
        assert_eq!(pool.len(), 2);
    }
}
