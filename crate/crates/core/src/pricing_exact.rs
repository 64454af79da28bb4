//! Exact pricing over every cluster.
//!
//! For a fixed cluster the pricing problem is a linear program over a
//! product of simplices, so it separates by cell: each member cell serves
//! the user with the largest dual-weighted vertex rate.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::master::{Duals, Objective};
use crate::model::{Cluster, Column, NetworkInstance, RateModel};

/// Default cap on the network size for scanning all `2^I - 1` clusters.
pub const DEFAULT_EXACT_LIMIT: usize = 20;

/// Below this many clusters the scan stays sequential.
const PARALLEL_THRESHOLD: u64 = 1 << 12;

/// A candidate column with its pricing value.
#[derive(Debug, Clone, PartialEq)]
pub struct Priced {
    pub column: Column,
    /// `sum_j pi_j r_j` over the served users.
    pub omega: f64,
    pub reduced_cost: f64,
}

struct Choice {
    bits: u64,
    reduced_cost: f64,
}

fn choose<R: RateModel + ?Sized>(
    inst: &NetworkInstance,
    rates: &R,
    s: Cluster,
    duals: &Duals,
    served: &mut Vec<usize>,
) -> f64 {
    served.clear();
    let mut omega = 0.0;
    for i in s.cells() {
        let mut best_user = usize::MAX;
        let mut best = f64::NEG_INFINITY;
        for &j in inst.users_of(i) {
            let v = duals.demand[j] * rates.rate(s, i, j);
            if v > best || (v == best && j < best_user) {
                best = v;
                best_user = j;
            }
        }
        served.push(best_user);
        omega += best;
    }
    omega
}

/// Best vertex column of cluster `s` under `duals`: each member cell serves
/// `argmax_j pi_j r_ij` (ties to the lowest user id). The reduced cost is
/// `cost(s) - omega - lambda`.
pub fn price_cluster<R: RateModel + ?Sized>(
    inst: &NetworkInstance,
    rates: &R,
    s: Cluster,
    duals: &Duals,
    objective: Objective,
) -> Priced {
    let mut served = Vec::with_capacity(s.len());
    let omega = choose(inst, rates, s, duals, &mut served);
    let mut rate = vec![0.0; inst.user_count()];
    for (i, &j) in s.cells().zip(&served) {
        rate[j] = rates.rate(s, i, j);
    }
    let power = crate::model::cluster_power(inst, s);
    let reduced_cost = objective.cluster_cost(inst, s) - omega - duals.time;
    Priced {
        column: Column::from_parts(s, served, rate, power),
        omega,
        reduced_cost,
    }
}

/// Prices every nonempty cluster and returns the one with minimum reduced
/// cost; ties go to the lowest bitmask.
pub fn price_all<R: RateModel + ?Sized>(
    inst: &NetworkInstance,
    rates: &R,
    duals: &Duals,
    objective: Objective,
    limit: usize,
) -> Result<Priced> {
    let n = inst.cell_count();
    if n > limit.min(63) {
        return Err(Error::TooManyCells { cells: n, limit });
    }
    let end = 1u64 << n;
    let eval = |bits: u64, served: &mut Vec<usize>| {
        let s = Cluster::from_bits(bits).expect("nonzero mask");
        let omega = choose(inst, rates, s, duals, served);
        Choice {
            bits,
            reduced_cost: objective.cluster_cost(inst, s) - omega - duals.time,
        }
    };
    let better = |a: Choice, b: Choice| {
        if b.reduced_cost < a.reduced_cost || (b.reduced_cost == a.reduced_cost && b.bits < a.bits)
        {
            b
        } else {
            a
        }
    };
    let best = if end <= PARALLEL_THRESHOLD {
        let mut served = Vec::new();
        (1..end).map(|b| eval(b, &mut served)).reduce(better)
    } else {
        (1..end)
            .into_par_iter()
            .map_init(Vec::new, |served, b| eval(b, served))
            .reduce_with(better)
    }
    .expect("at least one cluster");
    Ok(price_cluster(
        inst,
        rates,
        Cluster::from_bits(best.bits)?,
        duals,
        objective,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::master::reduced_cost;
    use crate::model::testing::instance;
    use crate::model::ExactRates;

    #[test]
    fn zero_duals_price_power_only() {
        let inst = instance(
            vec![vec![0, 1], vec![2]],
            vec![vec![1.0, 0.2], vec![2.0, 0.1], vec![0.3, 1.5]],
            vec![1.0; 3],
            1.0,
        );
        let duals = Duals {
            demand: vec![0.0; 3],
            time: -2.0,
        };
        let p = price_cluster(
            &inst,
            &ExactRates::new(&inst),
            Cluster::full(2),
            &duals,
            Objective::Energy,
        );
        assert_eq!(p.column.served(), &[0, 2]);
        assert_eq!(p.omega, 0.0);
        assert!((p.reduced_cost - (12.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn argmax_of_weighted_rates() {
        // one cell, SINR 1 and 3 -> rates 1 and 2; duals 3 and 2.5 -> products 3 and 5
        let inst = instance(
            vec![vec![0, 1]],
            vec![vec![1.0], vec![3.0]],
            vec![1.0; 2],
            1.0,
        );
        let duals = Duals {
            demand: vec![3.0, 2.5],
            time: 0.0,
        };
        let p = price_cluster(
            &inst,
            &ExactRates::new(&inst),
            Cluster::singleton(0),
            &duals,
            Objective::Energy,
        );
        assert_eq!(p.column.served(), &[1]);
        assert!((p.omega - 5.0).abs() < 1e-12);
        assert!(
            (p.reduced_cost - reduced_cost(&p.column, &duals, Objective::Energy)).abs() < 1e-12
        );
    }

    #[test]
    fn single_cell_network() {
        let inst = instance(
            vec![vec![0, 1]],
            vec![vec![1.0], vec![3.0]],
            vec![1.0; 2],
            1.0,
        );
        let duals = Duals {
            demand: vec![7.0, 1.0],
            time: -1.0,
        };
        let exact = ExactRates::new(&inst);
        let all = price_all(
            &inst,
            &exact,
            &duals,
            Objective::Energy,
            DEFAULT_EXACT_LIMIT,
        )
        .unwrap();
        let one = price_cluster(
            &inst,
            &exact,
            Cluster::singleton(0),
            &duals,
            Objective::Energy,
        );
        assert_eq!(all, one);
    }

    #[test]
    fn independent_cells_prefer_singletons() {
        // Zero cross gains: the pair offers the same rates as the two
        // singletons, so per unit of power neither beats the other; with
        // equal duals on both users every cluster has the same ratio and the
        // lowest mask wins ties.
        let inst = instance(
            vec![vec![0], vec![1]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![1.0; 2],
            1.0,
        );
        let exact = ExactRates::new(&inst);
        let duals = Duals {
            demand: vec![8.0, 8.0],
            time: 0.0,
        };
        let rc: Vec<f64> = (1..4u64)
            .map(|b| {
                price_cluster(
                    &inst,
                    &exact,
                    Cluster::from_bits(b).unwrap(),
                    &duals,
                    Objective::Energy,
                )
                .reduced_cost
            })
            .collect();
        // singletons: 6 - 8 = -2 each; pair: 12 - 16 = -4 = sum of the singletons
        assert!((rc[0] + 2.0).abs() < 1e-12 && (rc[1] + 2.0).abs() < 1e-12);
        assert!((rc[2] - (rc[0] + rc[1])).abs() < 1e-12);
        let best = price_all(&inst, &exact, &duals, Objective::Energy, 20).unwrap();
        assert_eq!(best.column.cluster().bits(), 3);
    }

    #[test]
    fn limit_is_enforced() {
        let inst = instance(
            vec![vec![0], vec![1]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![1.0; 2],
            1.0,
        );
        let duals = Duals::zero(2);
        let err = price_all(&inst, &ExactRates::new(&inst), &duals, Objective::Energy, 1);
        assert!(matches!(
            err,
            Err(Error::TooManyCells { cells: 2, limit: 1 })
        ));
    }
}
