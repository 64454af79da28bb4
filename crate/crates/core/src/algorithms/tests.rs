use proptest::prelude::*;

use super::*;
use crate::model::testing::instance;
use crate::model::{validate_schedule, Cluster, InstanceData};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn small(cells: usize, users: usize, gains: &[f64], deadline: f64) -> NetworkInstance {
    let mut it = gains.iter().cycle();
    let mut users_of_cell = Vec::new();
    let mut gain = Vec::new();
    for i in 0..cells {
        users_of_cell.push((i * users..(i + 1) * users).collect());
        for _ in 0..users {
            gain.push(
                (0..cells)
                    .map(|k| {
                        if k == i {
                            8.0 * it.next().unwrap()
                        } else {
                            *it.next().unwrap()
                        }
                    })
                    .collect(),
            );
        }
    }
    instance(users_of_cell, gain, vec![1.0; cells * users], deadline)
}

/// Three one-user cells: 0 and 2 jam each other, 1 is isolated. Pairs with
/// cell 1 are free of interference; the full cluster is very slow.
fn jammed_ends(deadline: f64) -> NetworkInstance {
    instance(
        vec![vec![0], vec![1], vec![2]],
        vec![
            vec![15.0, 0.0, 150.0],
            vec![0.0, 15.0, 0.0],
            vec![150.0, 0.0, 15.0],
        ],
        vec![1.0; 3],
        deadline,
    )
}

#[test]
fn one_user_ocs_equals_tdma() {
    let inst = instance(vec![vec![0]], vec![vec![3.0]], vec![1.0], 10.0);
    let o = ocs(&inst, &SolveOptions::default()).unwrap();
    let t = tdma(&inst);
    assert_eq!(o.termination, Termination::Converged);
    // rate log2(4) = 2, power 6
    assert!(rel(o.energy, 3.0) < 1e-12);
    assert!(rel(o.energy, t.energy) < 1e-12);
}

#[test]
fn tdma_unit_times() {
    let inst = instance(
        vec![vec![0, 1]],
        vec![vec![1.0], vec![1.0]],
        vec![1.0; 2],
        2.0,
    );
    assert_eq!(tdma_times(&inst), vec![1.0, 1.0]);
    let t = tdma(&inst);
    assert!(t.feasible);
    assert!(rel(t.energy, 12.0) < 1e-15);
    let doubled = tdma(&inst.with_scaled_demand(2.0).unwrap());
    assert!(!doubled.feasible);
    assert!(rel(doubled.energy, 24.0) < 1e-15);
    assert_eq!(doubled.termination, Termination::Infeasible);
}

#[test]
fn single_cell_all_on_is_ocs() {
    let inst = instance(
        vec![vec![0, 1]],
        vec![vec![1.0], vec![3.0]],
        vec![2.0, 1.0],
        5.0,
    );
    let a = all_on(&inst, &SolveOptions::default()).unwrap();
    let o = ocs(&inst, &SolveOptions::default()).unwrap();
    assert!(rel(a.energy, o.energy) < 1e-12);
}

#[test]
fn staircase_meets_demand_in_completion_time() {
    let inst = small(3, 3, &[0.9, 0.2, 0.45, 0.7, 0.1, 0.33], 100.0);
    let cols = staircase_columns(&inst, &ExactRates::new(&inst));
    assert!(cols.len() <= inst.user_count());
    let mk = master::solve(&inst, &cols, Objective::Makespan)
        .unwrap()
        .optimal()
        .unwrap();
    assert!(rel(mk.objective, all_on_completion_time(&inst)) < 1e-9);
}

#[test]
fn all_on_energy_is_full_power_times_completion() {
    let inst = small(3, 2, &[0.5, 0.1, 0.8, 0.3], 100.0);
    let t = all_on_completion_time(&inst);
    let p = crate::model::cluster_power(&inst, Cluster::full(3));
    let mut energies = Vec::new();
    for deadline in [t * 1.01, t * 2.0, t * 10.0] {
        let r = all_on(
            &inst.with_deadline(deadline).unwrap(),
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(r.feasible);
        assert!(rel(r.energy, p * t) < 1e-9);
        energies.push(r.energy);
    }
    assert!(energies.windows(2).all(|w| rel(w[0], w[1]) < 1e-9));
    let r = all_on(
        &inst.with_deadline(t * 0.5).unwrap(),
        &SolveOptions::default(),
    )
    .unwrap();
    assert!(!r.feasible);
    assert!(rel(r.energy, p * t) < 1e-9);
}

#[test]
fn infeasible_start_recovers_through_makespan_columns() {
    let inst = jammed_ends(0.6);
    assert!(!tdma(&inst).feasible);
    assert!(!all_on(&inst, &SolveOptions::default()).unwrap().feasible);
    let o = ocs(&inst, &SolveOptions::default()).unwrap();
    assert_eq!(o.termination, Termination::Converged);
    assert!(o.makespan.unwrap() <= 0.6);
    // each user needs 0.25 s at rate 4; the isolated cell pairs for free
    assert!(rel(o.energy, 4.5) < 1e-9);
    assert!(validate_schedule(&inst, &o.schedule).feasible());
}

#[test]
fn too_tight_deadline_is_infeasible() {
    let inst = jammed_ends(0.45);
    let o = ocs(&inst, &SolveOptions::default()).unwrap();
    assert_eq!(o.termination, Termination::Infeasible);
    assert!(!o.feasible && o.energy.is_infinite());
    assert!(rel(o.makespan.unwrap(), 0.5) < 1e-9);
}

#[test]
fn exact_limit_is_checked() {
    let inst = small(3, 1, &[0.5], 10.0);
    let opts = SolveOptions {
        exact_limit: 2,
        ..SolveOptions::default()
    };
    assert!(matches!(ocs(&inst, &opts), Err(Error::TooManyCells { .. })));
}

#[test]
fn iteration_cap_is_reported() {
    let inst = small(3, 2, &[0.9, 0.05, 0.4, 0.2], 100.0);
    let opts = SolveOptions {
        max_iterations: 1,
        ..SolveOptions::default()
    };
    let o = ocs(&inst, &opts).unwrap();
    assert!(matches!(
        o.termination,
        Termination::IterationCap | Termination::Converged
    ));
    assert!(o.iterations <= 1);
}

#[test]
fn zero_cross_gain_all_modes_agree() {
    let inst = instance(
        vec![vec![0, 1], vec![2], vec![3]],
        vec![
            vec![1.0, 0.0, 0.0],
            vec![2.0, 0.0, 0.0],
            vec![0.0, 1.5, 0.0],
            vec![0.0, 0.0, 0.7],
        ],
        vec![1.0; 4],
        50.0,
    );
    let o = ocs(&inst, &SolveOptions::default()).unwrap();
    let b = bound(&inst, &MPolicy::Uniform(1), &SolveOptions::default()).unwrap();
    for e in [b.lower(), b.upper(), b.near.energy] {
        assert!(rel(e, o.energy) < 1e-9);
    }
    assert!(b.gap().unwrap().abs() < 1e-9);
}

#[test]
fn warm_start_with_new_user() {
    let inst = small(2, 1, &[0.6, 0.3], 10.0);
    let first = ocs(&inst, &SolveOptions::default()).unwrap();
    let mut data: InstanceData = inst.into_data();
    data.users_of_cell[1].push(2);
    data.gain.push(vec![0.2, 3.0]);
    data.demand.push(1.0);
    let grown = NetworkInstance::new(data).unwrap();
    let prior: Vec<Column> = first.columns.columns().to_vec();
    let warm = ocs_warm(&grown, &SolveOptions::default(), &prior).unwrap();
    let cold = ocs(&grown, &SolveOptions::default()).unwrap();
    assert!(rel(warm.energy, cold.energy) < 1e-9);
}

#[test]
fn pairs_preset_reaches_same_optimum() {
    let inst = small(3, 2, &[0.9, 0.05, 0.4, 0.2, 0.7], 100.0);
    let a = ocs(&inst, &SolveOptions::default()).unwrap();
    let opts = SolveOptions {
        initial: InitialColumns::Pairs,
        ..SolveOptions::default()
    };
    let b = ocs(&inst, &opts).unwrap();
    assert!(rel(a.energy, b.energy) < 1e-9);
}

#[test]
fn algorithm_names_roundtrip() {
    for a in Algorithm::ALL {
        assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
    }
    assert_eq!("all-on".parse::<Algorithm>().unwrap(), Algorithm::AllOn);
}

fn gains() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tdma_optimal_when_it_fits(g in gains(), cells in 1usize..4, users in 1usize..3, slack in 1.0f64..3.0) {
        let base = small(cells, users, &g, 1.0);
        let total: f64 = tdma_times(&base).iter().sum();
        let inst = base.with_deadline(total * slack).unwrap();
        let o = ocs(&inst, &SolveOptions::default()).unwrap();
        let t = tdma(&inst);
        prop_assert!(t.feasible);
        prop_assert!(rel(o.energy, t.energy) <= 1e-6);
    }

    #[test]
    fn structure_and_ordering(g in gains(), cells in 2usize..5, users in 1usize..3, tight in 0.3f64..1.5, m in 1usize..3) {
        let base = small(cells, users, &g, 1.0);
        let total: f64 = tdma_times(&base).iter().sum();
        let inst = base.with_deadline(total * tight).unwrap();
        let o = ocs(&inst, &SolveOptions::default()).unwrap();
        if o.feasible {
            prop_assert_eq!(o.termination, Termination::Converged);
            prop_assert!(validate_schedule(&inst, &o.schedule).feasible());
            prop_assert!(o.active_columns() <= inst.user_count() + 1);
            prop_assert!(o.min_held_reduced_cost.unwrap() >= -1e-9);
            let a = all_on(&inst, &SolveOptions::default()).unwrap();
            if a.feasible {
                prop_assert!(o.energy <= a.energy * (1.0 + 1e-9));
            }
        }
        let b = bound(&inst, &MPolicy::Uniform(m), &SolveOptions::default()).unwrap();
        if b.le_on.feasible {
            prop_assert!(o.feasible);
            let tol = 1e-7;
            prop_assert!(b.lower() <= o.energy * (1.0 + tol));
            prop_assert!(o.energy <= b.near.energy * (1.0 + tol));
            prop_assert!(b.near.energy <= b.upper() * (1.0 + tol));
            prop_assert!(validate_schedule(&inst, &b.near.schedule).feasible());
        }
        if !b.le_off.feasible {
            prop_assert!(!o.feasible);
        }
    }

    #[test]
    fn full_scope_bounds_are_tight(g in gains(), cells in 2usize..5, users in 1usize..3) {
        let inst = small(cells, users, &g, 1e3);
        let o = ocs(&inst, &SolveOptions::default()).unwrap();
        let b = bound(&inst, &MPolicy::Full, &SolveOptions::default()).unwrap();
        prop_assert!(rel(b.lower(), o.energy) <= 1e-6);
        prop_assert!(rel(b.upper(), o.energy) <= 1e-6);
        prop_assert!(rel(b.near.energy, o.energy) <= 1e-6);
    }

    #[test]
    fn energy_non_increasing_in_deadline(g in gains(), cells in 2usize..4, users in 1usize..3) {
        let base = small(cells, users, &g, 1.0);
        let total: f64 = tdma_times(&base).iter().sum();
        let mut last = f64::INFINITY;
        for f in [0.4, 0.6, 0.8, 1.0, 1.2] {
            let o = ocs(&base.with_deadline(total * f).unwrap(), &SolveOptions::default()).unwrap();
            prop_assert!(o.energy <= last * (1.0 + 1e-9));
            last = o.energy;
        }
    }
}
