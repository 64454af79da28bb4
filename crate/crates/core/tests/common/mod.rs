#![allow(dead_code)]

use cellsched::model::{InstanceData, NetworkInstance};
use proptest::prelude::*;

/// Random instance with `cells` cells and 1..=`max_users` users per cell.
/// Gains are drawn on a log scale with serving links stronger on average.
pub fn arb_instance(
    cells: std::ops::RangeInclusive<usize>,
    max_users: usize,
) -> impl Strategy<Value = NetworkInstance> {
    cells
        .prop_flat_map(move |n| (Just(n), prop::collection::vec(1..=max_users, n)))
        .prop_flat_map(|(n, users)| {
            let total: usize = users.iter().sum();
            (
                Just(n),
                Just(users),
                prop::collection::vec(prop::collection::vec(-2.0f64..0.5, n), total),
                prop::collection::vec(0.0f64..1.5, total),
                prop::collection::vec(0.5f64..2.0, total),
                prop::collection::vec(0.5f64..2.0, n),
                prop::collection::vec(0.5f64..1.0, n),
                0.5f64..5.0,
            )
        })
        .prop_map(|(n, users, cross, own, demand, power, load, circuit)| {
            let mut users_of_cell = Vec::with_capacity(n);
            let mut gain = Vec::with_capacity(demand.len());
            let mut j = 0;
            for (i, &count) in users.iter().enumerate() {
                users_of_cell.push((j..j + count).collect());
                for _ in 0..count {
                    let mut row: Vec<f64> = cross[j].iter().map(|e| 10f64.powf(*e)).collect();
                    row[i] = 10f64.powf(own[j]);
                    gain.push(row);
                    j += 1;
                }
            }
            NetworkInstance::new(InstanceData {
                cell_count: n,
                users_of_cell,
                gain,
                tx_power_per_ru: power,
                circuit_power: circuit,
                ru_count: 2,
                ru_bandwidth: 1.0,
                noise: 0.5,
                load,
                demand,
                deadline: 1.0,
                metadata: None,
            })
            .unwrap()
        })
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}
