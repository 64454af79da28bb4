//! Problem representation: instances, clusters, columns and schedules, and
//! the load-coupled rate arithmetic they share.
//!
//! For a cluster `s` and member cell `i`, user `j` of cell `i` has coupling
//! coefficient
//!
//! ```text
//! b_ij^s = 1 / log2(1 + p_i g_ij / (sum_{k in s, k != i} p_k g_kj l_k + eta))
//! ```
//!
//! and the rate region of cell `i` is the simplex `sum_j b_ij^s r_j = l_i W B`.
//! Its vertices serve a single user at `l_i W B / b_ij^s`.

mod cluster;
mod column;
mod instance;
mod schedule;

pub use cluster::{Cells, Cluster, MAX_CELLS};
pub use column::{Column, ColumnKey};
pub use instance::{InstanceData, InstanceMeta, NetworkInstance, INSTANCE_FORMAT};
pub use schedule::{
    aggregate_columns, validate_schedule, Activation, FeasibilityReport, Schedule, ScheduledColumn,
};

use crate::error::ModelError;

/// Absolute slack allowed on demand and deadline checks.
pub const FEASIBILITY_TOL: f64 = 1e-6;

fn check_member(inst: &NetworkInstance, s: Cluster, i: usize, j: usize) -> Result<(), ModelError> {
    if i >= inst.cell_count() {
        return Err(ModelError::CellOutOfRange {
            cell: i,
            cells: inst.cell_count(),
        });
    }
    if !s.contains(i) {
        return Err(ModelError::CellNotInCluster {
            cell: i,
            cluster: s.bits(),
        });
    }
    if s.span() > inst.cell_count() {
        return Err(ModelError::CellOutOfRange {
            cell: s.span() - 1,
            cells: inst.cell_count(),
        });
    }
    if j >= inst.user_count() || inst.cell_of(j) != i {
        return Err(ModelError::UserNotInCell { user: j, cell: i });
    }
    Ok(())
}

/// Coupling coefficient `b_ij^s` of user `j` in member cell `i` of `s`.
pub fn coupling_coeff(
    inst: &NetworkInstance,
    s: Cluster,
    i: usize,
    j: usize,
) -> Result<f64, ModelError> {
    check_member(inst, s, i, j)?;
    Ok(inst.coefficient_under(i, j, inst.cluster_interference(s, i, j)))
}

/// Sum of `p0 + l_i W p_i` over the members of `s`.
pub fn cluster_power(inst: &NetworkInstance, s: Cluster) -> f64 {
    s.cells().map(|i| inst.cell_power(i)).sum()
}

/// Vertex rate `l_i W B / b_ij^s` in bits per second.
pub fn vertex_rate(
    inst: &NetworkInstance,
    s: Cluster,
    i: usize,
    j: usize,
) -> Result<f64, ModelError> {
    Ok(inst.load(i) * inst.capacity_scale() / coupling_coeff(inst, s, i, j)?)
}

/// Source of vertex rates for columns. The exact model evaluates the true
/// coupling coefficients; the local-enumeration models substitute scenario
/// coefficients.
pub trait RateModel: Sync {
    /// Rate of user `j` of member cell `i` when `s` is active and `j` is the
    /// only user served by `i`.
    fn rate(&self, s: Cluster, i: usize, j: usize) -> f64;
}

/// Rates from the exact coupling coefficients.
#[derive(Clone, Copy)]
pub struct ExactRates<'a> {
    inst: &'a NetworkInstance,
}

impl<'a> ExactRates<'a> {
    pub fn new(inst: &'a NetworkInstance) -> Self {
        ExactRates { inst }
    }
}

impl RateModel for ExactRates<'_> {
    #[inline]
    fn rate(&self, s: Cluster, i: usize, j: usize) -> f64 {
        let inst = self.inst;
        let b = inst.coefficient_under(i, j, inst.cluster_interference(s, i, j));
        inst.load(i) * inst.capacity_scale() / b
    }
}


#[cfg(test)]
mod tests {
    use super::testing::instance;
    use super::*;
    use proptest::prelude::*;

    fn two_cell() -> NetworkInstance {
        // users 0,1 in cell 0; user 2 in cell 1
        instance(
            vec![vec![0, 1], vec![2]],
            vec![vec![1.0, 1.0], vec![2.0, 0.5], vec![0.3, 1.5]],
            vec![1.0, 1.0, 1.0],
            10.0,
        )
    }

    #[test]
    fn singleton_unit_coefficient() {
        let inst = two_cell();
        let b = coupling_coeff(&inst, Cluster::singleton(0), 0, 0).unwrap();
        assert!((b - 1.0).abs() < 1e-15);
        let r = vertex_rate(&inst, Cluster::singleton(0), 0, 0).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_cell_coefficient() {
        // SINR = 1 / (1*1*1 + 1) = 0.5, b = 1/log2(1.5)
        let inst = two_cell();
        let s = Cluster::full(2);
        let b = coupling_coeff(&inst, s, 0, 0).unwrap();
        assert!((b - 1.709_511_291_351_455).abs() < 1e-12, "{b}");
        let r = vertex_rate(&inst, s, 0, 0).unwrap();
        assert!((r - 0.584_962_500_721_156_2).abs() < 1e-12, "{r}");
    }

    #[test]
    fn zero_cross_gain_matches_singleton() {
        let inst = instance(
            vec![vec![0], vec![1]],
            vec![vec![2.0, 0.0], vec![0.0, 3.0]],
            vec![1.0, 1.0],
            1.0,
        );
        for i in 0..2 {
            let alone = coupling_coeff(&inst, Cluster::singleton(i), i, i).unwrap();
            let both = coupling_coeff(&inst, Cluster::full(2), i, i).unwrap();
            assert_eq!(alone, both);
        }
    }

    #[test]
    fn half_load_halves_rate() {
        let mut data = two_cell().into_data();
        data.load[0] = 0.5;
        let inst = NetworkInstance::new(data).unwrap();
        let r = vertex_rate(&inst, Cluster::singleton(0), 0, 0).unwrap();
        assert!((r - 0.5).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        let inst = two_cell();
        assert_eq!(
            coupling_coeff(&inst, Cluster::singleton(0), 0, 2),
            Err(ModelError::UserNotInCell { user: 2, cell: 0 })
        );
        assert!(matches!(
            coupling_coeff(&inst, Cluster::singleton(1), 0, 0),
            Err(ModelError::CellNotInCluster { .. })
        ));
        assert!(coupling_coeff(&inst, Cluster::singleton(5), 5, 0).is_err());
        assert!(coupling_coeff(&inst, Cluster::from_bits(0b101).unwrap(), 0, 0).is_err());
    }

    fn table_ii_cell(load: f64) -> NetworkInstance {
        NetworkInstance::new(InstanceData {
            cell_count: 7,
            users_of_cell: (0..7).map(|i| vec![i]).collect(),
            gain: (0..7).map(|_| vec![1e-10; 7]).collect(),
            tx_power_per_ru: vec![1.0; 7],
            circuit_power: 5.0,
            ru_count: 25,
            ru_bandwidth: 180e3,
            noise: 1e-15,
            load: vec![load; 7],
            demand: vec![2e6; 7],
            deadline: 1.0,
            metadata: None,
        })
        .unwrap()
    }

    #[test]
    fn cluster_power_values() {
        let inst = table_ii_cell(1.0);
        assert_eq!(cluster_power(&inst, Cluster::singleton(0)), 30.0);
        assert_eq!(cluster_power(&inst, Cluster::full(7)), 210.0);
        let half = table_ii_cell(0.5);
        assert_eq!(cluster_power(&half, Cluster::singleton(3)), 17.5);
    }

    #[test]
    fn instance_validation() {
        let good = two_cell().into_data();
        let mut d = good.clone();
        d.users_of_cell = vec![vec![0, 1, 2], vec![]];
        assert!(NetworkInstance::new(d).is_err());
        let mut d = good.clone();
        d.load[1] = 1.5;
        assert!(NetworkInstance::new(d).is_err());
        let mut d = good.clone();
        d.gain[2][1] = 0.0;
        assert!(NetworkInstance::new(d).is_err());
        let mut d = good.clone();
        d.demand[0] = 0.0;
        assert!(NetworkInstance::new(d).is_err());
        let mut d = good;
        d.users_of_cell = vec![vec![0, 1], vec![1]];
        assert!(NetworkInstance::new(d).is_err());
    }

    #[test]
    fn instance_file_roundtrip() {
        let inst = two_cell();
        let text = inst.to_json().unwrap();
        assert!(text.contains("\"format\": \"cellsched-instance/1\""));
        assert_eq!(NetworkInstance::from_json(&text).unwrap(), inst);
        let wrong = text.replace("cellsched-instance/1", "cellsched-instance/9");
        assert!(NetworkInstance::from_json(&wrong).is_err());
    }

    #[test]
    fn empty_schedule_is_infeasible() {
        let inst = two_cell();
        let rep = validate_schedule(&inst, &Schedule::default());
        assert!(!rep.demand_met);
        assert!(rep.time_met);
        assert!(rep.slack.iter().all(|&s| s == -1.0));
    }

    #[test]
    fn validation_uses_exact_rates() {
        let inst = two_cell();
        let exact = ExactRates::new(&inst);
        let col = Column::vertex(&inst, &exact, Cluster::full(2), vec![0, 2]).unwrap();
        let r0 = col.rate(0);
        let sched = Schedule::new(vec![ScheduledColumn {
            column: col,
            duration: 1.0 / r0,
        }]);
        let rep = validate_schedule(&inst, &sched);
        assert!(rep.slack[0].abs() < 1e-12);
        assert!(rep.slack[1] < -0.99);
        assert!(rep.overstated.is_empty());
        // two cells at p0 + l W p = 6 W each
        assert!((rep.total_energy - 12.0 / r0).abs() < 1e-12);
    }

    #[test]
    fn aggregate_identity_and_symmetry() {
        let inst = instance(
            vec![vec![0, 1]],
            vec![vec![1.0], vec![3.0]],
            vec![1.0, 1.0],
            5.0,
        );
        let exact = ExactRates::new(&inst);
        let s = Cluster::singleton(0);
        let a = Column::vertex(&inst, &exact, s, vec![0]).unwrap();
        let b = Column::vertex(&inst, &exact, s, vec![1]).unwrap();
        let one = aggregate_columns(&[ScheduledColumn {
            column: a.clone(),
            duration: 2.0,
        }])
        .unwrap();
        assert_eq!(one.duration, 2.0);
        assert_eq!(one.rate, a.rates());
        let both = aggregate_columns(&[
            ScheduledColumn {
                column: a.clone(),
                duration: 1.0,
            },
            ScheduledColumn {
                column: b.clone(),
                duration: 1.0,
            },
        ])
        .unwrap();
        assert_eq!(both.duration, 2.0);
        assert_eq!(both.rate, vec![a.rate(0) / 2.0, b.rate(1) / 2.0]);
    }

    #[test]
    fn aggregate_rejects_mixed_clusters() {
        let inst = two_cell();
        let exact = ExactRates::new(&inst);
        let a = Column::vertex(&inst, &exact, Cluster::singleton(0), vec![0]).unwrap();
        let b = Column::vertex(&inst, &exact, Cluster::singleton(1), vec![2]).unwrap();
        let err = aggregate_columns(&[
            ScheduledColumn {
                column: a,
                duration: 1.0,
            },
            ScheduledColumn {
                column: b,
                duration: 1.0,
            },
        ]);
        assert_eq!(err, Err(ModelError::MixedClusters));
    }

    fn arb_instance() -> impl Strategy<Value = NetworkInstance> {
        (1usize..=4, 1usize..=3).prop_flat_map(|(cells, per)| {
            let users = cells * per;
            (
                prop::collection::vec(prop::collection::vec(0.0f64..2.0, cells), users),
                prop::collection::vec(0.1f64..1.0, cells),
            )
                .prop_map(move |(mut gain, load)| {
                    for (j, row) in gain.iter_mut().enumerate() {
                        row[j / per] += 0.5;
                    }
                    let mut data = instance(
                        (0..cells)
                            .map(|i| (i * per..(i + 1) * per).collect())
                            .collect(),
                        gain,
                        vec![1.0; users],
                        1.0,
                    )
                    .into_data();
                    data.load = load;
                    NetworkInstance::new(data).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn coefficient_monotone_in_membership(inst in arb_instance(), a in 1u64..16, b in 1u64..16) {
            let n = inst.cell_count();
            let mask = (1u64 << n) - 1;
            let small = a & mask;
            prop_assume!(small != 0);
            let big = Cluster::from_bits(small | (b & mask)).unwrap();
            let small = Cluster::from_bits(small).unwrap();
            for i in small.cells() {
                for &j in inst.users_of(i) {
                    let bs = coupling_coeff(&inst, small, i, j).unwrap();
                    let bb = coupling_coeff(&inst, big, i, j).unwrap();
                    prop_assert!(bs <= bb);
                    let alone = vertex_rate(&inst, Cluster::singleton(i), i, j).unwrap();
                    prop_assert!(alone >= vertex_rate(&inst, big, i, j).unwrap());
                }
            }
        }

        #[test]
        fn vertex_columns_lie_on_rate_simplex(inst in arb_instance(), bits in 1u64..16, pick in 0usize..3) {
            let mask = (1u64 << inst.cell_count()) - 1;
            prop_assume!(bits & mask != 0);
            let s = Cluster::from_bits(bits & mask).unwrap();
            let served: Vec<usize> = s.cells().map(|i| {
                let us = inst.users_of(i);
                us[pick % us.len()]
            }).collect();
            let col = Column::vertex(&inst, &ExactRates::new(&inst), s, served).unwrap();
            for i in s.cells() {
                let lhs: f64 = inst.users_of(i).iter()
                    .map(|&j| coupling_coeff(&inst, s, i, j).unwrap() * col.rate(j))
                    .sum();
                let rhs = inst.load(i) * inst.capacity_scale();
                prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs);
            }
            prop_assert!((col.power() - cluster_power(&inst, s)).abs() < 1e-12);
        }

        #[test]
        fn aggregation_preserves_served_bits(
            inst in arb_instance(),
            picks in prop::collection::vec((0usize..3, 0.01f64..5.0), 1..6),
        ) {
            let s = Cluster::full(inst.cell_count());
            let exact = ExactRates::new(&inst);
            let entries: Vec<ScheduledColumn> = picks.iter().map(|&(p, d)| {
                let served = s.cells().map(|i| inst.users_of(i)[p % inst.users_of(i).len()]).collect();
                ScheduledColumn { column: Column::vertex(&inst, &exact, s, served).unwrap(), duration: d }
            }).collect();
            let agg = aggregate_columns(&entries).unwrap();
            for j in 0..inst.user_count() {
                let direct: f64 = entries.iter().map(|e| e.column.rate(j) * e.duration).sum();
                let merged = agg.rate[j] * agg.duration;
                prop_assert!((direct - merged).abs() <= 1e-12 * direct.abs().max(1e-300));
            }
        }
    }
}
