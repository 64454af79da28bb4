use serde::{Deserialize, Serialize};

use super::cluster::Cluster;
use super::instance::NetworkInstance;
use super::{cluster_power, RateModel};
use crate::error::ModelError;

/// Identity of a column: its cluster plus the user served in each member
/// cell. Two columns with the same key carry the same rate vector under a
/// given rate model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnKey {
    pub cluster: u64,
    pub served: Vec<usize>,
}

/// A cluster together with one vertex of its rate region: exactly one
/// served user per member cell, every other user at zero rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    cluster: Cluster,
    /// Served user of each member cell, in increasing cell order.
    served: Vec<usize>,
    /// Dense rate vector over all users, bits per second.
    rate: Vec<f64>,
    power: f64,
}

impl Column {
    /// Builds the vertex column serving `served[n]` in the `n`-th member
    /// cell (increasing cell order), with rates taken from `model`.
    pub fn vertex<R: RateModel + ?Sized>(
        inst: &NetworkInstance,
        model: &R,
        cluster: Cluster,
        served: Vec<usize>,
    ) -> Result<Self, ModelError> {
        if served.len() != cluster.len() {
            return Err(ModelError::InvalidInstance(format!(
                "cluster {cluster} needs {} served users, got {}",
                cluster.len(),
                served.len()
            )));
        }
        let mut rate = vec![0.0; inst.user_count()];
        for (i, &j) in cluster.cells().zip(&served) {
            if i >= inst.cell_count() {
                return Err(ModelError::CellOutOfRange {
                    cell: i,
                    cells: inst.cell_count(),
                });
            }
            if j >= inst.user_count() || inst.cell_of(j) != i {
                return Err(ModelError::UserNotInCell { user: j, cell: i });
            }
            rate[j] = model.rate(cluster, i, j);
        }
        Ok(Column {
            cluster,
            served,
            rate,
            power: cluster_power(inst, cluster),
        })
    }

    /// Assembles a column from precomputed parts. Callers guarantee the
    /// vertex structure; used by the pricing routines on their hot path.
    pub(crate) fn from_parts(
        cluster: Cluster,
        served: Vec<usize>,
        rate: Vec<f64>,
        power: f64,
    ) -> Self {
        debug_assert_eq!(served.len(), cluster.len());
        Column {
            cluster,
            served,
            rate,
            power,
        }
    }

    pub fn cluster(&self) -> Cluster {
        self.cluster
    }

    pub fn served(&self) -> &[usize] {
        &self.served
    }

    /// `(cell, served user)` pairs in increasing cell order.
    pub fn assignments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cluster.cells().zip(self.served.iter().copied())
    }

    pub fn rate(&self, user: usize) -> f64 {
        self.rate.get(user).copied().unwrap_or(0.0)
    }

    pub fn rates(&self) -> &[f64] {
        &self.rate
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn key(&self) -> ColumnKey {
        ColumnKey {
            cluster: self.cluster.bits(),
            served: self.served.clone(),
        }
    }

    /// Same column with rates recomputed under another model.
    pub fn rerated<R: RateModel + ?Sized>(&self, inst: &NetworkInstance, model: &R) -> Self {
        let mut rate = vec![0.0; inst.user_count()];
        for (i, j) in self.assignments() {
            rate[j] = model.rate(self.cluster, i, j);
        }
        Column {
            cluster: self.cluster,
            served: self.served.clone(),
            rate,
            power: self.power,
        }
    }

    /// Pads the rate vector with zeros up to `user_count` users, so a column
    /// built for an older user population can seed a larger instance.
    pub fn extended(&self, user_count: usize) -> Self {
        let mut c = self.clone();
        if c.rate.len() < user_count {
            c.rate.resize(user_count, 0.0);
        }
        c
    }
}
