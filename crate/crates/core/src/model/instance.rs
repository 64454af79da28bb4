use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cluster::{Cluster, MAX_CELLS};
use crate::error::{ModelError, Result};

/// Format tag written into every instance file.
pub const INSTANCE_FORMAT: &str = "cellsched-instance/1";

/// Raw instance fields, as stored on disk.
///
/// Gains are a dense `J x I` matrix in linear scale: `gain[j][k]` is the
/// power gain from cell `k`'s transmitter to user `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceData {
    pub cell_count: usize,
    pub users_of_cell: Vec<Vec<usize>>,
    pub gain: Vec<Vec<f64>>,
    pub tx_power_per_ru: Vec<f64>,
    pub circuit_power: f64,
    pub ru_count: u32,
    pub ru_bandwidth: f64,
    pub noise: f64,
    pub load: Vec<f64>,
    pub demand: Vec<f64>,
    pub deadline: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<InstanceMeta>,
}

/// Provenance recorded by the generator. Not needed to solve an instance,
/// but the "neighbor" scope policy reads the cell positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub layout: String,
    pub seed: u64,
    pub cell_radius_m: f64,
    pub cell_positions: Vec<[f64; 2]>,
    pub user_positions: Vec<[f64; 2]>,
    pub carrier_mhz: f64,
    pub bs_height_m: f64,
    pub ue_height_m: f64,
    pub env_correction_db: f64,
    pub shadowing_db: f64,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    format: String,
    #[serde(flatten)]
    data: InstanceData,
}

/// A validated problem instance: cells, their users, channel gains,
/// power model, loads, demands and the deadline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct NetworkInstance {
    data: InstanceData,
    cell_of_user: Vec<usize>,
    total_power: Vec<f64>,
}

impl NetworkInstance {
    pub fn new(data: InstanceData) -> Result<Self, ModelError> {
        let bad = |m: String| Err(ModelError::InvalidInstance(m));
        let n = data.cell_count;
        if n == 0 || n > MAX_CELLS {
            return bad(format!("cell count {n} outside 1..={MAX_CELLS}"));
        }
        if data.users_of_cell.len() != n || data.tx_power_per_ru.len() != n || data.load.len() != n
        {
            return bad("per-cell arrays must have one entry per cell".into());
        }
        let users: usize = data.users_of_cell.iter().map(Vec::len).sum();
        if data.demand.len() != users || data.gain.len() != users {
            return bad(format!("expected {users} users in demand and gain arrays"));
        }
        let mut cell_of_user = vec![usize::MAX; users];
        for (i, us) in data.users_of_cell.iter().enumerate() {
            if us.is_empty() {
                return bad(format!("cell {i} has no users"));
            }
            for &j in us {
                if j >= users {
                    return bad(format!("user id {j} out of range"));
                }
                if cell_of_user[j] != usize::MAX {
                    return bad(format!("user {j} assigned to more than one cell"));
                }
                cell_of_user[j] = i;
            }
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(data.circuit_power) || !positive(data.noise) || !positive(data.deadline) {
            return bad("circuit power, noise and deadline must be positive".into());
        }
        if data.ru_count == 0 || !positive(data.ru_bandwidth) {
            return bad("RU count and bandwidth must be positive".into());
        }
        if !data.tx_power_per_ru.iter().all(|&p| positive(p)) {
            return bad("transmit powers must be positive".into());
        }
        if !data.load.iter().all(|&l| positive(l) && l <= 1.0) {
            return bad("loads must lie in (0, 1]".into());
        }
        if !data.demand.iter().all(|&d| positive(d)) {
            return bad("demands must be positive".into());
        }
        for (j, row) in data.gain.iter().enumerate() {
            if row.len() != n {
                return bad(format!("gain row {j} must have {n} entries"));
            }
            if !row.iter().all(|g| g.is_finite() && *g >= 0.0) {
                return bad(format!("gain row {j} has negative or non-finite entries"));
            }
            if row[cell_of_user[j]] <= 0.0 {
                return bad(format!("user {j} has zero gain from its serving cell"));
            }
        }
        let w = data.ru_count as f64;
        let total_power = (0..n)
            .map(|i| data.circuit_power + data.load[i] * w * data.tx_power_per_ru[i])
            .collect();
        Ok(NetworkInstance {
            data,
            cell_of_user,
            total_power,
        })
    }

    pub fn data(&self) -> &InstanceData {
        &self.data
    }

    pub fn into_data(self) -> InstanceData {
        self.data
    }

    pub fn cell_count(&self) -> usize {
        self.data.cell_count
    }

    pub fn user_count(&self) -> usize {
        self.cell_of_user.len()
    }

    pub fn users_of(&self, cell: usize) -> &[usize] {
        &self.data.users_of_cell[cell]
    }

    pub fn cell_of(&self, user: usize) -> usize {
        self.cell_of_user[user]
    }

    /// Power gain from cell `cell`'s transmitter to `user`.
    #[inline]
    pub fn gain(&self, cell: usize, user: usize) -> f64 {
        self.data.gain[user][cell]
    }

    pub fn tx_power(&self, cell: usize) -> f64 {
        self.data.tx_power_per_ru[cell]
    }

    pub fn load(&self, cell: usize) -> f64 {
        self.data.load[cell]
    }

    pub fn demand(&self, user: usize) -> f64 {
        self.data.demand[user]
    }

    pub fn demands(&self) -> &[f64] {
        &self.data.demand
    }

    pub fn deadline(&self) -> f64 {
        self.data.deadline
    }

    pub fn noise(&self) -> f64 {
        self.data.noise
    }

    pub fn metadata(&self) -> Option<&InstanceMeta> {
        self.data.metadata.as_ref()
    }

    /// `W * B`: bits per second carried by a fully loaded cell at unit
    /// spectral efficiency.
    pub fn capacity_scale(&self) -> f64 {
        self.data.ru_count as f64 * self.data.ru_bandwidth
    }

    /// Power of an active cell, `p0 + l_i W p_i`.
    #[inline]
    pub fn cell_power(&self, cell: usize) -> f64 {
        self.total_power[cell]
    }

    /// Interference that active cell `k` adds at `user`: `p_k g_kj l_k`.
    #[inline]
    pub fn interference_from(&self, k: usize, user: usize) -> f64 {
        self.data.tx_power_per_ru[k] * self.gain(k, user) * self.data.load[k]
    }

    /// Interference at `user` (served by `cell`) from every other member of `s`.
    pub fn cluster_interference(&self, s: Cluster, cell: usize, user: usize) -> f64 {
        s.cells()
            .filter(|&k| k != cell)
            .map(|k| self.interference_from(k, user))
            .sum()
    }

    /// `1 / log2(1 + SINR)` for `user` of `cell` under the given interference.
    #[inline]
    pub fn coefficient_under(&self, cell: usize, user: usize, interference: f64) -> f64 {
        let sinr = self.tx_power(cell) * self.gain(cell, user) / (interference + self.data.noise);
        1.0 / sinr.ln_1p() * std::f64::consts::LN_2
    }

    /// Same instance with a different deadline.
    pub fn with_deadline(&self, deadline: f64) -> Result<Self, ModelError> {
        let mut data = self.data.clone();
        data.deadline = deadline;
        NetworkInstance::new(data)
    }

    /// Same instance with every demand multiplied by `factor`.
    pub fn with_scaled_demand(&self, factor: f64) -> Result<Self, ModelError> {
        let mut data = self.data.clone();
        data.demand.iter_mut().for_each(|d| *d *= factor);
        NetworkInstance::new(data)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

impl TryFrom<InstanceFile> for NetworkInstance {
    type Error = ModelError;
    fn try_from(file: InstanceFile) -> Result<Self, ModelError> {
        if file.format != INSTANCE_FORMAT {
            return Err(ModelError::Format(file.format));
        }
        NetworkInstance::new(file.data)
    }
}

impl From<NetworkInstance> for InstanceFile {
    fn from(inst: NetworkInstance) -> Self {
        InstanceFile {
            format: INSTANCE_FORMAT.to_string(),
            data: inst.data,
        }
    }
}
