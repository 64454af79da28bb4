use serde::{Deserialize, Serialize};

use super::cluster::Cluster;
use super::column::Column;
use super::instance::NetworkInstance;
use super::{ExactRates, RateModel, FEASIBILITY_TOL};
use crate::error::ModelError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledColumn {
    pub column: Column,
    /// Activation time, seconds.
    pub duration: f64,
}

/// Activations of columns with their durations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    entries: Vec<ScheduledColumn>,
    total_energy: f64,
}

impl Schedule {
    pub fn new(entries: Vec<ScheduledColumn>) -> Self {
        let total_energy = entries.iter().map(|e| e.column.power() * e.duration).sum();
        Schedule {
            entries,
            total_energy,
        }
    }

    pub fn entries(&self) -> &[ScheduledColumn] {
        &self.entries
    }

    /// Joules.
    pub fn total_energy(&self) -> f64 {
        self.total_energy
    }

    pub fn total_duration(&self) -> f64 {
        self.entries.iter().map(|e| e.duration).sum()
    }

    /// Columns with strictly positive activation time.
    pub fn active_count(&self) -> usize {
        self.entries.iter().filter(|e| e.duration > 0.0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Outcome of [`validate_schedule`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    /// Bits delivered to each user under exact rates.
    pub served_bits: Vec<f64>,
    /// `served_bits - demand` per user; negative means unmet.
    pub slack: Vec<f64>,
    pub total_time: f64,
    pub total_energy: f64,
    pub demand_met: bool,
    pub time_met: bool,
    /// Entries whose cached rates claim more than the exact vertex rate.
    pub overstated: Vec<usize>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.demand_met && self.time_met
    }

    pub fn worst_slack(&self) -> f64 {
        self.slack.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Checks a schedule against the exact interference model: every served
/// rate is recomputed from the exact coupling coefficients of its cluster,
/// demands must be met and the total duration must fit in the deadline, both
/// up to [`FEASIBILITY_TOL`].
pub fn validate_schedule(inst: &NetworkInstance, sched: &Schedule) -> FeasibilityReport {
    let exact = ExactRates::new(inst);
    let mut served_bits = vec![0.0; inst.user_count()];
    let mut overstated = Vec::new();
    let mut total_time = 0.0;
    for (n, e) in sched.entries().iter().enumerate() {
        total_time += e.duration;
        let s = e.column.cluster();
        let mut over = false;
        for (i, j) in e.column.assignments() {
            let r = exact.rate(s, i, j);
            if e.column.rate(j) > r * (1.0 + 1e-9) {
                over = true;
            }
            served_bits[j] += r * e.duration;
        }
        if over {
            overstated.push(n);
        }
    }
    let slack: Vec<f64> = served_bits
        .iter()
        .zip(inst.demands())
        .map(|(s, d)| s - d)
        .collect();
    let demand_met = slack.iter().all(|&s| s >= -FEASIBILITY_TOL);
    let time_met = total_time <= inst.deadline() + FEASIBILITY_TOL;
    FeasibilityReport {
        served_bits,
        slack,
        total_time,
        total_energy: sched.total_energy(),
        demand_met,
        time_met,
        overstated,
    }
}

/// A single activation of a cluster with an arbitrary (not necessarily
/// vertex) rate vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Activation {
    pub cluster: Cluster,
    pub rate: Vec<f64>,
    pub duration: f64,
}

/// Merges activations of one cluster into a single activation whose rate is
/// the duration-weighted average of the column rates. Served bits are
/// unchanged.
pub fn aggregate_columns(entries: &[ScheduledColumn]) -> Result<Activation, ModelError> {
    let first = entries.first().ok_or(ModelError::ZeroDuration)?;
    let cluster = first.column.cluster();
    if entries.iter().any(|e| e.column.cluster() != cluster) {
        return Err(ModelError::MixedClusters);
    }
    let duration: f64 = entries.iter().map(|e| e.duration).sum();
    if duration.is_nan() || duration <= 0.0 {
        return Err(ModelError::ZeroDuration);
    }
    let users = entries
        .iter()
        .map(|e| e.column.rates().len())
        .max()
        .unwrap_or(0);
    let mut rate = vec![0.0; users];
    for e in entries {
        for (r, &c) in rate.iter_mut().zip(e.column.rates()) {
            *r += c * e.duration;
        }
    }
    rate.iter_mut().for_each(|r| *r /= duration);
    Ok(Activation {
        cluster,
        rate,
        duration,
    })
}
