//! Local-enumeration interference model and its pricing solver.
//!
//! Every cell `i` tracks the on/off state of a short list `L_i` of its
//! strongest interferers exactly. A scenario `e` is an `M_i`-bit mask whose
//! bit `t` says that `L_i[t]` is active. Cells outside `L_i` are either
//! assumed silent (LE-off, optimistic) or always transmitting (LE-on,
//! pessimistic), which brackets the exact coupling coefficient.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::master::{Duals, Objective};
use crate::model::{Cluster, Column, NetworkInstance, RateModel};
use crate::pricing_exact::Priced;

/// Cap on stored coefficients across all cells and both planes.
const MAX_TABLE_ENTRIES: u128 = 1 << 27;

/// Cells within this factor of the smallest inter-site distance count as
/// one-hop neighbors.
const NEIGHBOR_DISTANCE_FACTOR: f64 = 1.05;

/// How many interferers each cell tracks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MPolicy {
    /// Same `M` for every cell (clipped to `I - 1`).
    Uniform(usize),
    PerCell(Vec<usize>),
    /// `M_i` is the number of adjacent cells in the layout.
    Neighbor,
    /// `M_i = I - 1`: the exact model.
    Full,
}

impl fmt::Display for MPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MPolicy::Uniform(m) => write!(f, "{m}"),
            MPolicy::PerCell(ms) => {
                let parts: Vec<String> = ms.iter().map(|m| m.to_string()).collect();
                write!(f, "[{}]", parts.join(" "))
            }
            MPolicy::Neighbor => f.write_str("neighbor"),
            MPolicy::Full => f.write_str("full"),
        }
    }
}

impl FromStr for MPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "neighbor" | "neighbour" => Ok(MPolicy::Neighbor),
            "full" => Ok(MPolicy::Full),
            t => t
                .parse::<usize>()
                .map(MPolicy::Uniform)
                .map_err(|_| Error::Config(format!("invalid M value `{s}`"))),
        }
    }
}

/// Ranked interferer lists, most interfering first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborSets {
    lists: Vec<Vec<usize>>,
}

impl NeighborSets {
    /// Wraps explicit lists; each must exclude its own cell and repeat no id.
    pub fn from_lists(inst: &NetworkInstance, lists: Vec<Vec<usize>>) -> Result<Self> {
        let n = inst.cell_count();
        if lists.len() != n {
            return Err(Error::Config(format!(
                "expected {n} neighbor lists, got {}",
                lists.len()
            )));
        }
        for (i, l) in lists.iter().enumerate() {
            let mut seen = 0u64;
            for &k in l {
                if k >= n || k == i || seen >> k & 1 == 1 {
                    return Err(Error::Config(format!("bad neighbor {k} for cell {i}")));
                }
                seen |= 1 << k;
            }
        }
        Ok(NeighborSets { lists })
    }

    pub fn of(&self, cell: usize) -> &[usize] {
        &self.lists[cell]
    }

    pub fn cell_count(&self) -> usize {
        self.lists.len()
    }

    /// `true` when every cell tracks all other cells.
    pub fn is_full(&self) -> bool {
        let n = self.lists.len();
        self.lists.iter().all(|l| l.len() + 1 == n)
    }
}

/// Mean interference that cell `k` puts on the users of cell `i`.
fn average_interference(inst: &NetworkInstance, i: usize, k: usize) -> f64 {
    let users = inst.users_of(i);
    if users.is_empty() {
        return 0.0;
    }
    users
        .iter()
        .map(|&j| inst.interference_from(k, j))
        .sum::<f64>()
        / users.len() as f64
}

/// Adjacent-cell counts from the stored cell positions.
pub fn hop_neighbor_counts(inst: &NetworkInstance) -> Result<Vec<usize>> {
    let pos = inst
        .metadata()
        .map(|m| m.cell_positions.as_slice())
        .filter(|p| p.len() == inst.cell_count())
        .ok_or_else(|| Error::Config("the neighbor policy needs cell positions".into()))?;
    let dist = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
    let mut pitch = f64::INFINITY;
    for (a, &pa) in pos.iter().enumerate() {
        for &pb in &pos[a + 1..] {
            pitch = pitch.min(dist(pa, pb));
        }
    }
    Ok((0..pos.len())
        .map(|i| {
            (0..pos.len())
                .filter(|&k| k != i && dist(pos[i], pos[k]) <= NEIGHBOR_DISTANCE_FACTOR * pitch)
                .count()
        })
        .collect())
}

/// Picks `L_i` for every cell: other cells ranked by their average
/// interference on the users of `i` (ties to the lower id), top `M_i` kept.
pub fn select_neighbors(inst: &NetworkInstance, policy: &MPolicy) -> Result<NeighborSets> {
    let n = inst.cell_count();
    let caps: Vec<usize> = match policy {
        MPolicy::Uniform(m) => vec![*m; n],
        MPolicy::PerCell(ms) => {
            if ms.len() != n {
                return Err(Error::Config(format!(
                    "expected {n} per-cell M values, got {}",
                    ms.len()
                )));
            }
            ms.clone()
        }
        MPolicy::Neighbor => hop_neighbor_counts(inst)?,
        MPolicy::Full => vec![n.saturating_sub(1); n],
    };
    let lists = (0..n)
        .map(|i| {
            let mut ranked: Vec<(f64, usize)> = (0..n)
                .filter(|&k| k != i)
                .map(|k| (average_interference(inst, i, k), k))
                .collect();
            ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            ranked.truncate(caps[i].min(n.saturating_sub(1)));
            ranked.into_iter().map(|(_, k)| k).collect()
        })
        .collect();
    Ok(NeighborSets { lists })
}

/// Treatment of cells outside the tracked list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LeMode {
    /// Untracked cells are silent: optimistic rates, lower bound.
    Off,
    /// Untracked cells always transmit: pessimistic rates, upper bound.
    On,
}

impl fmt::Display for LeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LeMode::Off => "le-off",
            LeMode::On => "le-on",
        })
    }
}

#[derive(Debug, Clone)]
struct CellScenarios {
    /// Bit positions of the tracked cells in a cluster mask, in list order.
    tracked: Vec<usize>,
    users: Vec<usize>,
    /// `beta[e * users.len() + u]` for LE-off and LE-on.
    off: Vec<f64>,
    on: Vec<f64>,
}

impl CellScenarios {
    #[inline]
    fn scenario_of(&self, bits: u64) -> usize {
        self.tracked
            .iter()
            .enumerate()
            .fold(0, |e, (t, &k)| e | ((bits >> k & 1) as usize) << t)
    }

    fn plane(&self, mode: LeMode) -> &[f64] {
        match mode {
            LeMode::Off => &self.off,
            LeMode::On => &self.on,
        }
    }
}

/// Scenario coefficients for every cell in both modes.
#[derive(Debug, Clone)]
pub struct ScenarioTable {
    neighbors: NeighborSets,
    cells: Vec<CellScenarios>,
    /// Position of each user within its cell's user list.
    slot: Vec<usize>,
    /// `l_i W B` per cell.
    scale: Vec<f64>,
}

impl ScenarioTable {
    pub fn neighbors(&self) -> &NeighborSets {
        &self.neighbors
    }

    pub fn scenario_count(&self, cell: usize) -> usize {
        1 << self.cells[cell].tracked.len()
    }

    /// Scenario of `cell` induced by the active set `z`.
    pub fn scenario_of(&self, cell: usize, z: Cluster) -> usize {
        self.cells[cell].scenario_of(z.bits())
    }

    /// Coefficient of `user` (served by `cell`) in scenario `e`.
    pub fn beta(&self, mode: LeMode, cell: usize, e: usize, user: usize) -> f64 {
        let c = &self.cells[cell];
        c.plane(mode)[e * c.users.len() + self.slot[user]]
    }

    /// `l_i W B / beta` for `user` of `cell` in scenario `e`.
    pub fn rate(&self, mode: LeMode, cell: usize, e: usize, user: usize) -> f64 {
        self.scale[cell] / self.beta(mode, cell, e, user)
    }

    /// Rate model that evaluates clusters through this table.
    pub fn rates(&self, mode: LeMode) -> LeRates<'_> {
        LeRates { table: self, mode }
    }
}

/// Fills both coefficient planes for every scenario of every cell. The
/// interference of a scenario is built from the scenario with its lowest bit
/// cleared, one addition per entry.
pub fn build_scenarios(inst: &NetworkInstance, neighbors: &NeighborSets) -> Result<ScenarioTable> {
    let n = inst.cell_count();
    if neighbors.cell_count() != n {
        return Err(Error::Config(
            "neighbor sets do not match the instance".into(),
        ));
    }
    let mut entries: u128 = 0;
    for i in 0..n {
        let m = neighbors.of(i).len() as u32;
        if m > 40 {
            return Err(Error::TooLarge(1u128 << m));
        }
        entries += 2 * (1u128 << m) * inst.users_of(i).len() as u128;
    }
    if entries > MAX_TABLE_ENTRIES {
        return Err(Error::TooLarge(entries));
    }
    let mut slot = vec![0; inst.user_count()];
    let mut cells = Vec::with_capacity(n);
    for i in 0..n {
        let tracked = neighbors.of(i).to_vec();
        let users = inst.users_of(i).to_vec();
        for (u, &j) in users.iter().enumerate() {
            slot[j] = u;
        }
        let ju = users.len();
        let count = 1usize << tracked.len();
        let mut off = vec![0.0; count * ju];
        let mut on = vec![0.0; count * ju];
        let mut interference = vec![0.0; count];
        for (u, &j) in users.iter().enumerate() {
            let outside: f64 = (0..n)
                .filter(|&k| k != i && !tracked.contains(&k))
                .map(|k| inst.interference_from(k, j))
                .sum();
            interference[0] = 0.0;
            for e in 1..count {
                let t = e.trailing_zeros() as usize;
                interference[e] = interference[e & (e - 1)] + inst.interference_from(tracked[t], j);
            }
            for e in 0..count {
                off[e * ju + u] = inst.coefficient_under(i, j, interference[e]);
                on[e * ju + u] = inst.coefficient_under(i, j, interference[e] + outside);
            }
        }
        cells.push(CellScenarios {
            tracked,
            users,
            off,
            on,
        });
    }
    let scale = (0..n)
        .map(|i| inst.load(i) * inst.capacity_scale())
        .collect();
    Ok(ScenarioTable {
        neighbors: neighbors.clone(),
        cells,
        slot,
        scale,
    })
}

/// Column rates under one local-enumeration mode.
#[derive(Debug, Clone, Copy)]
pub struct LeRates<'a> {
    table: &'a ScenarioTable,
    mode: LeMode,
}

impl LeRates<'_> {
    pub fn mode(&self) -> LeMode {
        self.mode
    }
}

impl RateModel for LeRates<'_> {
    #[inline]
    fn rate(&self, s: Cluster, i: usize, j: usize) -> f64 {
        let e = self.table.scenario_of(i, s);
        self.table.rate(self.mode, i, e, j)
    }
}

/// Optimum of the local pricing problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPricingResult {
    /// Active cells `z`.
    pub cluster: Cluster,
    /// Served user per active cell, in increasing cell order.
    pub served: Vec<usize>,
    /// Scenario selected for each active cell; always `z` restricted to `L_i`.
    pub scenarios: Vec<usize>,
    /// Rate of each served user under the mode's coefficients.
    pub rates: Vec<f64>,
    /// `sum pi_j r_j` of the served users.
    pub omega: f64,
    /// Objective `F(z) = omega - cost(z)` that the search maximizes.
    pub value: f64,
    /// `cost(z) - omega - lambda`.
    pub reduced_cost: f64,
}

impl LocalPricingResult {
    pub fn column(&self, inst: &NetworkInstance) -> Column {
        let mut rate = vec![0.0; inst.user_count()];
        for (&j, &r) in self.served.iter().zip(&self.rates) {
            rate[j] = r;
        }
        let power = crate::model::cluster_power(inst, self.cluster);
        Column::from_parts(self.cluster, self.served.clone(), rate, power)
    }

    pub fn into_priced(self, inst: &NetworkInstance) -> Priced {
        Priced {
            column: self.column(inst),
            omega: self.omega,
            reduced_cost: self.reduced_cost,
        }
    }
}

/// Best served user and its net value `max_j pi_j r_j - cell cost` for each
/// scenario of one cell.
struct CellValues {
    value: Vec<f64>,
    user: Vec<usize>,
}

fn cell_values(
    inst: &NetworkInstance,
    table: &ScenarioTable,
    duals: &Duals,
    mode: LeMode,
    objective: Objective,
) -> Vec<CellValues> {
    table
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let count = 1usize << c.tracked.len();
            let beta = c.plane(mode);
            let ju = c.users.len();
            let cost = objective.cell_cost(inst, i);
            let mut value = Vec::with_capacity(count);
            let mut user = Vec::with_capacity(count);
            for e in 0..count {
                let mut best = f64::NEG_INFINITY;
                let mut best_user = usize::MAX;
                for (u, &j) in c.users.iter().enumerate() {
                    let v = duals.demand[j] * table.scale[i] / beta[e * ju + u];
                    if v > best || (v == best && j < best_user) {
                        best = v;
                        best_user = j;
                    }
                }
                value.push(best - cost);
                user.push(best_user);
            }
            CellValues { value, user }
        })
        .collect()
}

struct Search<'a> {
    cells: &'a [CellScenarios],
    values: &'a [CellValues],
    /// `sum_{k >= i} max(0, best value of k)`; the empty scenario is the
    /// best one because coefficients grow with every active neighbor.
    optimistic_tail: Vec<f64>,
    best: f64,
    best_bits: u64,
}

impl Search<'_> {
    /// Sum over active cells of their value under the scenario induced by
    /// `bits`, treating undecided cells as inactive.
    fn active_sum(&self, bits: u64) -> f64 {
        let mut total = 0.0;
        let mut rest = bits;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            total += self.values[i].value[self.cells[i].scenario_of(bits)];
        }
        total
    }

    fn dfs(&mut self, next: usize, bits: u64) {
        let n = self.cells.len();
        if next == n {
            if bits != 0 {
                let f = self.active_sum(bits);
                if f > self.best || (f == self.best && bits < self.best_bits) {
                    self.best = f;
                    self.best_bits = bits;
                }
            }
            return;
        }
        if bits != 0 {
            let bound = self.active_sum(bits) + self.optimistic_tail[next];
            let slack = 1e-12 * (1.0 + bound.abs());
            if bound + slack < self.best {
                return;
            }
        }
        self.dfs(next + 1, bits);
        self.dfs(next + 1, bits | 1 << next);
    }
}

/// Maximizes `F(z)` over nonempty active sets by depth-first search with an
/// optimistic bound; ties go to the lowest mask.
pub fn solve_pricing_local(
    inst: &NetworkInstance,
    table: &ScenarioTable,
    duals: &Duals,
    mode: LeMode,
    objective: Objective,
) -> LocalPricingResult {
    let n = inst.cell_count();
    let values = cell_values(inst, table, duals, mode, objective);
    let mut optimistic_tail = vec![0.0; n + 1];
    for i in (0..n).rev() {
        optimistic_tail[i] = optimistic_tail[i + 1] + values[i].value[0].max(0.0);
    }
    let mut search = Search {
        cells: &table.cells,
        values: &values,
        optimistic_tail,
        best: f64::NEG_INFINITY,
        best_bits: u64::MAX,
    };
    search.dfs(0, 0);
    let bits = search.best_bits;
    let cluster = Cluster::from_bits(bits).expect("search visits a nonempty set");

    let mut served = Vec::with_capacity(cluster.len());
    let mut scenarios = Vec::with_capacity(cluster.len());
    let mut rates = Vec::with_capacity(cluster.len());
    let mut omega = 0.0;
    for i in cluster.cells() {
        let e = table.cells[i].scenario_of(bits);
        let j = values[i].user[e];
        let r = table.rate(mode, i, e, j);
        served.push(j);
        scenarios.push(e);
        rates.push(r);
        omega += duals.demand[j] * r;
    }
    let value = search.best - objective.fixed_cost();
    LocalPricingResult {
        cluster,
        served,
        scenarios,
        rates,
        omega,
        value,
        reduced_cost: -value - duals.time,
    }
}
