//! Synthetic network instances: hexagonal cell layouts, COST-231-HATA path
//! loss and log-normal shadowing.
//!
//! Cells are flat-top hexagons whose radius is the center-to-vertex
//! distance, so adjacent sites sit `sqrt(3) * R` apart. Every random draw for
//! the users of cell `i` comes from ChaCha stream `i` of the configured seed:
//! first the user position, then the shadowing of each link to that user.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{InstanceData, InstanceMeta, NetworkInstance};

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// Center cell plus one ring.
    Hex7,
    /// Center cell plus two rings.
    Hex19,
    Single,
    /// Explicit cell centers in meters; each cell is a hexagon of the
    /// configured radius around its center.
    Custom(Vec<[f64; 2]>),
}

impl Layout {
    pub fn name(&self) -> &'static str {
        match self {
            Layout::Hex7 => "hex7",
            Layout::Hex19 => "hex19",
            Layout::Single => "single",
            Layout::Custom(_) => "custom",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hex7" => Ok(Layout::Hex7),
            "hex19" => Ok(Layout::Hex19),
            "single" => Ok(Layout::Single),
            other => Err(Error::Config(format!("unknown layout `{other}`"))),
        }
    }
}

/// Propagation environment of the urban model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Environment {
    /// Medium city and suburban areas: no correction.
    #[default]
    MediumCity,
    /// Metropolitan centers: +3 dB.
    Metropolitan,
}

impl Environment {
    pub fn correction_db(self) -> f64 {
        match self {
            Environment::MediumCity => 0.0,
            Environment::Metropolitan => 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub layout: Layout,
    pub cell_radius_m: f64,
    pub users_per_cell: usize,
    pub demand_bits: f64,
    pub carrier_mhz: f64,
    pub ru_count: u32,
    pub ru_bandwidth_hz: f64,
    pub tx_power_per_ru_w: f64,
    pub circuit_power_w: f64,
    pub noise_density_dbm_hz: f64,
    pub shadowing_db: f64,
    /// Load of every cell, unless `loads` is given.
    pub load: f64,
    pub loads: Option<Vec<f64>>,
    pub bs_height_m: f64,
    pub ue_height_m: f64,
    pub environment: Environment,
    pub deadline_s: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            layout: Layout::Hex7,
            cell_radius_m: 500.0,
            users_per_cell: 5,
            demand_bits: 2e6,
            carrier_mhz: 2000.0,
            ru_count: 25,
            ru_bandwidth_hz: 180e3,
            tx_power_per_ru_w: 1.0,
            circuit_power_w: 5.0,
            noise_density_dbm_hz: -174.0,
            shadowing_db: 8.0,
            load: 1.0,
            loads: None,
            bs_height_m: 30.0,
            ue_height_m: 1.5,
            environment: Environment::MediumCity,
            deadline_s: 1.0,
            seed: 0,
        }
    }
}

impl GenConfig {
    // negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(1500.0..=2000.0).contains(&self.carrier_mhz) {
            return bad("carrier frequency must lie in 1500..=2000 MHz");
        }
        if !(self.cell_radius_m > 0.0 && self.cell_radius_m.is_finite()) {
            return bad("cell radius must be positive");
        }
        if self.users_per_cell == 0 {
            return bad("users per cell must be at least one");
        }
        if !(self.demand_bits > 0.0) || !(self.deadline_s > 0.0) {
            return bad("demand and deadline must be positive");
        }
        if self.ru_count == 0 || !(self.ru_bandwidth_hz > 0.0) {
            return bad("RU count and bandwidth must be positive");
        }
        if !(self.tx_power_per_ru_w > 0.0) || !(self.circuit_power_w > 0.0) {
            return bad("powers must be positive");
        }
        if !(self.shadowing_db >= 0.0) {
            return bad("shadowing deviation must be nonnegative");
        }
        if !(self.bs_height_m > 0.0 && self.ue_height_m > 0.0) {
            return bad("antenna heights must be positive");
        }
        if let Some(l) = &self.loads {
            if l.len() != self.cell_centers().len() {
                return bad("loads must have one entry per cell");
            }
        }
        if let Layout::Custom(c) = &self.layout {
            if c.is_empty() {
                return bad("custom layout needs at least one cell");
            }
        }
        Ok(())
    }

    /// Cell centers in meters, center cell first, then ring by ring in
    /// counterclockwise order.
    pub fn cell_centers(&self) -> Vec<[f64; 2]> {
        match &self.layout {
            Layout::Single => vec![[0.0, 0.0]],
            Layout::Hex7 => hex_centers(1, self.cell_radius_m),
            Layout::Hex19 => hex_centers(2, self.cell_radius_m),
            Layout::Custom(c) => c.clone(),
        }
    }

    /// Noise power per RU, watts.
    pub fn noise_w(&self) -> f64 {
        10f64.powf((self.noise_density_dbm_hz - 30.0) / 10.0) * self.ru_bandwidth_hz
    }
}

/// Centers of all flat-top hexagons within `rings` steps of the origin.
fn hex_centers(rings: i32, radius: f64) -> Vec<[f64; 2]> {
    let mut cells = Vec::new();
    for q in -rings..=rings {
        for r in (-rings).max(-q - rings)..=rings.min(-q + rings) {
            let ring = q.abs().max(r.abs()).max((q + r).abs());
            let x = 1.5 * radius * q as f64;
            let y = SQRT3 * radius * (r as f64 + q as f64 / 2.0);
            let angle = y.atan2(x).rem_euclid(std::f64::consts::TAU);
            cells.push((ring, angle, [x, y]));
        }
    }
    cells.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    cells.into_iter().map(|c| c.2).collect()
}

/// Whether `(x, y)`, relative to a cell center, lies in the flat-top
/// hexagon of the given radius.
pub fn in_hexagon(x: f64, y: f64, radius: f64) -> bool {
    let (x, y) = (x.abs(), y.abs());
    y <= SQRT3 / 2.0 * radius && SQRT3 * x + y <= SQRT3 * radius
}

/// COST-231-HATA path loss in dB at ground distance `d_m` meters (clamped
/// to at least 1 m).
pub fn pathloss_db(d_m: f64, cfg: &GenConfig) -> f64 {
    let f = cfg.carrier_mhz.log10();
    let hb = cfg.bs_height_m.log10();
    let a_hm = (1.1 * f - 0.7) * cfg.ue_height_m - (1.56 * f - 0.8);
    let d_km = d_m.max(1.0) / 1000.0;
    46.3 + 33.9 * f - 13.82 * hb - a_hm
        + (44.9 - 6.55 * hb) * d_km.log10()
        + cfg.environment.correction_db()
}

/// Draws a network from `cfg`. The result depends only on the configuration.
pub fn generate(cfg: &GenConfig) -> Result<NetworkInstance> {
    cfg.validate()?;
    let centers = cfg.cell_centers();
    let n = centers.len();
    let radius = cfg.cell_radius_m;
    let shadow = Normal::new(0.0, cfg.shadowing_db).map_err(|e| Error::Config(e.to_string()))?;

    let mut users_of_cell = Vec::with_capacity(n);
    let mut gain = Vec::with_capacity(n * cfg.users_per_cell);
    let mut user_positions = Vec::with_capacity(n * cfg.users_per_cell);
    for (i, c) in centers.iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);
        let mut ids = Vec::with_capacity(cfg.users_per_cell);
        for _ in 0..cfg.users_per_cell {
            let (dx, dy) = loop {
                let dx = rng.gen_range(-radius..=radius);
                let dy = rng.gen_range(-SQRT3 / 2.0 * radius..=SQRT3 / 2.0 * radius);
                if in_hexagon(dx, dy, radius) {
                    break (dx, dy);
                }
            };
            let pos = [c[0] + dx, c[1] + dy];
            let row = centers
                .iter()
                .map(|b| {
                    let d = (pos[0] - b[0]).hypot(pos[1] - b[1]);
                    let x = if cfg.shadowing_db > 0.0 {
                        shadow.sample(&mut rng)
                    } else {
                        0.0
                    };
                    10f64.powf(-(pathloss_db(d, cfg) + x) / 10.0)
                })
                .collect();
            ids.push(gain.len());
            gain.push(row);
            user_positions.push(pos);
        }
        users_of_cell.push(ids);
    }
    let users = gain.len();
    let data = InstanceData {
        cell_count: n,
        users_of_cell,
        gain,
        tx_power_per_ru: vec![cfg.tx_power_per_ru_w; n],
        circuit_power: cfg.circuit_power_w,
        ru_count: cfg.ru_count,
        ru_bandwidth: cfg.ru_bandwidth_hz,
        noise: cfg.noise_w(),
        load: cfg.loads.clone().unwrap_or_else(|| vec![cfg.load; n]),
        demand: vec![cfg.demand_bits; users],
        deadline: cfg.deadline_s,
        metadata: Some(InstanceMeta {
            layout: cfg.layout.name().to_string(),
            seed: cfg.seed,
            cell_radius_m: radius,
            cell_positions: centers,
            user_positions,
            carrier_mhz: cfg.carrier_mhz,
            bs_height_m: cfg.bs_height_m,
            ue_height_m: cfg.ue_height_m,
            env_correction_db: cfg.environment.correction_db(),
            shadowing_db: cfg.shadowing_db,
        }),
    };
    Ok(NetworkInstance::new(data)?)
}
