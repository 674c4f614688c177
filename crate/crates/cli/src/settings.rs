//! Run parameters: built-in defaults, then an optional JSON file, then flags.

use std::path::Path;

use lobmm::analytics::{BENCHMARK_SIZE, FRONTIER_GAMMAS};
use lobmm::model::reference;
use lobmm::simulator::SimConfig;
use lobmm::solver::{Objective, SolverGrid, SolverParams, DEFAULT_INVENTORY_UNIT};
use serde::Deserialize;

use crate::Fail;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub delta: f64,
    pub m: usize,
    pub v0: f64,
    pub buckets: Vec<f64>,
    pub period: f64,
    pub symmetrize: bool,

    pub objective: Objective,
    pub gamma: Option<f64>,
    pub eta: f64,
    pub lbar: i64,
    pub ebar: i64,
    pub inventory_unit: f64,
    pub horizon: f64,
    pub n_out: usize,
    pub y_min: i64,
    pub y_max: i64,
    pub dy: i64,
    pub substeps: Option<usize>,
    pub clock_offset: f64,

    pub paths: usize,
    pub seed: u64,
    pub dt: f64,
    pub i0: usize,
    pub size: f64,
    pub gammas: Vec<f64>,
}

pub const DEFAULT_GAMMA: f64 = 5.0;
pub const DEFAULT_ETA: f64 = 1.0;

impl Default for Settings {
    fn default() -> Self {
        let grid = SolverGrid::default();
        let sim = SimConfig::default();
        let p = SolverParams::mean_penalty(DEFAULT_GAMMA);
        Self {
            delta: reference::TICK,
            m: reference::SPREAD_STATES,
            v0: 100.0,
            buckets: reference::hourly_boundaries(),
            period: 86_400.0,
            symmetrize: false,
            objective: Objective::MeanPenalty,
            gamma: None,
            eta: DEFAULT_ETA,
            lbar: p.lbar,
            ebar: p.ebar,
            inventory_unit: DEFAULT_INVENTORY_UNIT,
            horizon: grid.horizon,
            n_out: grid.n_out,
            y_min: grid.y_min,
            y_max: grid.y_max,
            dy: grid.dy,
            substeps: None,
            clock_offset: 0.0,
            paths: sim.n_paths,
            seed: sim.seed,
            dt: sim.dt,
            i0: sim.i0,
            size: BENCHMARK_SIZE,
            gammas: FRONTIER_GAMMAS.to_vec(),
        }
    }
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, Fail> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Fail::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Fail::Usage(format!("bad config {}: {e}", path.display())))
    }

    pub fn grid(&self) -> SolverGrid {
        SolverGrid {
            horizon: self.horizon,
            n_out: self.n_out,
            y_min: self.y_min,
            y_max: self.y_max,
            dy: self.dy,
            substeps: self.substeps,
            clock_offset: self.clock_offset,
        }
    }

    /// Solver parameters; the exponential objective takes drift and
    /// volatility from the model's price process.
    pub fn params(&self, drift: f64, sigma: f64) -> Result<SolverParams, Fail> {
        let base = match self.objective {
            Objective::MeanPenalty => SolverParams::mean_penalty(self.gamma.unwrap_or(DEFAULT_GAMMA)),
            Objective::Exponential => {
                if self.gamma.is_some_and(|g| g != 0.0) {
                    return Err(Fail::Usage("the exponential objective takes --eta, not --gamma".into()));
                }
                SolverParams::exponential(self.eta, drift, sigma)
            }
        };
        let p = SolverParams { lbar: self.lbar, ebar: self.ebar, inventory_unit: self.inventory_unit, ..base };
        p.validate(&self.grid())?;
        Ok(p)
    }

    pub fn sim(&self, p0: f64) -> SimConfig {
        SimConfig {
            horizon: self.horizon,
            dt: self.dt,
            n_paths: self.paths,
            seed: self.seed,
            p0,
            i0: self.i0,
            clock_offset: self.clock_offset,
            ..SimConfig::default()
        }
    }
}
