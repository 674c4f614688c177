use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time and inventory discretization of the reduced systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverGrid {
    /// Horizon `T` in seconds.
    pub horizon: f64,
    /// Stored time slices; the surface holds `n_out + 1` including `T`.
    pub n_out: usize,
    pub y_min: i64,
    pub y_max: i64,
    /// Inventory step in shares.
    pub dy: i64,
    /// Internal steps per output slice. `None` picks the smallest count that
    /// keeps the explicit scheme monotone.
    #[serde(default)]
    pub substeps: Option<usize>,
    /// Tick-clock time corresponding to `t = 0`.
    #[serde(default)]
    pub clock_offset: f64,
}

impl Default for SolverGrid {
    fn default() -> Self {
        Self { horizon: 300.0, n_out: 100, y_min: -1000, y_max: 1000, dy: 10, substeps: None, clock_offset: 0.0 }
    }
}

impl SolverGrid {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.n_out == 0 {
            return bad("n_out must be at least 1".into());
        }
        if self.dy <= 0 {
            return bad(format!("dy must be positive, got {}", self.dy));
        }
        if !(self.y_min < 0 && self.y_max > 0) {
            return bad(format!("need y_min < 0 < y_max, got [{}, {}]", self.y_min, self.y_max));
        }
        if self.y_min % self.dy != 0 || self.y_max % self.dy != 0 {
            return bad("y bounds must be multiples of dy".into());
        }
        if self.substeps == Some(0) {
            return bad("substeps must be at least 1".into());
        }
        if !self.clock_offset.is_finite() {
            return bad("clock offset must be finite".into());
        }
        Ok(())
    }

    pub fn n_y(&self) -> usize {
        ((self.y_max - self.y_min) / self.dy) as usize + 1
    }

    pub fn y_at(&self, k: usize) -> i64 {
        self.y_min + k as i64 * self.dy
    }

    /// Node index of an on-grid inventory.
    pub fn node(&self, y: i64) -> Option<usize> {
        ((y - self.y_min) % self.dy == 0 && y >= self.y_min && y <= self.y_max).then(|| ((y - self.y_min) / self.dy) as usize)
    }

    /// Nearest node, and whether `y` was outside the grid.
    pub fn nearest_node(&self, y: f64) -> (usize, bool) {
        let k = ((y - self.y_min as f64) / self.dy as f64).round();
        let last = (self.n_y() - 1) as f64;
        (k.clamp(0.0, last) as usize, k < 0.0 || k > last)
    }

    pub fn slice_dt(&self) -> f64 {
        self.horizon / self.n_out as f64
    }

    /// Output times `t_0 = 0, ..., t_{n_out} = T`.
    pub fn times(&self) -> Vec<f64> {
        let dt = self.slice_dt();
        (0..=self.n_out).map(|k| if k == self.n_out { self.horizon } else { k as f64 * dt }).collect()
    }

    /// Slice in force at time `t`: the last stored slice at or before `t`.
    pub fn slice_at(&self, t: f64) -> usize {
        ((t / self.slice_dt()).floor().max(0.0) as usize).min(self.n_out - 1)
    }

    pub fn is_symmetric(&self) -> bool {
        self.y_min == -self.y_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    MeanPenalty,
    Exponential,
}

/// Inventory penalty shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Penalty {
    #[default]
    Quadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub objective: Objective,
    pub gamma: f64,
    #[serde(default)]
    pub penalty: Penalty,
    /// Largest limit order size (shares).
    pub lbar: i64,
    /// Largest market order size (shares); 0 disables market orders.
    pub ebar: i64,
    /// Risk aversion, exponential objective only.
    pub eta: f64,
    /// Price drift and volatility, exponential objective only.
    pub drift: f64,
    pub sigma: f64,
    /// Inventory is measured in multiples of this many shares inside the
    /// penalty: `g(y) = (y / inventory_unit)^2`.
    pub inventory_unit: f64,
    /// A market order is recorded only if it beats the make value by more than this.
    pub tie_eps: f64,
}

/// Share count used to scale the inventory penalty by default. With the
/// reference model this puts `gamma` between 0.006 and 50 on the range
/// where the penalty trades off against spread revenue.
pub const DEFAULT_INVENTORY_UNIT: f64 = 1000.0;

impl SolverParams {
    pub fn mean_penalty(gamma: f64) -> Self {
        Self {
            objective: Objective::MeanPenalty,
            gamma,
            penalty: Penalty::Quadratic,
            lbar: 100,
            ebar: 100,
            eta: 0.0,
            drift: 0.0,
            sigma: 0.0,
            inventory_unit: DEFAULT_INVENTORY_UNIT,
            tie_eps: 1e-10,
        }
    }

    pub fn exponential(eta: f64, drift: f64, sigma: f64) -> Self {
        Self { objective: Objective::Exponential, gamma: 0.0, eta, drift, sigma, ..Self::mean_penalty(0.0) }
    }

    pub fn without_market_orders(&self) -> Self {
        Self { ebar: 0, ..self.clone() }
    }

    pub fn validate(&self, grid: &SolverGrid) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return bad(format!("gamma must be nonnegative, got {}", self.gamma));
        }
        if self.lbar < 0 || self.ebar < 0 {
            return bad("lbar and ebar must be nonnegative".into());
        }
        if self.lbar % grid.dy != 0 || self.ebar % grid.dy != 0 {
            return bad(format!("lbar ({}) and ebar ({}) must be multiples of dy ({})", self.lbar, self.ebar, grid.dy));
        }
        if self.lbar >= grid.y_max - grid.y_min || self.ebar >= grid.y_max - grid.y_min {
            return bad("inventory range must exceed the largest order size".into());
        }
        if !(self.inventory_unit > 0.0) || !self.inventory_unit.is_finite() {
            return bad(format!("inventory unit must be positive, got {}", self.inventory_unit));
        }
        if !(self.tie_eps >= 0.0) {
            return bad("tie_eps must be nonnegative".into());
        }
        if self.objective == Objective::Exponential {
            if self.gamma != 0.0 {
                return bad("the exponential objective requires gamma = 0".into());
            }
            if !(self.eta > 0.0) || !self.eta.is_finite() {
                return bad(format!("eta must be positive, got {}", self.eta));
            }
            if !(self.sigma >= 0.0) || !self.drift.is_finite() {
                return bad("sigma must be nonnegative and drift finite".into());
            }
        }
        Ok(())
    }
}
