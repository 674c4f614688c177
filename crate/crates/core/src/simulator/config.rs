use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MarketModel;

/// Monte Carlo backtest settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon: f64,
    /// Euler step (s).
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub x0: f64,
    pub y0: f64,
    pub p0: f64,
    pub i0: usize,
    /// Tick-clock time at `t = 0`.
    #[serde(default)]
    pub clock_offset: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            horizon: 300.0,
            dt: 0.3,
            n_paths: 100_000,
            seed: 42,
            x0: 0.0,
            y0: 0.0,
            p0: 45.0,
            i0: 1,
            clock_offset: 0.0,
        }
    }
}

impl SimConfig {
    /// Number of Euler steps covering the horizon (the last one may be shorter).
    pub fn n_steps(&self) -> usize {
        ((self.horizon / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    /// Start time and length of step `k`.
    pub fn step_span(&self, k: usize) -> (f64, f64) {
        let t = k as f64 * self.dt;
        (t, self.dt.min(self.horizon - t))
    }

    /// Checks the settings against `model`: every Bernoulli thinning
    /// probability must be at most one.
    pub fn validate(&self, model: &MarketModel<f64>) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.n_paths == 0 {
            return bad("n_paths must be at least 1".into());
        }
        if ![self.x0, self.y0, self.p0, self.clock_offset].iter().all(|v| v.is_finite()) {
            return bad("initial state must be finite".into());
        }
        model.grid.check(self.i0)?;
        let clock = model.tick_clock.max_rate() * self.dt;
        if clock > 1.0 {
            return bad(format!("spread jump probability {clock} per step exceeds 1; reduce dt"));
        }
        for i in 1..=model.m() {
            for (side, p) in [("bid", model.exec_bid.max_at(i)), ("ask", model.exec_ask.max_at(i))] {
                if p * self.dt > 1.0 {
                    return bad(format!("{side} execution probability {} at state {i} exceeds 1", p * self.dt));
                }
            }
        }
        Ok(())
    }
}
