//! Estimation of the spread chain, tick clock and execution intensities from
//! level-1 tick data.

mod estimators;
mod jumps;
mod symmetrize;
pub mod synthetic;
mod ticks;

use serde::{Deserialize, Serialize};

pub use estimators::{
    build_execution_proxies, count_executions, estimate_exec_intensities, estimate_tick_clock,
    estimate_transition_matrix, ClockEstimate, ExecCounts, ExecEstimate, QuoteRegime, TransitionEstimate,
};
pub use jumps::{extract_spread_jumps, JumpSegment, SpreadJumpSeries, SESSION_GAP};
pub use symmetrize::symmetrize;
pub use ticks::{read_ticks, validate_ticks, write_ticks, TickRecord};

use crate::error::{Error, Result};
use crate::model::{FeeSchedule, MarketModel, PriceModel, SpreadGrid, TickClock};

/// Inputs of the full calibration pipeline.
#[derive(Debug, Clone)]
pub struct CalibrationConfig {
    pub delta: f64,
    pub m: usize,
    /// Typical order size for the execution proxies (shares).
    pub v0: f64,
    /// Tick-clock bucket boundaries; `None` uses one bucket spanning the data.
    pub boundaries: Option<Vec<f64>>,
    /// Fold jump times modulo this period before bucketing (86400 for time of day).
    pub period: Option<f64>,
    pub symmetrize: bool,
    pub fees: FeeSchedule<f64>,
    pub price: PriceModel<f64>,
}

impl CalibrationConfig {
    pub fn new(delta: f64, m: usize) -> Self {
        Self {
            delta,
            m,
            v0: 100.0,
            boundaries: None,
            period: None,
            symmetrize: false,
            fees: crate::model::reference::fees(),
            price: PriceModel::martingale(crate::model::reference::DEFAULT_SIGMA, crate::model::reference::P0),
        }
    }
}

/// Everything the estimators saw, for audit next to the model file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub records: usize,
    pub skipped_records: usize,
    pub sessions: usize,
    pub transitions: usize,
    pub transition_counts: Vec<Vec<u64>>,
    pub unvisited_rows: Vec<usize>,
    pub clock: ClockEstimate,
    pub exec_counts: ExecCounts,
    pub exec_raw: ExecEstimate,
    pub symmetrized: bool,
    pub flags: Vec<String>,
}

/// Runs every estimator on one tick stream and assembles a validated model.
pub fn calibrate(ticks: &[TickRecord], cfg: &CalibrationConfig) -> Result<(MarketModel<f64>, CalibrationReport)> {
    let grid = SpreadGrid::new(cfg.delta, cfg.m)?;
    let series = extract_spread_jumps(ticks, &grid)?;
    let trans = estimate_transition_matrix(&series, cfg.m)?;

    let boundaries = match &cfg.boundaries {
        Some(b) => b.clone(),
        None => {
            let (first, last) = (ticks[0].ts, ticks[ticks.len() - 1].ts);
            if !(last > first) {
                return Err(Error::InvalidConfig("tick data spans zero time".into()));
            }
            vec![first, last]
        }
    };
    let clock = estimate_tick_clock(&series, &boundaries, cfg.period)?;
    let counts = build_execution_proxies(ticks, &series, cfg.m, cfg.v0)?;
    let raw = estimate_exec_intensities(&counts)?;
    let (exec_bid, exec_ask, mut flags) = raw.to_tables()?;
    for i in &trans.unvisited {
        flags.push(format!("transition row {i} unvisited, filled uniformly"));
    }

    let model = MarketModel {
        grid,
        rho: trans.rho.clone(),
        tick_clock: TickClock::new(boundaries, clock.rates.clone())?,
        exec_bid,
        exec_ask,
        fees: cfg.fees,
        price: cfg.price,
    };
    flags.extend(model.validate()?);
    let model = if cfg.symmetrize { symmetrize(&model) } else { model };

    let report = CalibrationReport {
        records: ticks.len(),
        skipped_records: series.skipped_records,
        sessions: series.sessions.len(),
        transitions: series.transition_count(),
        transition_counts: trans.counts,
        unvisited_rows: trans.unvisited,
        clock,
        exec_counts: counts,
        exec_raw: raw,
        symmetrized: cfg.symmetrize,
        flags,
    };
    Ok((model, report))
}
