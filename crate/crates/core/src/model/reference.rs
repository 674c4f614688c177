//! Reference parameter set for a liquid large-cap stock (tick 0.005, six
//! spread states) and the backtest fee schedule.

use crate::calibration::symmetrize;
use crate::model::market::{ExecTable, FeeSchedule, MarketModel, PriceModel, SpreadGrid, TickClock};

pub const TICK: f64 = 0.005;
pub const SPREAD_STATES: usize = 6;
pub const P0: f64 = 45.0;
pub const HORIZON: f64 = 300.0;
/// Mid-price volatility per square-root second used when none is supplied.
pub const DEFAULT_SIGMA: f64 = 0.3 * TICK;

/// Estimated spread jump matrix, rounded (rows sum to 0.997..0.999).
pub const RAW_TRANSITIONS: [[f64; 6]; 6] = [
    [0.0, 0.410, 0.220, 0.160, 0.142, 0.065],
    [0.201, 0.0, 0.435, 0.192, 0.103, 0.067],
    [0.113, 0.221, 0.0, 0.4582, 0.147, 0.059],
    [0.070, 0.085, 0.275, 0.0, 0.465, 0.102],
    [0.068, 0.049, 0.073, 0.363, 0.0, 0.446],
    [0.077, 0.057, 0.059, 0.112, 0.692, 0.0],
];

/// Hourly tick-clock intensities (s^-1) from 09:30 to 16:30.
pub const HOURLY_CLOCK_RATES: [f64; 7] = [1.654, 0.799, 0.516, 0.377, 0.632, 1.305, 2.113];

/// Session start (09:30) in seconds after midnight.
pub const SESSION_START: f64 = 9.5 * 3600.0;

/// Execution intensities (s^-1) per spread state: `Ba, Ba-, Bb, Bb+`.
pub const EXEC_INTENSITIES: [[f64; 4]; 6] = [
    [0.0539, 0.1485, 0.0718, 0.1763],
    [0.0465, 0.0979, 0.0520, 0.1144],
    [0.0401, 0.0846, 0.0419, 0.0915],
    [0.0360, 0.0856, 0.0409, 0.0896],
    [0.0435, 0.1009, 0.0452, 0.0930],
    [0.0554, 0.1202, 0.0614, 0.1255],
];

pub const REBATE_PER_SHARE: f64 = 0.0008;
pub const TAKE_FEE_PER_SHARE: f64 = 0.0012;
pub const FIXED_FEE: f64 = 1e-6;

/// Published matrix with each row rescaled to sum to one.
pub fn transition_matrix() -> Vec<Vec<f64>> {
    RAW_TRANSITIONS
        .iter()
        .map(|row| {
            let s: f64 = row.iter().sum();
            row.iter().map(|v| v / s).collect()
        })
        .collect()
}

/// Hourly boundaries in seconds after midnight, 09:30 to 16:30.
pub fn hourly_boundaries() -> Vec<f64> {
    (0..=HOURLY_CLOCK_RATES.len()).map(|k| SESSION_START + 3600.0 * k as f64).collect()
}

/// Intraday clock, hourly buckets in seconds after midnight.
pub fn hourly_clock() -> TickClock<f64> {
    TickClock::new(hourly_boundaries(), HOURLY_CLOCK_RATES.to_vec()).expect("valid clock")
}

pub fn exec_bid() -> ExecTable<f64> {
    ExecTable {
        at_best: EXEC_INTENSITIES.iter().map(|r| r[2]).collect(),
        improved: EXEC_INTENSITIES.iter().map(|r| r[3]).collect(),
    }
}

pub fn exec_ask() -> ExecTable<f64> {
    ExecTable {
        at_best: EXEC_INTENSITIES.iter().map(|r| r[0]).collect(),
        improved: EXEC_INTENSITIES.iter().map(|r| r[1]).collect(),
    }
}

pub fn fees() -> FeeSchedule<f64> {
    FeeSchedule {
        rebate_per_share: REBATE_PER_SHARE,
        take_fee_per_share: TAKE_FEE_PER_SHARE,
        fixed_fee: FIXED_FEE,
    }
}

/// Estimated (asymmetric) model with a unit tick clock on the backtest horizon.
pub fn estimated_model() -> MarketModel<f64> {
    MarketModel {
        grid: SpreadGrid::new(TICK, SPREAD_STATES).expect("valid grid"),
        rho: transition_matrix(),
        tick_clock: TickClock::constant(1.0, HORIZON).expect("valid clock"),
        exec_bid: exec_bid(),
        exec_ask: exec_ask(),
        fees: fees(),
        price: PriceModel::martingale(DEFAULT_SIGMA, P0),
    }
}

/// Backtest model: estimated model with mirrored bid/ask intensities.
pub fn reference_model() -> MarketModel<f64> {
    symmetrize(&estimated_model())
}
