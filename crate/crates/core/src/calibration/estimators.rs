use serde::{Deserialize, Serialize};

use crate::calibration::jumps::SpreadJumpSeries;
use crate::calibration::ticks::TickRecord;
use crate::error::{Error, Result};
use crate::model::{ExecTable, QuoteAsk, QuoteBid};

/// Estimated jump matrix and the rows that had no observed visits.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionEstimate {
    /// Row-stochastic, zero diagonal, 0-based indices.
    pub rho: Vec<Vec<f64>>,
    /// Transition counts `counts[i][j]`.
    pub counts: Vec<Vec<u64>>,
    /// 1-based states never left during the sample; filled uniformly.
    pub unvisited: Vec<usize>,
}

/// Empirical transition frequencies of the tick-time chain.
pub fn estimate_transition_matrix(series: &SpreadJumpSeries, m: usize) -> Result<TransitionEstimate> {
    if m < 2 {
        return Err(Error::InvalidConfig("transition matrix needs at least two spread states".into()));
    }
    if series.transition_count() == 0 {
        return Err(Error::NoTransitions);
    }
    let mut counts = vec![vec![0u64; m]; m];
    for seg in &series.segments {
        for w in seg.shat.windows(2) {
            let (i, j) = (w[0], w[1]);
            if i > m || j > m {
                return Err(Error::SpreadOutOfRange { state: i.max(j), m });
            }
            counts[i - 1][j - 1] += 1;
        }
    }
    let mut unvisited = Vec::new();
    let rho = counts
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let visits: u64 = row.iter().sum();
            if visits == 0 {
                unvisited.push(i + 1);
                let fill = 1.0 / (m - 1) as f64;
                (0..m).map(|j| if j == i { 0.0 } else { fill }).collect()
            } else {
                row.iter().map(|&c| c as f64 / visits as f64).collect()
            }
        })
        .collect();
    Ok(TransitionEstimate { rho, counts, unvisited })
}

/// Per-bucket clock counts and rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockEstimate {
    pub boundaries: Vec<f64>,
    pub counts: Vec<u64>,
    pub exposure: Vec<f64>,
    pub rates: Vec<f64>,
}

/// Piecewise-constant tick-clock intensity: jumps per bucket divided by bucket length.
///
/// With `period = Some(p)` jump times are folded modulo `p` (e.g. 86400 s for
/// time-of-day buckets over several days) and each bucket's exposure is its
/// length times the number of distinct periods in the data.
pub fn estimate_tick_clock(series: &SpreadJumpSeries, boundaries: &[f64], period: Option<f64>) -> Result<ClockEstimate> {
    if boundaries.len() < 2 {
        return Err(Error::InvalidConfig("need at least two bucket boundaries".into()));
    }
    for (k, w) in boundaries.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::ZeroLengthBucket { bucket: k });
        }
    }
    let periods = match period {
        Some(p) if p > 0.0 => {
            let mut days: Vec<i64> = series.sessions.iter().map(|(s, _)| (s / p).floor() as i64).collect();
            days.dedup();
            days.len().max(1) as f64
        }
        Some(_) => return Err(Error::InvalidConfig("period must be positive".into())),
        None => 1.0,
    };
    let nb = boundaries.len() - 1;
    let mut counts = vec![0u64; nb];
    for &t in &series.clock_jumps {
        let t = match period {
            Some(p) => t.rem_euclid(p),
            None => t,
        };
        let k = boundaries.partition_point(|b| *b <= t);
        if k >= 1 && k <= nb {
            counts[k - 1] += 1;
        }
    }
    let exposure: Vec<f64> = boundaries.windows(2).map(|w| (w[1] - w[0]) * periods).collect();
    let rates = counts.iter().zip(&exposure).map(|(&c, &e)| c as f64 / e).collect();
    Ok(ClockEstimate { boundaries: boundaries.to_vec(), counts, exposure, rates })
}

/// Execution counts and occupation times per side, quote level and spread state.
///
/// Index `[level][i - 1]` where level 0 is the best quote and 1 the improved one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecCounts {
    pub m: usize,
    pub bid: [Vec<u64>; 2],
    pub ask: [Vec<u64>; 2],
    pub bid_time: [Vec<f64>; 2],
    pub ask_time: [Vec<f64>; 2],
}

impl ExecCounts {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            bid: [vec![0; m], vec![0; m]],
            ask: [vec![0; m], vec![0; m]],
            bid_time: [vec![0.0; m], vec![0.0; m]],
            ask_time: [vec![0.0; m], vec![0.0; m]],
        }
    }

    /// Time spent in each spread state (the proxy occupation, equal across quotes).
    pub fn spread_occupation(&self) -> Vec<f64> {
        self.bid_time[0].clone()
    }

    /// Adds counts and occupation from an independent sample.
    pub fn merge(&mut self, other: &ExecCounts) -> Result<()> {
        if other.m != self.m {
            return Err(Error::InvalidConfig("cannot merge counts with different m".into()));
        }
        for l in 0..2 {
            for i in 0..self.m {
                self.bid[l][i] += other.bid[l][i];
                self.ask[l][i] += other.ask[l][i];
                self.bid_time[l][i] += other.bid_time[l][i];
                self.ask_time[l][i] += other.ask_time[l][i];
            }
        }
        Ok(())
    }
}

/// Proxy execution counts from traded volumes between spread jumps.
///
/// For each interval `(theta_n, theta_{n+1}]` in state `i`, an improved quote of
/// size `v0` is counted as filled when the market-order volume on its side
/// exceeds `v0`; a best quote also has to clear the displayed queue at `theta_n`.
pub fn build_execution_proxies(ticks: &[TickRecord], series: &SpreadJumpSeries, m: usize, v0: f64) -> Result<ExecCounts> {
    if !(v0 > 0.0) {
        return Err(Error::InvalidConfig(format!("typical volume must be positive, got {v0}")));
    }
    let mut counts = ExecCounts::new(m);
    for seg in &series.segments {
        for n in 0..seg.transitions() {
            let (t0, t1) = (seg.theta[n], seg.theta[n + 1]);
            let i = seg.shat[n];
            let start = &ticks[seg.records[n]];
            // records strictly after theta_n up to and including theta_{n+1}
            let lo = ticks.partition_point(|r| r.ts <= t0);
            let hi = ticks.partition_point(|r| r.ts <= t1);
            let (buy, sell) = ticks[lo..hi].iter().fold((0.0, 0.0), |(b, s), r| (b + r.buy_vol, s + r.sell_vol));
            let k = i - 1;
            if sell > v0 {
                counts.bid[1][k] += 1;
            }
            if sell > v0 + start.bid_sz {
                counts.bid[0][k] += 1;
            }
            if buy > v0 {
                counts.ask[1][k] += 1;
            }
            if buy > v0 + start.ask_sz {
                counts.ask[0][k] += 1;
            }
            let dt = t1 - t0;
            for l in 0..2 {
                counts.bid_time[l][k] += dt;
                counts.ask_time[l][k] += dt;
            }
        }
    }
    Ok(counts)
}

/// Interval over which spread and both quotes were constant, with the fills observed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuoteRegime {
    pub start: f64,
    pub end: f64,
    pub i: usize,
    pub qb: QuoteBid,
    pub qa: QuoteAsk,
    pub bid_fills: u64,
    pub ask_fills: u64,
}

/// Counts from directly observed execution processes.
pub fn count_executions(regimes: &[QuoteRegime], m: usize) -> Result<ExecCounts> {
    let mut counts = ExecCounts::new(m);
    for r in regimes {
        if r.i == 0 || r.i > m {
            return Err(Error::SpreadOutOfRange { state: r.i, m });
        }
        let k = r.i - 1;
        let dt = r.end - r.start;
        let lb = r.qb.is_improved() as usize;
        let la = r.qa.is_improved() as usize;
        counts.bid[lb][k] += r.bid_fills;
        counts.ask[la][k] += r.ask_fills;
        counts.bid_time[lb][k] += dt;
        counts.ask_time[la][k] += dt;
    }
    Ok(counts)
}

/// Execution intensity estimates; `None` where the cell was never occupied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecEstimate {
    pub bid_best: Vec<Option<f64>>,
    pub bid_improved: Vec<Option<f64>>,
    pub ask_best: Vec<Option<f64>>,
    pub ask_improved: Vec<Option<f64>>,
}

fn ratio(count: u64, time: f64) -> Option<f64> {
    (time > 0.0).then(|| count as f64 / time)
}

/// Count divided by occupation time per cell.
pub fn estimate_exec_intensities(counts: &ExecCounts) -> Result<ExecEstimate> {
    let total: f64 = counts.bid_time.iter().chain(&counts.ask_time).flatten().sum();
    if !(total > 0.0) {
        return Err(Error::NoOccupation);
    }
    let col = |c: &Vec<u64>, t: &Vec<f64>| c.iter().zip(t).map(|(&c, &t)| ratio(c, t)).collect::<Vec<_>>();
    Ok(ExecEstimate {
        bid_best: col(&counts.bid[0], &counts.bid_time[0]),
        bid_improved: col(&counts.bid[1], &counts.bid_time[1]),
        ask_best: col(&counts.ask[0], &counts.ask_time[0]),
        ask_improved: col(&counts.ask[1], &counts.ask_time[1]),
    })
}

/// Replaces missing entries by the value at the nearest spread state with data
/// (ties go to the smaller spread). Returns the filled 1-based states.
fn fill_nearest(col: &[Option<f64>]) -> Result<(Vec<f64>, Vec<usize>)> {
    if col.iter().all(Option::is_none) {
        return Err(Error::NoOccupation);
    }
    let mut filled = Vec::new();
    let values = (0..col.len())
        .map(|k| match col[k] {
            Some(v) => v,
            None => {
                filled.push(k + 1);
                let mut d = 1;
                loop {
                    if k >= d {
                        if let Some(v) = col[k - d] {
                            break v;
                        }
                    }
                    if let Some(Some(v)) = col.get(k + d) {
                        break *v;
                    }
                    d += 1;
                }
            }
        })
        .collect();
    Ok((values, filled))
}

impl ExecEstimate {
    /// Complete bid/ask tables, plus a note for every filled cell.
    pub fn to_tables(&self) -> Result<(ExecTable<f64>, ExecTable<f64>, Vec<String>)> {
        let mut notes = Vec::new();
        let mut column = |name: &str, col: &[Option<f64>]| -> Result<Vec<f64>> {
            let (v, filled) = fill_nearest(col)?;
            notes.extend(filled.into_iter().map(|i| format!("{name}: state {i} unobserved, filled from nearest state")));
            Ok(v)
        };
        let bid = ExecTable { at_best: column("Bb", &self.bid_best)?, improved: column("Bb+", &self.bid_improved)? };
        let ask = ExecTable { at_best: column("Ba", &self.ask_best)?, improved: column("Ba-", &self.ask_improved)? };
        Ok((bid, ask, notes))
    }
}
