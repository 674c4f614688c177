use crate::calibration::ticks::{validate_ticks, TickRecord};
use crate::error::Result;
use crate::model::SpreadGrid;

/// Gap between records that splits the data into separate sessions (4 hours).
pub const SESSION_GAP: f64 = 4.0 * 3600.0;

/// A run of records whose spread stayed inside `1..=m`.
///
/// `theta[0]` is the segment start; `theta[n]` for `n >= 1` are spread jump
/// times. `records[n]` is the index of the tick record observed at `theta[n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpSegment {
    pub theta: Vec<f64>,
    pub shat: Vec<usize>,
    pub records: Vec<usize>,
    pub end: f64,
}

impl JumpSegment {
    fn start(ts: f64, state: usize, record: usize) -> Self {
        Self { theta: vec![ts], shat: vec![state], records: vec![record], end: ts }
    }

    pub fn transitions(&self) -> usize {
        self.shat.len() - 1
    }
}

/// Spread chain in tick time reconstructed from level-1 data.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadJumpSeries {
    pub segments: Vec<JumpSegment>,
    /// Every observed spread change, including moves to or from states above `m`.
    pub clock_jumps: Vec<f64>,
    /// `(start, end)` of each session; sessions are split by gaps over [`SESSION_GAP`].
    pub sessions: Vec<(f64, f64)>,
    /// Records whose spread fell outside `1..=m`.
    pub skipped_records: usize,
}

impl SpreadJumpSeries {
    /// Jump times `theta_n`, `n >= 1`, over all segments.
    pub fn jump_times(&self) -> Vec<f64> {
        self.segments.iter().flat_map(|s| s.theta[1..].iter().copied()).collect()
    }

    pub fn transition_count(&self) -> usize {
        self.segments.iter().map(JumpSegment::transitions).sum()
    }

    pub fn horizon(&self) -> f64 {
        self.sessions.iter().map(|(a, b)| b - a).sum()
    }
}

/// Spread in ticks, rounded to the nearest integer.
fn raw_state(t: &TickRecord, delta: f64) -> i64 {
    (t.spread() / delta).round() as i64
}

/// Reconstructs the jump times and tick-time spread chain.
pub fn extract_spread_jumps(ticks: &[TickRecord], grid: &SpreadGrid<f64>) -> Result<SpreadJumpSeries> {
    validate_ticks(ticks)?;
    let m = grid.m() as i64;
    let delta = grid.delta();

    let mut series = SpreadJumpSeries {
        segments: Vec::new(),
        clock_jumps: Vec::new(),
        sessions: Vec::new(),
        skipped_records: 0,
    };
    let mut current: Option<JumpSegment> = None;
    let mut session_start = ticks[0].ts;
    let mut prev_raw: Option<i64> = None;
    let mut prev_ts = ticks[0].ts;

    for (row, tick) in ticks.iter().enumerate() {
        if row > 0 && tick.ts - prev_ts > SESSION_GAP {
            if let Some(mut seg) = current.take() {
                seg.end = prev_ts;
                series.segments.push(seg);
            }
            series.sessions.push((session_start, prev_ts));
            session_start = tick.ts;
            prev_raw = None;
        }
        let raw = raw_state(tick, delta);
        if prev_raw.is_some_and(|p| p != raw) {
            series.clock_jumps.push(tick.ts);
        }
        prev_raw = Some(raw);
        prev_ts = tick.ts;

        if raw < 1 || raw > m {
            series.skipped_records += 1;
            if let Some(mut seg) = current.take() {
                seg.end = tick.ts;
                series.segments.push(seg);
            }
            continue;
        }
        let state = raw as usize;
        match current.as_mut() {
            None => current = Some(JumpSegment::start(tick.ts, state, row)),
            Some(seg) => {
                if *seg.shat.last().expect("segment is never empty") != state {
                    seg.theta.push(tick.ts);
                    seg.shat.push(state);
                    seg.records.push(row);
                }
                seg.end = tick.ts;
            }
        }
    }
    if let Some(seg) = current.take() {
        series.segments.push(seg);
    }
    series.sessions.push((session_start, prev_ts));
    if series.skipped_records > 0 {
        log::info!("{} records with spread outside 1..={} skipped", series.skipped_records, m);
    }
    Ok(series)
}
