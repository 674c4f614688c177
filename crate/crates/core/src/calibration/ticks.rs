use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One level-1 observation. Volumes are increments since the previous record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub ts: f64,
    pub bid: f64,
    pub ask: f64,
    pub bid_sz: f64,
    pub ask_sz: f64,
    pub buy_vol: f64,
    pub sell_vol: f64,
}

impl TickRecord {
    pub fn spread(&self) -> f64 {
        self.ask - self.bid
    }

    fn validate(&self, row: usize) -> Result<()> {
        let bad = |reason: &str| Err(Error::InvalidTick { row, reason: reason.to_string() });
        let all = [self.ts, self.bid, self.ask, self.bid_sz, self.ask_sz, self.buy_vol, self.sell_vol];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("non-finite field");
        }
        if !(self.ask > self.bid) {
            return bad("ask must exceed bid");
        }
        if self.buy_vol < 0.0 || self.sell_vol < 0.0 {
            return bad("traded volumes must be >= 0");
        }
        if self.bid_sz < 0.0 || self.ask_sz < 0.0 {
            return bad("quote sizes must be >= 0");
        }
        Ok(())
    }
}

/// Checks record invariants and timestamp ordering.
pub fn validate_ticks(ticks: &[TickRecord]) -> Result<()> {
    if ticks.is_empty() {
        return Err(Error::EmptyInput);
    }
    for (row, t) in ticks.iter().enumerate() {
        t.validate(row)?;
        if row > 0 && t.ts < ticks[row - 1].ts {
            return Err(Error::UnsortedTimestamps { row });
        }
    }
    Ok(())
}

/// Reads `ts,bid,ask,bid_sz,ask_sz,buy_vol,sell_vol` CSV.
pub fn read_ticks<R: Read>(reader: R) -> Result<Vec<TickRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let expected = ["ts", "bid", "ask", "bid_sz", "ask_sz", "buy_vol", "sell_vol"];
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(expected.iter().copied()) {
        return Err(Error::InvalidTick { row: 0, reason: format!("expected header `{}`", expected.join(",")) });
    }
    let ticks = rdr.deserialize().collect::<std::result::Result<Vec<TickRecord>, _>>()?;
    validate_ticks(&ticks)?;
    Ok(ticks)
}

pub fn write_ticks<W: Write>(writer: W, ticks: &[TickRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for t in ticks {
        w.serialize(t)?;
    }
    w.flush()?;
    Ok(())
}
