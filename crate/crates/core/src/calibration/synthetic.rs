//! Synthetic level-1 data and execution logs drawn from a known model, used
//! for estimator round trips and as fixtures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};

use crate::calibration::estimators::QuoteRegime;
use crate::calibration::ticks::TickRecord;
use crate::error::{Error, Result};
use crate::model::{MarketModel, QuoteAsk, QuoteBid};

/// Draws the next state from row `i` (1-based) of the jump matrix.
pub fn draw_target(rho: &[Vec<f64>], i: usize, u: f64) -> usize {
    let row = &rho[i - 1];
    let mut acc = 0.0;
    let mut last = i;
    for (j, &p) in row.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = j + 1;
        if u < acc {
            return j + 1;
        }
    }
    last
}

/// Exact simulation of the spread chain on `[t0, t1)`, subordinated to the
/// piecewise-constant tick clock evaluated at `clock_time(t)`.
///
/// Returns `(jump time, new state)` pairs.
pub fn simulate_spread_path<R: Rng>(
    model: &MarketModel<f64>,
    t0: f64,
    t1: f64,
    i0: usize,
    clock_time: impl Fn(f64) -> f64,
    rng: &mut R,
) -> Vec<(f64, usize)> {
    let bounds = model.tick_clock.boundaries();
    let mut out = Vec::new();
    let mut t = t0;
    let mut i = i0;
    while t < t1 {
        let ct = clock_time(t);
        let rate = model.tick_clock.rate_at(ct);
        // next clock boundary strictly after the current clock time
        let k = bounds.partition_point(|b| *b <= ct);
        let next_change = bounds.get(k).map_or(f64::INFINITY, |b| t + (b - ct));
        let stop = next_change.min(t1);
        if rate <= 0.0 {
            t = stop;
            continue;
        }
        let w: f64 = Exp::new(rate).expect("positive rate").sample(rng);
        if t + w >= stop {
            t = stop;
            continue;
        }
        t += w;
        i = draw_target(&model.rho, i, rng.random());
        out.push((t, i));
    }
    out
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub days: usize,
    /// Session start in seconds after midnight.
    pub session_start: f64,
    pub session_length: f64,
    /// Market order arrival rate per side, s^-1.
    pub market_order_rate: f64,
    pub mean_order_size: f64,
    pub mean_queue_size: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            days: 1,
            session_start: crate::model::reference::SESSION_START,
            session_length: 7.0 * 3600.0,
            market_order_rate: 0.2,
            mean_order_size: 150.0,
            mean_queue_size: 300.0,
            seed: 7,
        }
    }
}

const DAY: f64 = 86_400.0;

/// Generates a tick stream: one record per spread change and per market order.
///
/// Timestamps are seconds from the midnight of day 0; the tick clock is
/// evaluated on time of day.
pub fn synthesize_ticks(model: &MarketModel<f64>, cfg: &SynthConfig) -> Result<Vec<TickRecord>> {
    if cfg.days == 0 || !(cfg.session_length > 0.0) || cfg.session_length + cfg.session_start > DAY {
        return Err(Error::InvalidConfig("synthetic sessions must fit inside a day".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let delta = model.grid.delta();
    let p0 = model.price.p0;
    let queue = Exp::new(1.0 / cfg.mean_queue_size.max(1e-9)).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let order = Exp::new(1.0 / cfg.mean_order_size.max(1e-9)).map_err(|e| Error::InvalidConfig(e.to_string()))?;

    let mut ticks = Vec::new();
    for d in 0..cfg.days {
        let start = d as f64 * DAY + cfg.session_start;
        let end = start + cfg.session_length;
        let i0 = 1 + (rng.random::<f64>() * model.m() as f64) as usize;
        let jumps = simulate_spread_path(model, start, end, i0.min(model.m()), |t| t.rem_euclid(DAY), &mut rng);

        // market orders: (time, is_buy)
        let mut orders = Vec::new();
        if cfg.market_order_rate > 0.0 {
            let gap = Exp::new(2.0 * cfg.market_order_rate).expect("positive rate");
            let mut t = start + gap.sample(&mut rng);
            while t < end {
                orders.push((t, rng.random::<bool>()));
                t += gap.sample(&mut rng);
            }
        }

        let quote = |ts: f64, i: usize, rng: &mut ChaCha8Rng| {
            let half = i as f64 * delta / 2.0;
            TickRecord {
                ts,
                bid: p0 - half,
                ask: p0 + half,
                bid_sz: queue.sample(rng).round().max(1.0),
                ask_sz: queue.sample(rng).round().max(1.0),
                buy_vol: 0.0,
                sell_vol: 0.0,
            }
        };
        let mut state = i0.min(model.m());
        let mut current = quote(start, state, &mut rng);
        ticks.push(current);
        let (mut a, mut b) = (0, 0);
        while a < jumps.len() || b < orders.len() {
            let take_jump = b >= orders.len() || (a < jumps.len() && jumps[a].0 <= orders[b].0);
            if take_jump {
                let (t, j) = jumps[a];
                a += 1;
                state = j;
                current = quote(t, state, &mut rng);
                ticks.push(current);
            } else {
                let (t, is_buy) = orders[b];
                b += 1;
                let size = order.sample(&mut rng).round().max(1.0);
                let mut rec = TickRecord { ts: t, buy_vol: 0.0, sell_vol: 0.0, ..current };
                if is_buy {
                    rec.buy_vol = size;
                } else {
                    rec.sell_vol = size;
                }
                ticks.push(rec);
            }
        }
    }
    Ok(ticks)
}

/// Simulates the observed execution processes of an agent who re-draws its
/// quotes uniformly among the admissible ones at every spread change and at
/// the jumps of an independent Poisson clock of rate `requote_rate`.
pub fn simulate_quote_regimes(
    model: &MarketModel<f64>,
    horizon: f64,
    requote_rate: f64,
    seed: u64,
) -> Result<Vec<QuoteRegime>> {
    if !(horizon > 0.0) || !(requote_rate > 0.0) {
        return Err(Error::InvalidConfig("horizon and requote rate must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jumps = simulate_spread_path(model, 0.0, horizon, 1, |t| t, &mut rng);
    let requote = Exp::new(requote_rate).expect("positive rate");

    let draw_quotes = |i: usize, rng: &mut ChaCha8Rng| {
        let bids = QuoteBid::admissible(i);
        let asks = QuoteAsk::admissible(i);
        (bids[rng.random_range(0..bids.len())], asks[rng.random_range(0..asks.len())])
    };
    let fills = |rate: f64, dt: f64, rng: &mut ChaCha8Rng| -> u64 {
        let mean = rate * dt;
        if mean > 0.0 {
            Poisson::new(mean).expect("positive mean").sample(rng) as u64
        } else {
            0
        }
    };

    let mut regimes = Vec::new();
    let mut t = 0.0;
    let mut i = 1;
    let mut next_jump = 0;
    let mut next_requote = requote.sample(&mut rng);
    let (mut qb, mut qa) = draw_quotes(i, &mut rng);
    while t < horizon {
        let jump_t = jumps.get(next_jump).map_or(horizon, |j| j.0);
        let end = jump_t.min(next_requote).min(horizon);
        let dt = end - t;
        let bid_rate = model.exec_bid.rate(qb.is_improved(), i);
        let ask_rate = model.exec_ask.rate(qa.is_improved(), i);
        regimes.push(QuoteRegime {
            start: t,
            end,
            i,
            qb,
            qa,
            bid_fills: fills(bid_rate, dt, &mut rng),
            ask_fills: fills(ask_rate, dt, &mut rng),
        });
        t = end;
        if end == jump_t && next_jump < jumps.len() {
            i = jumps[next_jump].1;
            next_jump += 1;
        }
        if end == next_requote {
            next_requote += requote.sample(&mut rng);
        }
        (qb, qa) = draw_quotes(i, &mut rng);
    }
    Ok(regimes)
}
