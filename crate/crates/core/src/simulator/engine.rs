use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::calibration::synthetic::draw_target;
use crate::error::{Error, Result};
use crate::model::{bid_price, ask_price, take_cost, Action, MarketModel, MarketState, QuoteAsk, QuoteBid};
use crate::simulator::config::SimConfig;
use crate::solver::PolicyTable;

/// Trading rule evaluated once per Euler step.
#[derive(Debug, Clone, Copy)]
pub enum Strategy<'a> {
    /// Solved policy, looked up at the nearest inventory node.
    Policy(&'a PolicyTable),
    /// Best bid and best ask with a fixed size on both sides.
    Constant(f64),
    /// Fixed size, each quote best or improved with probability 1/2.
    Random(f64),
}

/// Uniform and normal variates consumed by one step. All strategies consume
/// the same draws, so backtests on a common seed share their randomness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDraws {
    pub spread: f64,
    pub target: f64,
    pub z: f64,
    pub bid: f64,
    pub ask: f64,
    pub quote_bid: f64,
    pub quote_ask: f64,
}

impl StepDraws {
    pub fn sample<R: Rng>(rng: &mut R) -> Self {
        Self {
            spread: rng.random(),
            target: rng.random(),
            z: rng.sample(StandardNormal),
            bid: rng.random(),
            ask: rng.random(),
            quote_bid: rng.random(),
            quote_ask: rng.random(),
        }
    }

    /// Draws under which nothing random happens.
    pub fn quiet() -> Self {
        Self { spread: 1.0, target: 0.0, z: 0.0, bid: 1.0, ask: 1.0, quote_bid: 0.0, quote_ask: 0.0 }
    }
}

/// Something that changed cash, inventory or the spread.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    BidFill { t: f64, qb: QuoteBid, p: f64, i: usize, size: f64 },
    AskFill { t: f64, qa: QuoteAsk, p: f64, i: usize, size: f64 },
    Take { t: f64, e: f64, p: f64, i: usize },
    SpreadJump { t: f64, from: usize, to: usize },
    Liquidation { t: f64, e: f64, p: f64, i: usize },
}

/// What happened during one step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepEvents {
    pub bid: Option<(QuoteBid, f64)>,
    pub ask: Option<(QuoteAsk, f64)>,
    pub take: Option<f64>,
    pub jump: Option<(usize, usize)>,
}

/// Advances the state by `dt` with the given draws.
///
/// A market order is executed at the start of the step and replaces the limit
/// orders for that step. Limit fills are priced at the mid price and spread
/// prevailing at the start of the step; the spread then jumps and the mid
/// price moves.
pub fn step_with(
    state: &MarketState<f64>,
    action: &Action,
    model: &MarketModel<f64>,
    dt: f64,
    clock_time: f64,
    d: &StepDraws,
) -> Result<(MarketState<f64>, StepEvents)> {
    let mut s = *state;
    let mut ev = StepEvents::default();
    let (grid, fees) = (&model.grid, &model.fees);
    match *action {
        Action::Take { e } => {
            s.x -= take_cost(e, s.p, s.i, grid, fees);
            s.y += e;
            ev.take = Some(e);
        }
        Action::Make { qb, qa, lb, la } => {
            if lb > 0.0 && d.bid < model.bid_rate(qb, s.i) * dt {
                s.x -= bid_price(qb, s.p, s.i, grid, fees)? * lb;
                s.y += lb;
                ev.bid = Some((qb, lb));
            }
            if la > 0.0 && d.ask < model.ask_rate(qa, s.i) * dt {
                s.x += ask_price(qa, s.p, s.i, grid, fees)? * la;
                s.y -= la;
                ev.ask = Some((qa, la));
            }
        }
    }
    if d.spread < model.tick_clock.rate_at(clock_time) * dt {
        let to = draw_target(&model.rho, s.i, d.target);
        if to != s.i {
            ev.jump = Some((s.i, to));
            s.i = to;
        }
    }
    s.p += model.price.drift * dt + model.price.sigma * dt.sqrt() * d.z;
    s.t += dt;
    Ok((s, ev))
}

/// [`step_with`] with fresh draws from `rng`.
pub fn step<R: Rng>(
    state: &MarketState<f64>,
    action: &Action,
    model: &MarketModel<f64>,
    dt: f64,
    rng: &mut R,
) -> Result<(MarketState<f64>, StepEvents)> {
    step_with(state, action, model, dt, state.t, &StepDraws::sample(rng))
}

/// Outcome of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    /// Cash after terminal liquidation.
    pub x_t: f64,
    pub n_bid: u32,
    pub n_ask: u32,
    /// Market orders, terminal liquidation included.
    pub n_market: u32,
    pub max_abs_y: f64,
    /// Inventory before liquidation.
    pub y_t: f64,
    pub p_t: f64,
    /// Policy lookups outside the inventory grid.
    pub clamped: u32,
}

impl<'a> Strategy<'a> {
    fn action(&self, t: f64, y: f64, i: usize, d: &StepDraws, clamped: &mut u32) -> Action {
        match *self {
            Strategy::Policy(p) => {
                let (a, c) = p.lookup(t, y, i);
                *clamped += u32::from(c);
                *a
            }
            Strategy::Constant(l) => Action::Make { qb: QuoteBid::Bb, qa: QuoteAsk::Ba, lb: l, la: l },
            Strategy::Random(l) => {
                let improved = |u: f64| i > 1 && u < 0.5;
                let qb = if improved(d.quote_bid) { QuoteBid::BbPlus } else { QuoteBid::Bb };
                let qa = if improved(d.quote_ask) { QuoteAsk::BaMinus } else { QuoteAsk::Ba };
                Action::Make { qb, qa, lb: l, la: l }
            }
        }
    }

    pub fn validate(&self, model: &MarketModel<f64>) -> Result<()> {
        match self {
            Strategy::Policy(p) => {
                if p.grid.m != model.m() {
                    return Err(Error::InvalidConfig(format!(
                        "policy has {} spread states, model has {}",
                        p.grid.m,
                        model.m()
                    )));
                }
                Ok(())
            }
            Strategy::Constant(l) | Strategy::Random(l) if !(*l >= 0.0) || !l.is_finite() => {
                Err(Error::InvalidConfig(format!("order size must be nonnegative, got {l}")))
            }
            _ => Ok(()),
        }
    }
}

/// Random stream of path `index`: independent of every other path and of
/// the order in which paths are run.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn simulate(
    strategy: &Strategy,
    model: &MarketModel<f64>,
    cfg: &SimConfig,
    index: u64,
    mut log: Option<&mut Vec<Event>>,
) -> Result<PathResult> {
    let mut rng = path_rng(cfg.seed, index);
    let mut s = MarketState { x: cfg.x0, y: cfg.y0, p: cfg.p0, i: cfg.i0, t: 0.0 };
    let mut out = PathResult {
        x_t: 0.0,
        n_bid: 0,
        n_ask: 0,
        n_market: 0,
        max_abs_y: cfg.y0.abs(),
        y_t: 0.0,
        p_t: 0.0,
        clamped: 0,
    };
    for k in 0..cfg.n_steps() {
        let (t, dt) = cfg.step_span(k);
        s.t = t;
        let d = StepDraws::sample(&mut rng);
        let action = strategy.action(t, s.y, s.i, &d, &mut out.clamped);
        let before = s;
        let (next, ev) = step_with(&s, &action, model, dt, cfg.clock_offset + t, &d)?;
        if let Some(e) = ev.take {
            out.n_market += 1;
            out.max_abs_y = out.max_abs_y.max((before.y + e).abs());
            if let Some(l) = log.as_deref_mut() {
                l.push(Event::Take { t, e, p: before.p, i: before.i });
            }
        }
        if let Some((qb, size)) = ev.bid {
            out.n_bid += 1;
            out.max_abs_y = out.max_abs_y.max((before.y + size).abs());
            if let Some(l) = log.as_deref_mut() {
                l.push(Event::BidFill { t, qb, p: before.p, i: before.i, size });
            }
        }
        if let Some((qa, size)) = ev.ask {
            out.n_ask += 1;
            if let Some(l) = log.as_deref_mut() {
                l.push(Event::AskFill { t, qa, p: before.p, i: before.i, size });
            }
        }
        if let (Some((from, to)), Some(l)) = (ev.jump, log.as_deref_mut()) {
            l.push(Event::SpreadJump { t: t + dt, from, to });
        }
        out.max_abs_y = out.max_abs_y.max(next.y.abs());
        s = next;
    }
    s.t = cfg.horizon;
    out.y_t = s.y;
    out.p_t = s.p;
    if s.y != 0.0 {
        let e = -s.y;
        s.x -= take_cost(e, s.p, s.i, &model.grid, &model.fees);
        out.n_market += 1;
        if let Some(l) = log {
            l.push(Event::Liquidation { t: cfg.horizon, e, p: s.p, i: s.i });
        }
    }
    out.x_t = s.x;
    Ok(out)
}

/// Simulates path `index`; a pure function of `(strategy, model, config, index)`.
pub fn run_path(strategy: &Strategy, model: &MarketModel<f64>, cfg: &SimConfig, index: u64) -> Result<PathResult> {
    simulate(strategy, model, cfg, index, None)
}

/// [`run_path`] with the list of fills, market orders and spread jumps.
pub fn run_path_with_log(
    strategy: &Strategy,
    model: &MarketModel<f64>,
    cfg: &SimConfig,
    index: u64,
) -> Result<(PathResult, Vec<Event>)> {
    let mut log = Vec::new();
    let r = simulate(strategy, model, cfg, index, Some(&mut log))?;
    Ok((r, log))
}

/// Recomputes terminal cash and inventory from an event log.
pub fn replay(events: &[Event], model: &MarketModel<f64>, x0: f64, y0: f64) -> Result<(f64, f64)> {
    let (grid, fees) = (&model.grid, &model.fees);
    let (mut x, mut y) = (x0, y0);
    for ev in events {
        match *ev {
            Event::BidFill { qb, p, i, size, .. } => {
                x -= bid_price(qb, p, i, grid, fees)? * size;
                y += size;
            }
            Event::AskFill { qa, p, i, size, .. } => {
                x += ask_price(qa, p, i, grid, fees)? * size;
                y -= size;
            }
            Event::Take { e, p, i, .. } | Event::Liquidation { e, p, i, .. } => {
                x -= take_cost(e, p, i, grid, fees);
                y += e;
            }
            Event::SpreadJump { .. } => {}
        }
    }
    Ok((x, y))
}
