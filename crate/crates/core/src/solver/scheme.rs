//! Explicit backward scheme shared by both objectives.
//!
//! Values live in flat slices indexed `[y_node * m + (i - 1)]`. Every node of a
//! substep reads only the previous iterate, so the parallel schedule cannot
//! change a single bit of the result.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{make_margin, take_margin, Action, FeeSchedule, MarketModel, QuoteAsk, QuoteBid, SpreadGrid};
use crate::scalar::Real;
use crate::solver::grid::{Objective, SolverGrid, SolverParams};
use crate::solver::surface::ValueSurface;

/// Largest `dtau * (total jump rate)` allowed in one internal step.
pub const MAX_JUMP_PROBABILITY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Maximize `phi`.
    Mean,
    /// Minimize the multiplicative `phi`.
    Exp,
}

impl Mode {
    fn of(objective: Objective) -> Self {
        match objective {
            Objective::MeanPenalty => Mode::Mean,
            Objective::Exponential => Mode::Exp,
        }
    }

    #[inline]
    fn better<T: Real>(self, a: T, b: T) -> bool {
        match self {
            Mode::Mean => a > b,
            Mode::Exp => a < b,
        }
    }

    /// Whether a market order value `cand` beats the continuation `v` by more than the tie margin.
    #[inline]
    fn improves<T: Real>(self, cand: T, v: T, tie: T) -> bool {
        match self {
            Mode::Mean => cand > v + tie,
            Mode::Exp => cand < v - tie * v,
        }
    }
}

/// Charge of a market order of `s` steps in state `i`: an additive cost for
/// the mean objective, a multiplicative factor for the exponential one.
fn take_charges<T: Real>(mode: Mode, tm: T, eps: T, eta: T, dy: T, steps: usize) -> Vec<T> {
    (0..=steps)
        .map(|s| {
            let cost = T::of_usize(s) * dy * tm + eps;
            match mode {
                Mode::Mean => cost,
                Mode::Exp => (eta * cost).exp(),
            }
        })
        .collect()
}

/// Best single market order from node `k`. Candidates are scanned by size,
/// toward zero inventory first, so that mirrored nodes break ties the same way.
#[inline]
fn scan_takes<T: Real>(
    mode: Mode,
    get: impl Fn(usize) -> T,
    charges: &[T],
    k: usize,
    n_y: usize,
    y: i64,
) -> Option<(T, i64)> {
    let toward: i64 = if y > 0 { -1 } else { 1 };
    let mut best: Option<(T, i64)> = None;
    for s in 1..charges.len() {
        for sign in [toward, -toward] {
            let kk = k as i64 + sign * s as i64;
            if kk < 0 || kk >= n_y as i64 {
                continue;
            }
            let target = get(kk as usize);
            let val = match mode {
                Mode::Mean => target - charges[s],
                Mode::Exp => charges[s] * target,
            };
            if best.is_none_or(|(b, _)| mode.better(val, b)) {
                best = Some((val, sign * s as i64));
            }
        }
    }
    best
}

/// Result of the intervention operator at one inventory node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intervention<T> {
    /// Best value reachable with one market order; `None` when no order fits the grid.
    pub value: Option<T>,
    /// Signed order size of the argmax (shares), 0 when `value` is `None`.
    pub e: i64,
}

/// One application of the market order operator to the values of spread
/// state `i` across the inventory grid. `e = 0` is never a candidate.
pub fn intervention_operator<T: Real>(
    column: &[T],
    i: usize,
    spread: &SpreadGrid<T>,
    fees: &FeeSchedule<T>,
    grid: &SolverGrid,
    params: &SolverParams,
) -> Result<Vec<Intervention<T>>> {
    spread.check(i)?;
    if column.len() != grid.n_y() {
        return Err(Error::InvalidConfig(format!("column has {} nodes, grid has {}", column.len(), grid.n_y())));
    }
    let mode = Mode::of(params.objective);
    let charges = take_charges(
        mode,
        take_margin(i, spread, fees),
        fees.fixed_fee,
        T::lit(params.eta),
        T::of_i64(grid.dy),
        (params.ebar / grid.dy) as usize,
    );
    Ok((0..grid.n_y())
        .map(|k| match scan_takes(mode, |kk| column[kk], &charges, k, grid.n_y(), grid.y_at(k)) {
            Some((value, s)) => Intervention { value: Some(value), e: s * grid.dy },
            None => Intervention { value: None, e: 0 },
        })
        .collect())
}

/// Exact terminal value at inventory `y` in state `i`.
fn terminal_value<T: Real>(mode: Mode, y: i64, tm: T, eps: T, eta: T) -> T {
    let abs_y = T::of_i64(y.abs());
    match mode {
        Mode::Mean => -(abs_y * tm + eps),
        Mode::Exp => (eta * abs_y * tm).exp(),
    }
}

/// Terminal condition of the objective at `(y, i)`.
pub fn terminal_condition<T: Real>(
    objective: Objective,
    y: i64,
    i: usize,
    spread: &SpreadGrid<T>,
    fees: &FeeSchedule<T>,
    params: &SolverParams,
) -> T {
    terminal_value(Mode::of(objective), y, take_margin(i, spread, fees), fees.fixed_fee, T::lit(params.eta))
}

/// Argmax of the make Hamiltonian on one side: (quote level, size steps).
#[derive(Debug, Clone, Copy, Default)]
struct SideChoice {
    level: usize,
    steps: usize,
}

struct Kernel<T> {
    mode: Mode,
    m: usize,
    n_y: usize,
    y: Vec<i64>,
    rho: Vec<T>,
    /// `rates[side][level][i]`, side 0 bid and 1 ask.
    rates: [[Vec<T>; 2]; 2],
    margin: [Vec<T>; 2],
    sizes: Vec<T>,
    make_steps: usize,
    /// Exponential only: `exp(-eta * margin * size)` at `[(level * m + i) * (make_steps + 1) + s]`.
    make_factor: Vec<T>,
    /// Take charges per state, `[i][s]`.
    take: Vec<Vec<T>>,
    /// Penalty term per node: `-gamma g(y)` or the price growth rate.
    running: Vec<T>,
    tie: T,
    floor: T,
}

impl<T: Real> Kernel<T> {
    fn new(model: &MarketModel<T>, grid: &SolverGrid, params: &SolverParams) -> Self {
        let mode = Mode::of(params.objective);
        let m = model.grid.m();
        let n_y = grid.n_y();
        let dy = T::of_i64(grid.dy);
        let make_steps = (params.lbar / grid.dy) as usize;
        let take_steps = (params.ebar / grid.dy) as usize;
        let eta = T::lit(params.eta);
        let rho = model.rho.iter().flatten().copied().collect();
        let level_rates = |t: &crate::model::ExecTable<T>| [t.at_best.clone(), t.improved.clone()];
        let margin = [false, true].map(|imp| (1..=m).map(|i| make_margin(imp, i, &model.grid, &model.fees)).collect());
        let sizes: Vec<T> = (0..=make_steps.max(take_steps)).map(|s| T::of_usize(s) * dy).collect();
        let make_factor = match mode {
            Mode::Mean => Vec::new(),
            Mode::Exp => {
                let mut f = Vec::with_capacity(2 * m * (make_steps + 1));
                for lvl in 0..2 {
                    for i in 0..m {
                        for s in 0..=make_steps {
                            let mg: &Vec<T> = &margin[lvl];
                            f.push((-(eta * mg[i] * sizes[s])).exp());
                        }
                    }
                }
                f
            }
        };
        let take = (1..=m)
            .map(|i| take_charges(mode, take_margin(i, &model.grid, &model.fees), model.fees.fixed_fee, eta, dy, take_steps))
            .collect();
        let y: Vec<i64> = (0..n_y).map(|k| grid.y_at(k)).collect();
        let running = y
            .iter()
            .map(|&yk| match mode {
                Mode::Mean => {
                    let u = T::of_i64(yk) / T::lit(params.inventory_unit);
                    -(T::lit(params.gamma) * u * u)
                }
                Mode::Exp => {
                    let ey = eta * T::of_i64(yk);
                    T::lit(0.5 * params.sigma * params.sigma) * ey * ey - T::lit(params.drift) * ey
                }
            })
            .collect();
        Self {
            mode,
            m,
            n_y,
            y,
            rho,
            rates: [level_rates(&model.exec_bid), level_rates(&model.exec_ask)],
            margin,
            sizes,
            make_steps,
            make_factor,
            take,
            running,
            tie: T::lit(params.tie_eps),
            floor: T::positive_floor(),
        }
    }

    /// Total event rate bound used to pick the internal step.
    fn max_rate(&self, clock_max: T) -> T {
        let mut worst = T::zero();
        for i in 0..self.m {
            let out: T = (0..self.m).filter(|&j| j != i).map(|j| self.rho[i * self.m + j]).fold(T::zero(), |a, b| a + b);
            let levels = if i == 0 { 1 } else { 2 };
            let side = |s: usize| (0..levels).map(|l| self.rates[s][l][i]).fold(T::zero(), T::max);
            worst = worst.max(clock_max * out + side(0) + side(1));
        }
        let decay = match self.mode {
            Mode::Mean => T::zero(),
            Mode::Exp => self.running.iter().fold(T::zero(), |a, &r| a.max(-r)),
        };
        worst + decay
    }

    fn side(&self, cur: &[T], k: usize, i: usize, side: usize) -> (T, SideChoice) {
        let v = cur[k * self.m + i];
        let reach = if side == 0 { self.n_y - 1 - k } else { k };
        let steps = self.make_steps.min(reach);
        let mut best = T::zero();
        let mut arg = SideChoice::default();
        let levels = if i == 0 { 1 } else { 2 };
        for lvl in 0..levels {
            let rate = self.rates[side][lvl][i];
            if rate == T::zero() {
                continue;
            }
            for s in 1..=steps {
                let kk = if side == 0 { k + s } else { k - s };
                let shifted = cur[kk * self.m + i];
                let gain = match self.mode {
                    Mode::Mean => rate * ((shifted - v) + self.margin[lvl][i] * self.sizes[s]),
                    Mode::Exp => {
                        rate * (self.make_factor[(lvl * self.m + i) * (self.make_steps + 1) + s] * shifted - v)
                    }
                };
                if self.mode.better(gain, best) {
                    best = gain;
                    arg = SideChoice { level: lvl, steps: s };
                }
            }
        }
        (best, arg)
    }

    /// One explicit step of the make dynamics at node `(k, i)` (0-based `i`).
    #[inline]
    fn make_node(&self, cur: &[T], k: usize, i: usize, clock: T, dt: T) -> (T, SideChoice, SideChoice) {
        let m = self.m;
        let v = cur[k * m + i];
        let mut spread = T::zero();
        for j in 0..m {
            if j != i {
                spread += self.rho[i * m + j] * (cur[k * m + j] - v);
            }
        }
        let (bid, bc) = self.side(cur, k, i, 0);
        let (ask, ac) = self.side(cur, k, i, 1);
        let run = match self.mode {
            Mode::Mean => self.running[k],
            Mode::Exp => self.running[k] * v,
        };
        (v + dt * (clock * spread + (bid + ask) + run), bc, ac)
    }

    fn make_step(&self, cur: &[T], next: &mut [T], clock: T, dt: T, choices: Option<&mut [(SideChoice, SideChoice)]>) {
        let m = self.m;
        match choices {
            Some(ch) => next.par_chunks_mut(m).zip(ch.par_chunks_mut(m)).enumerate().for_each(|(k, (out, c))| {
                for i in 0..m {
                    let (v, bc, ac) = self.make_node(cur, k, i, clock, dt);
                    out[i] = v;
                    c[i] = (bc, ac);
                }
            }),
            None => next.par_chunks_mut(m).enumerate().for_each(|(k, out)| {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = self.make_node(cur, k, i, clock, dt).0;
                }
            }),
        }
    }

    /// Applies market orders until no node improves: the obstacle holds
    /// exactly afterwards, multi-order unwinds included. `takes` receives the
    /// first order of the chain in steps of `dy` (0 where none is taken).
    fn obstacle(&self, values: &mut Vec<T>, scratch: &mut Vec<T>, takes: &mut [i64]) {
        takes.iter_mut().for_each(|e| *e = 0);
        if self.take[0].len() <= 1 {
            return;
        }
        let m = self.m;
        loop {
            let cur = &*values;
            let changed = scratch
                .par_chunks_mut(m)
                .zip(takes.par_chunks_mut(m))
                .enumerate()
                .map(|(k, (out, tk))| {
                    let mut changed = false;
                    for i in 0..m {
                        let v = cur[k * m + i];
                        out[i] = v;
                        if let Some((cand, e)) =
                            scan_takes(self.mode, |kk| cur[kk * m + i], &self.take[i], k, self.n_y, self.y[k])
                        {
                            if self.mode.improves(cand, v, self.tie) {
                                out[i] = cand;
                                tk[i] = e;
                                changed = true;
                            }
                        }
                    }
                    changed
                })
                .reduce(|| false, |a, b| a || b);
            std::mem::swap(values, scratch);
            if !changed {
                break;
            }
        }
    }

    /// Raises exponential values to the positivity floor; returns how many were raised.
    fn apply_floor(&self, values: &mut [T]) -> usize {
        if self.mode == Mode::Mean {
            return 0;
        }
        values
            .par_iter_mut()
            .map(|v| {
                if *v < self.floor || v.is_nan() {
                    *v = self.floor;
                    1
                } else {
                    0
                }
            })
            .sum()
    }

    fn action(&self, dy: i64, i: usize, make: (SideChoice, SideChoice), take: i64) -> Action {
        if take != 0 {
            return Action::take((take * dy) as f64);
        }
        let (b, a) = make;
        let qb = if b.level == 1 { QuoteBid::BbPlus } else { QuoteBid::Bb };
        let qa = if a.level == 1 { QuoteAsk::BaMinus } else { QuoteAsk::Ba };
        debug_assert!(i > 0 || (b.level == 0 && a.level == 0));
        Action::Make { qb, qa, lb: (b.steps as i64 * dy) as f64, la: (a.steps as i64 * dy) as f64 }
    }
}

fn check_shapes<T: Real>(model: &MarketModel<T>) -> Result<()> {
    let m = model.grid.m();
    let ok = model.rho.len() == m
        && model.rho.iter().all(|r| r.len() == m)
        && [&model.exec_bid, &model.exec_ask].iter().all(|t| t.at_best.len() == m && t.improved.len() == m);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("model tables do not match m = {m}")))
    }
}

/// Backward solve of either reduced system. Only the fields of `model` that
/// enter the reduced system are read; price dynamics come from `params`.
pub(crate) fn solve_surface<T: Real>(
    model: &MarketModel<T>,
    grid: &SolverGrid,
    params: &SolverParams,
) -> Result<ValueSurface<T>> {
    grid.validate()?;
    params.validate(grid)?;
    check_shapes(model)?;
    let kernel = Kernel::new(model, grid, params);
    let m = kernel.m;
    let n_y = kernel.n_y;
    let slice_len = n_y * m;

    let slice_dt = grid.slice_dt();
    let rate = kernel.max_rate(model.tick_clock.max_rate()).as_f64();
    let substeps = grid.substeps.unwrap_or_else(|| ((slice_dt * rate / MAX_JUMP_PROBABILITY).ceil() as usize).max(1));
    let dtau = slice_dt / substeps as f64;
    if dtau * rate > 1.0 {
        return Err(Error::InvalidConfig(format!(
            "{substeps} substeps give a jump probability {} > 1 per step",
            dtau * rate
        )));
    }

    if kernel.mode == Mode::Exp {
        let tm_max = (1..=m).map(|i| take_margin(i, &model.grid, &model.fees).as_f64()).fold(0.0, f64::max);
        let y_abs = grid.y_min.unsigned_abs().max(grid.y_max.unsigned_abs()) as f64;
        let growth = kernel.running.iter().fold(0.0f64, |a, r| a.max(r.as_f64()));
        let exponent = params.eta * (y_abs + params.ebar as f64) * tm_max
            + params.eta * model.fees.fixed_fee.as_f64()
            + grid.horizon * growth;
        let limit = 0.9 * T::max_value().ln().as_f64();
        if exponent > limit {
            return Err(Error::InvalidConfig(format!(
                "exponent bound {exponent:.3} exceeds the range of the scalar type ({limit:.1}); reduce eta or the grid"
            )));
        }
    }

    let eta = T::lit(params.eta);
    let mut values = vec![T::zero(); (grid.n_out + 1) * slice_len];
    let mut cur = vec![T::zero(); slice_len];
    for k in 0..n_y {
        for i in 0..m {
            let tm = take_margin(i + 1, &model.grid, &model.fees);
            cur[k * m + i] = terminal_value(kernel.mode, kernel.y[k], tm, model.fees.fixed_fee, eta);
        }
    }
    values[grid.n_out * slice_len..].copy_from_slice(&cur);

    let placeholder = Action::take(0.0);
    let mut decisions = vec![placeholder; grid.n_out * slice_len];
    let mut next = vec![T::zero(); slice_len];
    let mut scratch = vec![T::zero(); slice_len];
    let mut takes = vec![0i64; slice_len];
    let mut choices = vec![(SideChoice::default(), SideChoice::default()); slice_len];
    let times = grid.times();
    let dt = T::lit(dtau);
    let mut floor_hits = 0;

    for k in (0..grid.n_out).rev() {
        for s in 0..substeps {
            let last = s + 1 == substeps;
            let mid = times[k + 1] - (s as f64 + 0.5) * dtau;
            let clock = model.tick_clock.rate_at(T::lit(grid.clock_offset + mid));
            kernel.make_step(&cur, &mut next, clock, dt, last.then_some(&mut choices[..]));
            kernel.obstacle(&mut next, &mut scratch, &mut takes);
            floor_hits += kernel.apply_floor(&mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        values[k * slice_len..(k + 1) * slice_len].copy_from_slice(&cur);
        let out = &mut decisions[k * slice_len..(k + 1) * slice_len];
        for (idx, a) in out.iter_mut().enumerate() {
            *a = kernel.action(grid.dy, idx % m, choices[idx], takes[idx]);
        }
    }
    if floor_hits > 0 {
        log::warn!("{floor_hits} exponential values were raised to the positivity floor");
    }

    Ok(ValueSurface {
        objective: params.objective,
        grid: SolverGrid { substeps: Some(substeps), ..grid.clone() },
        m,
        values,
        decisions,
        substeps,
        floor_hits,
    })
}
