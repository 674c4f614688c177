use crate::error::{Error, Result};
use crate::model::quote::{Quote, QuoteAsk, QuoteBid};
use crate::scalar::Real;

/// Tick size and number of spread states; state `i` (1-based) is a spread of `i * delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadGrid<T> {
    delta: T,
    m: usize,
}

impl<T: Real> SpreadGrid<T> {
    pub fn new(delta: T, m: usize) -> Result<Self> {
        if !(delta > T::zero()) || !delta.is_finite() {
            return Err(Error::InvalidModel(format!("tick size must be positive, got {delta}")));
        }
        if m == 0 {
            return Err(Error::InvalidModel("need at least one spread state".into()));
        }
        Ok(Self { delta, m })
    }

    #[inline]
    pub fn delta(&self) -> T {
        self.delta
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn check(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.m {
            Err(Error::SpreadOutOfRange { state: i, m: self.m })
        } else {
            Ok(())
        }
    }

    /// Spread value `i * delta`.
    #[inline]
    pub fn spread(&self, i: usize) -> T {
        T::of_usize(i) * self.delta
    }

    #[inline]
    pub fn half_spread(&self, i: usize) -> T {
        T::of_usize(i) * self.delta / T::lit(2.0)
    }

    /// Nearest state index for an observed spread, clamped into `1..=m`.
    pub fn nearest_state(&self, spread: T) -> usize {
        let k = (spread / self.delta).round();
        if !(k >= T::one()) {
            1
        } else {
            k.to_usize().unwrap_or(self.m).min(self.m)
        }
    }

    pub fn cast<U: Real>(&self) -> SpreadGrid<U> {
        SpreadGrid { delta: U::lit(self.delta.as_f64()), m: self.m }
    }
}

/// Per-share maker rebate, per-share taker fee and fixed fee per market order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeeSchedule<T> {
    pub rebate_per_share: T,
    pub take_fee_per_share: T,
    pub fixed_fee: T,
}

impl<T: Real> FeeSchedule<T> {
    pub fn new(rebate_per_share: T, take_fee_per_share: T, fixed_fee: T) -> Result<Self> {
        let fees = Self { rebate_per_share, take_fee_per_share, fixed_fee };
        fees.validate()?;
        Ok(fees)
    }

    pub fn zero() -> Self {
        Self { rebate_per_share: T::zero(), take_fee_per_share: T::zero(), fixed_fee: T::zero() }
    }

    /// Only the fixed fee, as in the plain cost function.
    pub fn fixed_only(fixed_fee: T) -> Self {
        Self { fixed_fee, ..Self::zero() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rebate_per_share", self.rebate_per_share),
            ("take_fee_per_share", self.take_fee_per_share),
            ("fixed_fee", self.fixed_fee),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::InvalidModel(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> FeeSchedule<U> {
        FeeSchedule {
            rebate_per_share: U::lit(self.rebate_per_share.as_f64()),
            take_fee_per_share: U::lit(self.take_fee_per_share.as_f64()),
            fixed_fee: U::lit(self.fixed_fee.as_f64()),
        }
    }
}

/// Piecewise-constant intensity of the tick-time clock.
///
/// `rates[k]` applies on `[boundaries[k], boundaries[k + 1])`. Times before the
/// first boundary use the first rate and times after the last use the last rate.
#[derive(Debug, Clone, PartialEq)]
pub struct TickClock<T> {
    boundaries: Vec<T>,
    rates: Vec<T>,
}

impl<T: Real> TickClock<T> {
    pub fn new(boundaries: Vec<T>, rates: Vec<T>) -> Result<Self> {
        if boundaries.len() < 2 || rates.len() + 1 != boundaries.len() {
            return Err(Error::InvalidModel(format!(
                "tick clock needs len(rates) = len(boundaries) - 1 >= 1, got {} boundaries and {} rates",
                boundaries.len(),
                rates.len()
            )));
        }
        if boundaries.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidModel("tick clock boundaries must be strictly increasing".into()));
        }
        if rates.iter().any(|r| !(*r >= T::zero()) || !r.is_finite()) {
            return Err(Error::InvalidModel("tick clock rates must be finite and >= 0".into()));
        }
        Ok(Self { boundaries, rates })
    }

    /// A single constant rate on `[0, horizon]`.
    pub fn constant(rate: T, horizon: T) -> Result<Self> {
        Self::new(vec![T::zero(), horizon], vec![rate])
    }

    pub fn boundaries(&self) -> &[T] {
        &self.boundaries
    }

    pub fn rates(&self) -> &[T] {
        &self.rates
    }

    pub fn rate_at(&self, t: T) -> T {
        // partition_point gives the number of boundaries <= t
        let k = self.boundaries.partition_point(|b| *b <= t);
        let idx = k.saturating_sub(1).min(self.rates.len() - 1);
        self.rates[idx]
    }

    pub fn max_rate(&self) -> T {
        self.rates.iter().copied().fold(T::zero(), T::max)
    }

    pub fn cast<U: Real>(&self) -> TickClock<U> {
        TickClock {
            boundaries: self.boundaries.iter().map(|b| U::lit(b.as_f64())).collect(),
            rates: self.rates.iter().map(|r| U::lit(r.as_f64())).collect(),
        }
    }
}

/// Execution intensities of one side, indexed by quote level and spread state.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecTable<T> {
    /// Quote at the best price (`Bb` or `Ba`).
    pub at_best: Vec<T>,
    /// Quote one tick inside (`Bb+` or `Ba-`).
    pub improved: Vec<T>,
}

impl<T: Real> ExecTable<T> {
    #[inline]
    pub fn rate(&self, improved: bool, i: usize) -> T {
        if improved {
            self.improved[i - 1]
        } else {
            self.at_best[i - 1]
        }
    }

    /// Largest rate usable at state `i`.
    pub fn max_at(&self, i: usize) -> T {
        if i <= 1 {
            self.at_best[0]
        } else {
            self.at_best[i - 1].max(self.improved[i - 1])
        }
    }

    pub fn cast<U: Real>(&self) -> ExecTable<U> {
        ExecTable {
            at_best: self.at_best.iter().map(|v| U::lit(v.as_f64())).collect(),
            improved: self.improved.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriceKind {
    Martingale,
    Bachelier,
}

/// Arithmetic Brownian mid price `dP = b dt + sigma dW`; a martingale when `b = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceModel<T> {
    pub kind: PriceKind,
    pub drift: T,
    pub sigma: T,
    pub p0: T,
}

impl<T: Real> PriceModel<T> {
    pub fn martingale(sigma: T, p0: T) -> Self {
        Self { kind: PriceKind::Martingale, drift: T::zero(), sigma, p0 }
    }

    pub fn bachelier(drift: T, sigma: T, p0: T) -> Self {
        Self { kind: PriceKind::Bachelier, drift, sigma, p0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= T::zero()) || !self.sigma.is_finite() {
            return Err(Error::InvalidModel(format!("price volatility must be >= 0, got {}", self.sigma)));
        }
        if self.kind == PriceKind::Martingale && self.drift != T::zero() {
            return Err(Error::InvalidModel("martingale price model requires zero drift".into()));
        }
        if !self.drift.is_finite() || !self.p0.is_finite() {
            return Err(Error::InvalidModel("price drift and p0 must be finite".into()));
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> PriceModel<U> {
        PriceModel {
            kind: self.kind,
            drift: U::lit(self.drift.as_f64()),
            sigma: U::lit(self.sigma.as_f64()),
            p0: U::lit(self.p0.as_f64()),
        }
    }
}

/// Calibrated market primitives shared by the solver and the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketModel<T> {
    pub grid: SpreadGrid<T>,
    /// Row-stochastic jump matrix of the spread chain, zero diagonal, 0-based indices.
    pub rho: Vec<Vec<T>>,
    pub tick_clock: TickClock<T>,
    pub exec_bid: ExecTable<T>,
    pub exec_ask: ExecTable<T>,
    pub fees: FeeSchedule<T>,
    pub price: PriceModel<T>,
}

impl<T: Real> MarketModel<T> {
    /// Checks every structural invariant. Priority-ordering violations are
    /// returned as warnings rather than errors.
    pub fn validate(&self) -> Result<Vec<String>> {
        let m = self.grid.m();
        if self.rho.len() != m || self.rho.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidModel(format!("rho must be {m}x{m}")));
        }
        let tol = T::lit(1e-9);
        for (i, row) in self.rho.iter().enumerate() {
            if row[i] != T::zero() {
                return Err(Error::InvalidModel(format!("rho[{i}][{i}] must be 0")));
            }
            if row.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
                return Err(Error::InvalidModel(format!("rho row {i} has a negative or non-finite entry")));
            }
            let sum = row.iter().copied().fold(T::zero(), |a, b| a + b);
            // a single-state chain never jumps
            let target = if m == 1 { T::zero() } else { T::one() };
            if (sum - target).abs() > tol {
                return Err(Error::InvalidModel(format!("rho row {i} sums to {sum}, expected {target}")));
            }
        }
        for (name, table) in [("exec_bid", &self.exec_bid), ("exec_ask", &self.exec_ask)] {
            if table.at_best.len() != m || table.improved.len() != m {
                return Err(Error::InvalidModel(format!("{name} must have {m} rates per quote")));
            }
            if table.at_best.iter().chain(&table.improved).any(|v| !(*v >= T::zero()) || !v.is_finite()) {
                return Err(Error::InvalidModel(format!("{name} rates must be finite and >= 0")));
            }
        }
        self.fees.validate()?;
        self.price.validate()?;

        let mut warnings = Vec::new();
        for i in 2..=m {
            if self.exec_bid.rate(true, i) < self.exec_bid.rate(false, i) {
                warnings.push(format!("bid priority ordering violated at spread state {i}: Bb+ < Bb"));
            }
            if self.exec_ask.rate(true, i) < self.exec_ask.rate(false, i) {
                warnings.push(format!("ask priority ordering violated at spread state {i}: Ba- < Ba"));
            }
        }
        for w in &warnings {
            log::warn!("{w}");
        }
        Ok(warnings)
    }

    pub fn m(&self) -> usize {
        self.grid.m()
    }

    /// Jump intensity `r_ij(t) = lambda(t) rho_ij` with 1-based states.
    #[inline]
    pub fn transition_rate(&self, t: T, i: usize, j: usize) -> T {
        self.tick_clock.rate_at(t) * self.rho[i - 1][j - 1]
    }

    /// Execution intensity of a quote at spread state `i`.
    ///
    /// This is a plain table lookup: the improved-quote column is returned even
    /// at the one-tick state, where the quote itself is not admissible.
    pub fn intensity(&self, quote: impl Into<Quote>, i: usize) -> Result<T> {
        self.grid.check(i)?;
        Ok(match quote.into() {
            Quote::Bid(q) => self.exec_bid.rate(q.is_improved(), i),
            Quote::Ask(q) => self.exec_ask.rate(q.is_improved(), i),
        })
    }

    #[inline]
    pub(crate) fn bid_rate(&self, q: QuoteBid, i: usize) -> T {
        self.exec_bid.rate(q.is_improved(), i)
    }

    #[inline]
    pub(crate) fn ask_rate(&self, q: QuoteAsk, i: usize) -> T {
        self.exec_ask.rate(q.is_improved(), i)
    }

    /// Largest total event rate at state `i`: spread jumps plus both execution sides.
    pub fn max_event_rate(&self, i: usize) -> T {
        let jump: T = self.rho[i - 1].iter().copied().fold(T::zero(), |a, b| a + b);
        jump * self.tick_clock.max_rate() + self.exec_bid.max_at(i) + self.exec_ask.max_at(i)
    }

    /// True when the bid and ask tables are exact mirrors.
    pub fn is_symmetric(&self) -> bool {
        self.exec_bid == self.exec_ask
    }

    pub fn cast<U: Real>(&self) -> MarketModel<U> {
        MarketModel {
            grid: self.grid.cast(),
            rho: self.rho.iter().map(|r| r.iter().map(|v| U::lit(v.as_f64())).collect()).collect(),
            tick_clock: self.tick_clock.cast(),
            exec_bid: self.exec_bid.cast(),
            exec_ask: self.exec_ask.cast(),
            fees: self.fees.cast(),
            price: self.price.cast(),
        }
    }
}

/// Full state of the market maker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketState<T> {
    pub x: T,
    pub y: T,
    pub p: T,
    pub i: usize,
    pub t: T,
}
