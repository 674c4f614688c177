//! Domain types and the exact price, cost and liquidation arithmetic.

mod action;
mod file;
mod market;
mod pricing;
mod quote;
pub mod reference;

pub use action::{Action, MakeAction, TakeAction};
pub use file::{ClockFile, FeesFile, ModelFile, PriceFile};
pub use market::{ExecTable, FeeSchedule, MarketModel, MarketState, PriceKind, PriceModel, SpreadGrid, TickClock};
pub use pricing::{
    ask_offset_half_ticks, ask_price, bid_offset_half_ticks, bid_price, liquidation_value, make_margin, take_cost,
    take_margin,
};
pub use quote::{admissible_quotes, Quote, QuoteAsk, QuoteBid, Side};
