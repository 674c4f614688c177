//! Optimal market making with limit and market orders on a Markov spread.
//!
//! The core types are generic over the scalar (`f32` or `f64`); the aliases
//! below fix the usual `f64` instantiation.

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod calibration;
pub mod solver;
pub mod error;
pub mod model;
pub mod scalar;
pub mod simulator;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Model = model::MarketModel<f64>;
pub type Model32 = model::MarketModel<f32>;
pub type Grid = model::SpreadGrid<f64>;
pub type Fees = model::FeeSchedule<f64>;
pub type Surface = solver::ValueSurface<f64>;
pub type Surface32 = solver::ValueSurface<f32>;
