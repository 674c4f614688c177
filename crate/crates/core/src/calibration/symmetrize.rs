use crate::model::{ExecTable, MarketModel};
use crate::scalar::Real;

/// Averages mirrored bid/ask execution intensities so both sides coincide.
pub fn symmetrize<T: Real>(model: &MarketModel<T>) -> MarketModel<T> {
    let half = T::lit(0.5);
    let mean = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| if x == y { x } else { (x + y) * half }).collect::<Vec<_>>();
    let table = ExecTable {
        at_best: mean(&model.exec_bid.at_best, &model.exec_ask.at_best),
        improved: mean(&model.exec_bid.improved, &model.exec_ask.improved),
    };
    MarketModel { exec_bid: table.clone(), exec_ask: table, ..model.clone() }
}
