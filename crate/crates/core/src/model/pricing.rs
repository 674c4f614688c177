//! Quote prices, market order cost and terminal liquidation value.
//!
//! Quote offsets from the mid are kept as integer counts of half ticks so the
//! spread and priority logic is exact; only the final price is a float.

use crate::error::{Error, Result};
use crate::model::market::{FeeSchedule, SpreadGrid};
use crate::model::quote::{QuoteAsk, QuoteBid};
use crate::scalar::Real;

/// Signed offset of the bid quote from the mid, in half ticks.
#[inline]
pub fn bid_offset_half_ticks(qb: QuoteBid, i: usize) -> i64 {
    -(i as i64) + if qb.is_improved() { 2 } else { 0 }
}

/// Signed offset of the ask quote from the mid, in half ticks.
#[inline]
pub fn ask_offset_half_ticks(qa: QuoteAsk, i: usize) -> i64 {
    i as i64 - if qa.is_improved() { 2 } else { 0 }
}

#[inline]
fn half_ticks<T: Real>(n: i64, grid: &SpreadGrid<T>) -> T {
    T::of_i64(n) * grid.delta() / T::lit(2.0)
}

/// Price received per share, relative to the mid, when a limit order fills:
/// half spread, minus a tick for an improved quote, plus the maker rebate.
#[inline]
pub fn make_margin<T: Real>(improved: bool, i: usize, grid: &SpreadGrid<T>, fees: &FeeSchedule<T>) -> T {
    let n = i as i64 - if improved { 2 } else { 0 };
    half_ticks(n, grid) + fees.rebate_per_share
}

/// Per-share cost of crossing the spread: half spread plus the taker fee.
#[inline]
pub fn take_margin<T: Real>(i: usize, grid: &SpreadGrid<T>, fees: &FeeSchedule<T>) -> T {
    grid.half_spread(i) + fees.take_fee_per_share
}

fn check_quote(improved: bool, i: usize, m: usize) -> Result<()> {
    if i == 0 || i > m {
        return Err(Error::SpreadOutOfRange { state: i, m });
    }
    if improved && i == 1 {
        return Err(Error::InadmissibleQuote { spread: i });
    }
    Ok(())
}

/// Effective bid price paid per share, net of the rebate.
pub fn bid_price<T: Real>(qb: QuoteBid, p: T, i: usize, grid: &SpreadGrid<T>, fees: &FeeSchedule<T>) -> Result<T> {
    check_quote(qb.is_improved(), i, grid.m())?;
    Ok(p + half_ticks(bid_offset_half_ticks(qb, i), grid) - fees.rebate_per_share)
}

/// Effective ask price received per share, including the rebate.
pub fn ask_price<T: Real>(qa: QuoteAsk, p: T, i: usize, grid: &SpreadGrid<T>, fees: &FeeSchedule<T>) -> Result<T> {
    check_quote(qa.is_improved(), i, grid.m())?;
    Ok(p + half_ticks(ask_offset_half_ticks(qa, i), grid) + fees.rebate_per_share)
}

/// Cash paid for a market order of signed size `e` (buy when positive).
pub fn take_cost<T: Real>(e: T, p: T, i: usize, grid: &SpreadGrid<T>, fees: &FeeSchedule<T>) -> T {
    e * p + e.abs() * take_margin(i, grid, fees) + fees.fixed_fee
}

/// Cash left after unwinding inventory `y` with one market order.
pub fn liquidation_value<T: Real>(x: T, y: T, p: T, i: usize, grid: &SpreadGrid<T>, fees: &FeeSchedule<T>) -> T {
    x - take_cost(-y, p, i, grid, fees)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn grid() -> SpreadGrid<f64> {
        SpreadGrid::new(0.005, 6).unwrap()
    }

    fn rebate(r: f64) -> FeeSchedule<f64> {
        FeeSchedule { rebate_per_share: r, ..FeeSchedule::zero() }
    }

    #[test]
    fn bid_price_examples() {
        let g = grid();
        assert_abs_diff_eq!(bid_price(QuoteBid::Bb, 45.0, 2, &g, &rebate(0.0)).unwrap(), 44.995, epsilon = 1e-12);
        assert_abs_diff_eq!(bid_price(QuoteBid::BbPlus, 45.0, 2, &g, &rebate(0.0)).unwrap(), 45.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bid_price(QuoteBid::Bb, 45.0, 1, &g, &rebate(0.0008)).unwrap(), 44.9967, epsilon = 1e-12);
        assert!(matches!(
            bid_price(QuoteBid::BbPlus, 45.0, 1, &g, &rebate(0.0)),
            Err(Error::InadmissibleQuote { spread: 1 })
        ));
    }

    #[test]
    fn ask_price_examples() {
        let g = grid();
        assert_abs_diff_eq!(ask_price(QuoteAsk::Ba, 45.0, 2, &g, &rebate(0.0)).unwrap(), 45.005, epsilon = 1e-12);
        assert_abs_diff_eq!(ask_price(QuoteAsk::BaMinus, 45.0, 2, &g, &rebate(0.0)).unwrap(), 45.0, epsilon = 1e-12);
        assert!(ask_price(QuoteAsk::BaMinus, 45.0, 1, &g, &rebate(0.0)).is_err());
        assert!(ask_price(QuoteAsk::Ba, 45.0, 7, &g, &rebate(0.0)).is_err());
    }

    #[test]
    fn take_cost_examples() {
        let g = grid();
        let fixed = FeeSchedule::fixed_only(1e-6);
        assert_abs_diff_eq!(take_cost(100.0, 45.0, 2, &g, &fixed), 4500.500001, epsilon = 1e-9);
        assert_eq!(take_cost(0.0, 45.0, 3, &g, &fixed), 1e-6);
        let with_fee = FeeSchedule { take_fee_per_share: 0.0012, ..fixed };
        assert_abs_diff_eq!(take_cost(-100.0, 45.0, 2, &g, &with_fee), -4499.379999, epsilon = 1e-9);
    }

    #[test]
    fn liquidation_examples() {
        let g = grid();
        assert_abs_diff_eq!(liquidation_value(0.0, 0.0, 45.0, 1, &g, &FeeSchedule::fixed_only(1e-6)), -1e-6, epsilon = 1e-15);
        assert_abs_diff_eq!(liquidation_value(10.0, 100.0, 45.0, 1, &g, &FeeSchedule::zero()), 4509.75, epsilon = 1e-9);
    }

    #[test]
    fn works_in_single_precision() {
        let g = SpreadGrid::new(0.005_f32, 6).unwrap();
        let b = bid_price(QuoteBid::Bb, 45.0_f32, 2, &g, &FeeSchedule::zero()).unwrap();
        assert!((b - 44.995).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn liquidation_round_trip(x in -1e4..1e4f64, y in -1e3..1e3f64, p in 1.0..100.0f64, i in 1usize..=6,
                                  fee in 0.0..0.01f64, fixed in 0.0..0.01f64) {
            let g = grid();
            let fees = FeeSchedule { rebate_per_share: 0.0, take_fee_per_share: fee, fixed_fee: fixed };
            let l = liquidation_value(x, y, p, i, &g, &fees);
            let c = take_cost(-y, p, i, &g, &fees);
            prop_assert!((l + c - x).abs() <= 1e-9 * (1.0 + x.abs() + (y * p).abs()));
            // |y| symmetry of the spread penalty
            let penalty = |y: f64| x + y * p - liquidation_value(x, y, p, i, &g, &fees);
            prop_assert!((penalty(y) - penalty(-y)).abs() <= 1e-9 * (1.0 + (y * p).abs()));
        }

        #[test]
        fn improved_quotes_shift_by_one_tick(p in 1.0..100.0f64, i in 2usize..=6) {
            let g = grid();
            let f = FeeSchedule::zero();
            let bb = bid_price(QuoteBid::Bb, p, i, &g, &f).unwrap();
            let bp = bid_price(QuoteBid::BbPlus, p, i, &g, &f).unwrap();
            prop_assert!((bp - bb - 0.005).abs() < 1e-12);
            let ba = ask_price(QuoteAsk::Ba, p, i, &g, &f).unwrap();
            let am = ask_price(QuoteAsk::BaMinus, p, i, &g, &f).unwrap();
            prop_assert!((ba - am - 0.005).abs() < 1e-12);
            prop_assert!(((ba - p) - (p - bb)).abs() < 1e-12);
        }

        #[test]
        fn immediate_round_trip_loses_spread_and_fees(e in 0.0..500.0f64, p in 1.0..100.0f64, i in 1usize..=6,
                                                      fee in 0.0..0.01f64, fixed in 0.0..0.01f64) {
            let g = grid();
            let fees = FeeSchedule { rebate_per_share: 0.0, take_fee_per_share: fee, fixed_fee: fixed };
            let total = take_cost(e, p, i, &g, &fees) + take_cost(-e, p, i, &g, &fees);
            let expected = 2.0 * fixed + 2.0 * e * (i as f64 * 0.005 / 2.0 + fee);
            prop_assert!((total - expected).abs() < 1e-9 * (1.0 + e * p));
        }
    }
}
