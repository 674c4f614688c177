//! JSON document for [`MarketModel`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::market::{ExecTable, FeeSchedule, MarketModel, PriceKind, PriceModel, SpreadGrid, TickClock};
use crate::scalar::Real;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub delta: f64,
    pub m: usize,
    pub rho: Vec<Vec<f64>>,
    pub tick_clock: ClockFile,
    pub exec_bid: BTreeMap<String, Vec<f64>>,
    pub exec_ask: BTreeMap<String, Vec<f64>>,
    pub fees: FeesFile,
    pub price: PriceFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClockFile {
    pub boundaries: Vec<f64>,
    pub rates: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeesFile {
    pub rebate_per_share: f64,
    pub take_fee_per_share: f64,
    pub fixed_fee: f64,
    /// Proportional maker rebate; parsed so the error is explicit, never applied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proportional_rebate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proportional_fee: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceFile {
    pub kind: PriceKind,
    #[serde(default)]
    pub b: f64,
    pub sigma: f64,
    pub p0: f64,
}

fn table(map: &BTreeMap<String, Vec<f64>>, best: &str, improved: &str, side: &str) -> Result<ExecTable<f64>> {
    if let Some(k) = map.keys().find(|k| k.as_str() != best && k.as_str() != improved) {
        return Err(Error::InvalidModel(format!("{side}: unknown quote `{k}`, expected `{best}` and `{improved}`")));
    }
    let get = |k: &str| {
        map.get(k)
            .cloned()
            .ok_or_else(|| Error::InvalidModel(format!("{side}: missing quote `{k}`")))
    };
    Ok(ExecTable { at_best: get(best)?, improved: get(improved)? })
}

impl ModelFile {
    pub fn into_model<T: Real>(self) -> Result<MarketModel<T>> {
        for (name, v) in [("proportional_rebate", self.fees.proportional_rebate), ("proportional_fee", self.fees.proportional_fee)] {
            if v.is_some_and(|v| v != 0.0) {
                return Err(Error::Unsupported(format!(
                    "{name}: only per-share rebates/fees plus a fixed fee are supported"
                )));
            }
        }
        let model = MarketModel {
            grid: SpreadGrid::new(self.delta, self.m)?,
            rho: self.rho,
            tick_clock: TickClock::new(self.tick_clock.boundaries, self.tick_clock.rates)?,
            exec_bid: table(&self.exec_bid, "Bb", "Bb+", "exec_bid")?,
            exec_ask: table(&self.exec_ask, "Ba", "Ba-", "exec_ask")?,
            fees: FeeSchedule {
                rebate_per_share: self.fees.rebate_per_share,
                take_fee_per_share: self.fees.take_fee_per_share,
                fixed_fee: self.fees.fixed_fee,
            },
            price: PriceModel { kind: self.price.kind, drift: self.price.b, sigma: self.price.sigma, p0: self.price.p0 },
        };
        model.validate()?;
        Ok(model.cast())
    }

    pub fn from_model<T: Real>(model: &MarketModel<T>) -> Self {
        let model = model.cast::<f64>();
        let mut exec_bid = BTreeMap::new();
        exec_bid.insert("Bb".to_string(), model.exec_bid.at_best.clone());
        exec_bid.insert("Bb+".to_string(), model.exec_bid.improved.clone());
        let mut exec_ask = BTreeMap::new();
        exec_ask.insert("Ba".to_string(), model.exec_ask.at_best.clone());
        exec_ask.insert("Ba-".to_string(), model.exec_ask.improved.clone());
        Self {
            delta: model.grid.delta(),
            m: model.grid.m(),
            rho: model.rho.clone(),
            tick_clock: ClockFile {
                boundaries: model.tick_clock.boundaries().to_vec(),
                rates: model.tick_clock.rates().to_vec(),
            },
            exec_bid,
            exec_ask,
            fees: FeesFile {
                rebate_per_share: model.fees.rebate_per_share,
                take_fee_per_share: model.fees.take_fee_per_share,
                fixed_fee: model.fees.fixed_fee,
                proportional_rebate: None,
                proportional_fee: None,
            },
            price: PriceFile { kind: model.price.kind, b: model.price.drift, sigma: model.price.sigma, p0: model.price.p0 },
        }
    }
}

impl<T: Real> MarketModel<T> {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        file.into_model()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelFile::from_model(self))?)
    }
}
