use serde::{Deserialize, Serialize};

use crate::model::quote::{QuoteAsk, QuoteBid};

/// Limit order pair: quotes and sizes in shares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MakeAction {
    pub qb: QuoteBid,
    pub qa: QuoteAsk,
    pub lb: f64,
    pub la: f64,
}

/// Market order of signed size `e` shares (buy when positive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TakeAction {
    pub e: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Action {
    Make {
        qb: QuoteBid,
        qa: QuoteAsk,
        lb: f64,
        la: f64,
    },
    Take {
        e: f64,
    },
}

impl MakeAction {
    /// Bid/ask swap: the action a symmetric policy takes at `-y`.
    pub fn mirror(self) -> Self {
        Self { qb: self.qa.mirror(), qa: self.qb.mirror(), lb: self.la, la: self.lb }
    }
}

impl Action {
    pub fn make(m: MakeAction) -> Self {
        Action::Make { qb: m.qb, qa: m.qa, lb: m.lb, la: m.la }
    }

    pub fn take(e: f64) -> Self {
        Action::Take { e }
    }

    pub fn as_make(&self) -> Option<MakeAction> {
        match *self {
            Action::Make { qb, qa, lb, la } => Some(MakeAction { qb, qa, lb, la }),
            Action::Take { .. } => None,
        }
    }

    pub fn is_take(&self) -> bool {
        matches!(self, Action::Take { .. })
    }

    pub fn mirror(&self) -> Self {
        match *self {
            Action::Make { qb, qa, lb, la } => Action::make(MakeAction { qb, qa, lb, la }.mirror()),
            Action::Take { e } => Action::Take { e: -e },
        }
    }
}
