use serde::{Deserialize, Serialize};

/// Bid quote level: at the best bid or one tick above it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuoteBid {
    #[serde(rename = "Bb")]
    Bb,
    #[serde(rename = "Bb+")]
    BbPlus,
}

/// Ask quote level: at the best ask or one tick below it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuoteAsk {
    #[serde(rename = "Ba")]
    Ba,
    #[serde(rename = "Ba-")]
    BaMinus,
}

impl QuoteBid {
    pub const ALL: [QuoteBid; 2] = [QuoteBid::Bb, QuoteBid::BbPlus];

    #[inline]
    pub fn is_improved(self) -> bool {
        matches!(self, QuoteBid::BbPlus)
    }

    /// The ask quote at the same queue level.
    #[inline]
    pub fn mirror(self) -> QuoteAsk {
        match self {
            QuoteBid::Bb => QuoteAsk::Ba,
            QuoteBid::BbPlus => QuoteAsk::BaMinus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QuoteBid::Bb => "Bb",
            QuoteBid::BbPlus => "Bb+",
        }
    }

    /// Quotes admissible at spread state `i` (1-based).
    pub fn admissible(i: usize) -> &'static [QuoteBid] {
        if i <= 1 {
            &Self::ALL[..1]
        } else {
            &Self::ALL
        }
    }
}

impl QuoteAsk {
    pub const ALL: [QuoteAsk; 2] = [QuoteAsk::Ba, QuoteAsk::BaMinus];

    #[inline]
    pub fn is_improved(self) -> bool {
        matches!(self, QuoteAsk::BaMinus)
    }

    #[inline]
    pub fn mirror(self) -> QuoteBid {
        match self {
            QuoteAsk::Ba => QuoteBid::Bb,
            QuoteAsk::BaMinus => QuoteBid::BbPlus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QuoteAsk::Ba => "Ba",
            QuoteAsk::BaMinus => "Ba-",
        }
    }

    pub fn admissible(i: usize) -> &'static [QuoteAsk] {
        if i <= 1 {
            &Self::ALL[..1]
        } else {
            &Self::ALL
        }
    }
}

/// Either side's quote, for lookups that work on both books.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quote {
    Bid(QuoteBid),
    Ask(QuoteAsk),
}

impl Quote {
    pub fn is_improved(self) -> bool {
        match self {
            Quote::Bid(q) => q.is_improved(),
            Quote::Ask(q) => q.is_improved(),
        }
    }
}

impl From<QuoteBid> for Quote {
    fn from(q: QuoteBid) -> Self {
        Quote::Bid(q)
    }
}

impl From<QuoteAsk> for Quote {
    fn from(q: QuoteAsk) -> Self {
        Quote::Ask(q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bid,
    Ask,
}

/// Set of admissible `(bid, ask)` quote pairs at spread state `i`.
pub fn admissible_quotes(i: usize) -> Vec<(QuoteBid, QuoteAsk)> {
    let mut out = Vec::with_capacity(4);
    for &qb in QuoteBid::admissible(i) {
        for &qa in QuoteAsk::admissible(i) {
            out.push((qb, qa));
        }
    }
    out
}
