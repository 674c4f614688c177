use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::information_ratio;
use crate::error::{Error, Result};
use crate::model::MarketModel;
use crate::simulator::config::SimConfig;
use crate::simulator::engine::{run_path, PathResult, Strategy};
use crate::solver::PolicyTable;

/// Sample mean and standard deviation (`n - 1` denominator, 0 for one sample).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: impl Iterator<Item = f64> + Clone) -> Self {
        let (n, sum) = values.clone().fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
        if n == 0 {
            return Self { mean: f64::NAN, std: f64::NAN };
        }
        let mean = sum / n as f64;
        let std = if n > 1 {
            (values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }

    /// Standard error of the mean over `n` samples.
    pub fn std_error(&self, n: usize) -> f64 {
        self.std / (n as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestStats {
    pub n_paths: usize,
    pub x_t: Summary,
    pub n_bid: Summary,
    pub n_ask: Summary,
    pub n_market: Summary,
    pub max_abs_y: Summary,
    pub p_t: Summary,
    pub clamped: u64,
}

impl BacktestStats {
    pub fn from_paths(paths: &[PathResult]) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::EmptyInput);
        }
        let s = |f: fn(&PathResult) -> f64| Summary::of(paths.iter().map(f));
        Ok(Self {
            n_paths: paths.len(),
            x_t: s(|p| p.x_t),
            n_bid: s(|p| p.n_bid as f64),
            n_ask: s(|p| p.n_ask as f64),
            n_market: s(|p| p.n_market as f64),
            max_abs_y: s(|p| p.max_abs_y),
            p_t: s(|p| p.p_t),
            clamped: paths.iter().map(|p| p.clamped as u64).sum(),
        })
    }
}

/// All paths of a backtest, in path order.
pub fn run_paths(strategy: &Strategy, model: &MarketModel<f64>, cfg: &SimConfig) -> Result<Vec<PathResult>> {
    cfg.validate(model)?;
    strategy.validate(model)?;
    (0..cfg.n_paths as u64).into_par_iter().map(|k| run_path(strategy, model, cfg, k)).collect()
}

pub fn run_backtest(strategy: &Strategy, model: &MarketModel<f64>, cfg: &SimConfig) -> Result<BacktestStats> {
    let paths = run_paths(strategy, model, cfg)?;
    let stats = BacktestStats::from_paths(&paths)?;
    if stats.clamped > 0 {
        log::warn!("{} policy lookups fell outside the inventory grid", stats.clamped);
    }
    Ok(stats)
}

/// `path,x_T,n_bid,n_ask,n_market,max_abs_y` rows.
pub fn write_paths_csv<W: Write>(mut out: W, paths: &[PathResult]) -> Result<()> {
    writeln!(out, "path,x_T,n_bid,n_ask,n_market,max_abs_y")?;
    for (k, p) in paths.iter().enumerate() {
        writeln!(out, "{k},{},{},{},{},{}", p.x_t, p.n_bid, p.n_ask, p.n_market, p.max_abs_y)?;
    }
    Ok(())
}

/// Named backtest results, one column per strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub columns: Vec<(String, BacktestStats)>,
}

impl BenchmarkTable {
    pub fn get(&self, name: &str) -> Option<&BacktestStats> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    /// Information ratio per column; `None` where the wealth has zero spread.
    pub fn information_ratios(&self) -> Vec<Option<f64>> {
        self.columns.iter().map(|(_, s)| information_ratio(s).ok()).collect()
    }

    /// One row per statistic, one column per strategy.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let names: Vec<&str> = self.columns.iter().map(|(n, _)| n.as_str()).collect();
        writeln!(out, "statistic,{}", names.join(","))?;
        let ir: Vec<String> =
            self.information_ratios().iter().map(|r| r.map_or_else(|| "nan".into(), |v| v.to_string())).collect();
        writeln!(out, "ir_x_t,{}", ir.join(","))?;
        type Get = fn(&BacktestStats) -> Summary;
        let rows: [(&str, Get); 5] = [
            ("x_t", |s| s.x_t),
            ("n_bid", |s| s.n_bid),
            ("n_ask", |s| s.n_ask),
            ("n_market", |s| s.n_market),
            ("max_abs_y", |s| s.max_abs_y),
        ];
        for (name, get) in rows {
            for (stat, pick) in [("mean", true), ("std", false)] {
                let cells: Vec<String> = self
                    .columns
                    .iter()
                    .map(|(_, s)| {
                        let v = get(s);
                        (if pick { v.mean } else { v.std }).to_string()
                    })
                    .collect();
                writeln!(out, "{stat}_{name},{}", cells.join(","))?;
            }
        }
        Ok(())
    }
}

/// Optimal, without-market-order, constant and random strategies on common
/// random numbers.
pub fn benchmark_suite(
    policy_star: &PolicyTable,
    policy_womo: &PolicyTable,
    model: &MarketModel<f64>,
    cfg: &SimConfig,
    l0: f64,
) -> Result<BenchmarkTable> {
    let runs = [
        ("optimal", Strategy::Policy(policy_star)),
        ("womo", Strategy::Policy(policy_womo)),
        ("constant", Strategy::Constant(l0)),
        ("random", Strategy::Random(l0)),
    ];
    let columns = runs
        .iter()
        .map(|(name, s)| Ok((name.to_string(), run_backtest(s, model, cfg)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchmarkTable { columns })
}
