//! Information ratios, the efficient frontier in the penalty weight, and
//! plot data for policy maps and wealth distributions.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Action, MarketModel};
use crate::simulator::{run_backtest, BacktestStats, SimConfig, Strategy};
use crate::solver::{max_excess, solve_mean_criterion, Objective, PolicyTable, SolverGrid, SolverParams};

/// Penalty weights of the default frontier sweep, largest first.
pub const FRONTIER_GAMMAS: [f64; 14] =
    [50.0, 25.0, 12.5, 6.25, 3.125, 1.563, 0.781, 0.391, 0.195, 0.098, 0.049, 0.024, 0.012, 0.006];

/// Size of the constant benchmark whose mean offsets the net ratio.
pub const BENCHMARK_SIZE: f64 = 100.0;

/// `m(X_T) / sigma(X_T)`.
pub fn information_ratio(stats: &BacktestStats) -> Result<f64> {
    ratio(stats.x_t.mean, stats.x_t.std)
}

/// `(m(X_T) - m_bench(X_T)) / sigma(X_T)`.
pub fn net_information_ratio(stats: &BacktestStats, benchmark: &BacktestStats) -> Result<f64> {
    ratio(stats.x_t.mean - benchmark.x_t.mean, stats.x_t.std)
}

fn ratio(mean: f64, std: f64) -> Result<f64> {
    if std > 0.0 && std.is_finite() {
        Ok(mean / std)
    } else {
        Err(Error::UndefinedRatio)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierRow {
    pub gamma: f64,
    pub sigma_star: f64,
    pub mean_star: f64,
    pub sigma_womo: f64,
    pub mean_womo: f64,
    pub ir: f64,
    pub nir: f64,
}

impl FrontierRow {
    fn from_stats(gamma: f64, star: &BacktestStats, womo: &BacktestStats, bench: &BacktestStats) -> Result<Self> {
        Ok(Self {
            gamma,
            sigma_star: star.x_t.std,
            mean_star: star.x_t.mean,
            sigma_womo: womo.x_t.std,
            mean_womo: womo.x_t.mean,
            ir: information_ratio(star)?,
            nir: net_information_ratio(star, bench)?,
        })
    }
}

/// Tolerance of the solver-level check that forbidding market orders never raises the value.
pub const DOMINANCE_TOL: f64 = 1e-9;

/// Sweeps the penalty weight: solves with and without market orders, then
/// backtests both next to the constant benchmark on the same seed.
///
/// Rows come back sorted by decreasing `gamma`.
pub fn efficient_frontier(
    model: &MarketModel<f64>,
    gammas: &[f64],
    grid: &SolverGrid,
    params: &SolverParams,
    cfg: &SimConfig,
) -> Result<Vec<FrontierRow>> {
    if gammas.is_empty() {
        return Err(Error::InvalidConfig("no penalty weights given".into()));
    }
    if let Some(g) = gammas.iter().find(|g| !(**g > 0.0) || !g.is_finite()) {
        return Err(Error::InvalidConfig(format!("penalty weights must be positive, got {g}")));
    }
    if params.objective != Objective::MeanPenalty {
        return Err(Error::InvalidConfig("the frontier sweeps the mean-penalty objective".into()));
    }
    let mut sorted = gammas.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let bench = run_backtest(&Strategy::Constant(BENCHMARK_SIZE), model, cfg)?;
    sorted
        .iter()
        .map(|&gamma| {
            let p = SolverParams { gamma, ..params.clone() };
            let (v_star, star) = solve_mean_criterion(model, grid, &p)?;
            let (v_womo, womo) = solve_mean_criterion(model, grid, &p.without_market_orders())?;
            let gap = max_excess(&v_womo, &v_star)?;
            if gap > DOMINANCE_TOL {
                return Err(Error::Numerical(format!(
                    "value without market orders exceeds the full value by {gap:e} at gamma {gamma}"
                )));
            }
            let s = run_backtest(&Strategy::Policy(&star), model, cfg)?;
            let w = run_backtest(&Strategy::Policy(&womo), model, cfg)?;
            log::info!("gamma {gamma}: mean {:.3} std {:.3}", s.x_t.mean, s.x_t.std);
            FrontierRow::from_stats(gamma, &s, &w, &bench)
        })
        .collect()
}

pub fn write_frontier_csv<W: Write>(mut out: W, rows: &[FrontierRow]) -> Result<()> {
    writeln!(out, "gamma,sigma_star,mean_star,sigma_womo,mean_womo,ir,nir")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{},{},{}", r.gamma, r.sigma_star, r.mean_star, r.sigma_womo, r.mean_womo, r.ir, r.nir)?;
    }
    Ok(())
}

/// Zone map of one policy slice: `y,i,zone,qb,qa,lb,la,e`, zone `M` (limit
/// orders) or `T` (market order). Fields that do not apply are left empty.
pub fn policy_heatmap_export(policy: &PolicyTable, t_slice: usize) -> Result<String> {
    if t_slice >= policy.grid.n_out {
        return Err(Error::InvalidConfig(format!(
            "slice {t_slice} out of range, policy has {}",
            policy.grid.n_out
        )));
    }
    let g = policy.grid.solver_grid();
    let mut s = String::from("y,i,zone,qb,qa,lb,la,e\n");
    for n in 0..g.n_y() {
        for i in 1..=policy.grid.m {
            let y = g.y_at(n);
            match *policy.action(t_slice, n, i) {
                Action::Make { qb, qa, lb, la } => {
                    writeln!(s, "{y},{i},M,{},{},{lb},{la},", qb.name(), qa.name()).expect("string write");
                }
                Action::Take { e } => writeln!(s, "{y},{i},T,,,,,{e}").expect("string write"),
            }
        }
    }
    Ok(s)
}

/// Equal-width histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// `lo,hi,count` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lo,hi,count\n");
        for (k, c) in self.counts.iter().enumerate() {
            writeln!(s, "{},{},{c}", self.edges[k], self.edges[k + 1]).expect("string write");
        }
        s
    }
}

/// Histogram of terminal wealth over `bins` equal bins spanning the data.
/// When all values coincide a single bin holds them.
pub fn wealth_histogram(values: &[f64], bins: usize) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if bins == 0 {
        return Err(Error::InvalidConfig("need at least one bin".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite wealth value".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Ok(Histogram { edges: vec![lo, hi], counts: vec![values.len() as u64] });
    }
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins).map(|k| if k == bins { hi } else { lo + k as f64 * width }).collect();
    let mut counts = vec![0u64; bins];
    for v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    Ok(Histogram { edges, counts })
}
