//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

#[path = "../../core/tests/common/oracle.rs"]
mod oracle;

use std::cell::OnceCell;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use lobmm::analytics::{efficient_frontier, FRONTIER_GAMMAS};
use lobmm::calibration::synthetic::{simulate_quote_regimes, synthesize_ticks, SynthConfig};
use lobmm::calibration::{
    calibrate, count_executions, estimate_exec_intensities, estimate_tick_clock, estimate_transition_matrix,
    extract_spread_jumps, symmetrize, CalibrationConfig, TickRecord,
};
use lobmm::model::{reference, ExecTable, FeeSchedule, MarketModel, PriceModel, SpreadGrid, TickClock};
use lobmm::simulator::{benchmark_suite, run_backtest, BenchmarkTable, SimConfig, Strategy};
use lobmm::solver::{check_solution, max_excess, solve, SolverGrid, SolverParams};
use oracle::Instance;

const SEED: u64 = 20_240_601;
const PATHS: usize = 10_000;

type Check = fn(&Ctx) -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Shared inputs built on first use.
#[derive(Default)]
struct Ctx {
    ticks: OnceCell<Vec<TickRecord>>,
    calibrated: OnceCell<MarketModel<f64>>,
    suite: OnceCell<BenchmarkTable>,
}

impl Ctx {
    /// Ten trading days simulated from the reference model under the hourly clock.
    fn ticks(&self) -> &[TickRecord] {
        self.ticks.get_or_init(|| {
            let truth = MarketModel { tick_clock: reference::hourly_clock(), ..reference::reference_model() };
            synthesize_ticks(&truth, &SynthConfig { days: 10, seed: SEED, ..SynthConfig::default() }).unwrap()
        })
    }

    fn calibration_config(&self) -> CalibrationConfig {
        CalibrationConfig {
            boundaries: Some(reference::hourly_boundaries()),
            period: Some(86_400.0),
            ..CalibrationConfig::new(reference::TICK, reference::SPREAD_STATES)
        }
    }

    /// Model calibrated from the synthetic ticks, with a constant clock at the
    /// mean estimated rate so the solver horizon is not tied to a time of day.
    fn calibrated(&self) -> &MarketModel<f64> {
        self.calibrated.get_or_init(|| {
            let (model, report) = calibrate(self.ticks(), &self.calibration_config()).unwrap();
            let rate = report.clock.counts.iter().sum::<u64>() as f64 / report.clock.exposure.iter().sum::<f64>();
            MarketModel { tick_clock: TickClock::constant(rate, reference::HORIZON).unwrap(), ..model }
        })
    }

    fn suite(&self) -> &BenchmarkTable {
        self.suite.get_or_init(|| {
            let model = reference::reference_model();
            let grid = SolverGrid::default();
            let params = SolverParams::mean_penalty(5.0);
            let (_, star) = solve(&model, &grid, &params).unwrap();
            let (_, womo) = solve(&model, &grid, &params.without_market_orders()).unwrap();
            let cfg = SimConfig { n_paths: PATHS, seed: SEED, ..SimConfig::default() };
            benchmark_suite(&star, &womo, &model, &cfg, 100.0).unwrap()
        })
    }
}

fn rho_round_trip(ctx: &Ctx) -> Outcome {
    let t = Instant::now();
    let grid = SpreadGrid::new(reference::TICK, reference::SPREAD_STATES).unwrap();
    let series = extract_spread_jumps(ctx.ticks(), &grid).unwrap();
    let est = estimate_transition_matrix(&series, reference::SPREAD_STATES).unwrap();
    let truth = reference::transition_matrix();
    let err = est.rho.iter().flatten().zip(truth.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let n = series.transition_count();
    let secs = t.elapsed().as_secs_f64();
    outcome(
        n >= 100_000 && err < 0.01 && secs < 10.0,
        format!("{n} transitions, max |rho error| {err:.4}, {secs:.1}s"),
    )
}

fn clock_round_trip(ctx: &Ctx) -> Outcome {
    let grid = SpreadGrid::new(reference::TICK, reference::SPREAD_STATES).unwrap();
    let series = extract_spread_jumps(ctx.ticks(), &grid).unwrap();
    let est = estimate_tick_clock(&series, &reference::hourly_boundaries(), Some(86_400.0)).unwrap();
    let worst = est
        .rates
        .iter()
        .zip(reference::HOURLY_CLOCK_RATES)
        .map(|(e, t)| (e - t).abs() / t)
        .fold(0.0, f64::max);
    outcome(worst < 0.05, format!("10 days, worst bucket relative error {:.2}%", 100.0 * worst))
}

fn execution_round_trip(_: &Ctx) -> Outcome {
    let truth = reference::estimated_model();
    let m = truth.m();
    let mut horizon = 2.0e5;
    loop {
        let regimes = simulate_quote_regimes(&truth, horizon, 0.5, SEED).unwrap();
        let counts = count_executions(&regimes, m).unwrap();
        let occupation = (0..m)
            .flat_map(|k| {
                let levels = if k == 0 { 1 } else { 2 };
                (0..levels).flat_map(move |l| [(l, k, true), (l, k, false)])
            })
            .map(|(l, k, bid)| if bid { counts.bid_time[l][k] } else { counts.ask_time[l][k] })
            .fold(f64::INFINITY, f64::min);
        if occupation < 2.0e4 {
            horizon *= 2.0;
            continue;
        }
        let est = estimate_exec_intensities(&counts).unwrap();
        let mut worst: f64 = 0.0;
        let pairs = [
            (&est.bid_best, &truth.exec_bid.at_best),
            (&est.bid_improved, &truth.exec_bid.improved),
            (&est.ask_best, &truth.exec_ask.at_best),
            (&est.ask_improved, &truth.exec_ask.improved),
        ];
        for (level, (e, t)) in pairs.iter().enumerate() {
            let improved = level % 2 == 1;
            for k in 0..m {
                if improved && k == 0 {
                    continue;
                }
                let e = e[k].expect("occupied cell");
                worst = worst.max((e - t[k]).abs() / t[k]);
            }
        }
        return outcome(
            worst < 0.10,
            format!("horizon {horizon:.0}s, min cell occupation {occupation:.0}s, worst relative error {:.2}%", 100.0 * worst),
        );
    }
}

fn terminal_exact(_: &Ctx) -> Outcome {
    let grid = SolverGrid { n_out: 4, ..SolverGrid::default() };
    let mut worst = 0.0f64;
    let delta = reference::TICK;
    let eps = reference::FIXED_FEE;

    // Mean criterion, fixed fee only.
    let plain = MarketModel { fees: FeeSchedule::fixed_only(eps), ..reference::reference_model() };
    let (v, _) = solve(&plain, &grid, &SolverParams::mean_penalty(5.0)).unwrap();
    // Mean criterion, per-share fees too.
    let fee_model = reference::reference_model();
    let (vf, _) = solve(&fee_model, &grid, &SolverParams::mean_penalty(5.0)).unwrap();
    // Exponential.
    let eta = 1.0;
    let ep = SolverParams::exponential(eta, 0.0, reference::DEFAULT_SIGMA);
    let zero_fee = MarketModel { fees: FeeSchedule::fixed_only(eps), ..reference::reference_model() };
    let (ve, _) = solve(&zero_fee, &grid, &ep).unwrap();

    let m = plain.m();
    let take_fee = reference::TAKE_FEE_PER_SHARE;
    for k in 0..grid.n_y() {
        let y = (grid.y_at(k) as f64).abs();
        for i in 1..=m {
            let idx = k * m + i - 1;
            let half = i as f64 * delta / 2.0;
            worst = worst.max((v.terminal()[idx] - (-y * half - eps)).abs());
            worst = worst.max((vf.terminal()[idx] - (-(y * (half + take_fee)) - eps)).abs());
            worst = worst.max((ve.terminal()[idx] - (eta * y * half).exp()).abs());
        }
    }
    outcome(worst == 0.0, format!("max terminal error {worst:e} over {} nodes x 3 solves", grid.n_y() * m))
}

fn obstacle(_: &Ctx) -> Outcome {
    let model = reference::reference_model();
    let grid = SolverGrid::default();
    let mean = SolverParams::mean_penalty(5.0);
    let (v, _) = solve(&model, &grid, &mean).unwrap();
    let dm = check_solution(&v, &model, &grid, &mean).unwrap();
    let expo = SolverParams::exponential(1.0, 0.0, reference::DEFAULT_SIGMA);
    let (ve, _) = solve(&model, &grid, &expo).unwrap();
    let de = check_solution(&ve, &model, &grid, &expo).unwrap();
    outcome(
        dm.obstacle_violation <= 1e-9 && de.obstacle_violation <= 1e-9 && de.floor_hits == 0,
        format!(
            "mean max(M phi - phi) = {:e}, exponential max(phi - M phi)/phi = {:e}",
            dm.obstacle_violation, de.obstacle_violation
        ),
    )
}

fn two_state_model() -> MarketModel<f64> {
    MarketModel {
        grid: SpreadGrid::new(reference::TICK, 2).unwrap(),
        rho: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        tick_clock: TickClock::constant(0.6, 10.0).unwrap(),
        exec_bid: ExecTable { at_best: vec![0.17, 0.12], improved: vec![0.17, 0.31] },
        exec_ask: ExecTable { at_best: vec![0.15, 0.13], improved: vec![0.15, 0.29] },
        fees: reference::fees(),
        price: PriceModel::martingale(reference::DEFAULT_SIGMA, reference::P0),
    }
}

fn oracle_equivalence(_: &Ctx) -> Outcome {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut instances = 0;
    for (n_out, substeps) in [(1, 2), (2, 1)] {
        for gamma in [0.0, 0.5, 5.0] {
            let inst = Instance {
                model: two_state_model(),
                grid: SolverGrid {
                    horizon: 0.5,
                    n_out,
                    y_min: -20,
                    y_max: 20,
                    dy: 10,
                    substeps: Some(substeps),
                    clock_offset: 0.0,
                },
                params: SolverParams { lbar: 10, ebar: 10, inventory_unit: 10.0, ..SolverParams::mean_penalty(gamma) },
            };
            let (v, _) = solve(&inst.model, &inst.grid, &inst.params).unwrap();
            for (k, slice) in inst.tree_surface().iter().enumerate() {
                for (a, b) in slice.iter().zip(v.slice(k)) {
                    worst = worst.max((a - b).abs());
                }
            }
            instances += 1;
        }
    }
    // Joint enumeration of every stationary policy on a one-step instance.
    let joint = Instance {
        model: two_state_model(),
        grid: SolverGrid { horizon: 0.5, n_out: 1, y_min: -10, y_max: 10, dy: 10, substeps: Some(1), clock_offset: 0.0 },
        params: SolverParams { lbar: 10, ebar: 10, inventory_unit: 10.0, ..SolverParams::mean_penalty(2.0) },
    };
    let (v, _) = solve(&joint.model, &joint.grid, &joint.params).unwrap();
    for (a, b) in joint.joint_policy_values().iter().zip(v.slice(0)) {
        worst = worst.max((a - b).abs());
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-12 && secs < 1.0,
        format!("{instances} tree instances + 1 joint enumeration, max |dp - oracle| {worst:e}, {secs:.2}s"),
    )
}

fn monotonicity(ctx: &Ctx) -> Outcome {
    let model = ctx.calibrated();
    let grid = SolverGrid::default();
    let p = SolverParams::mean_penalty(5.0);
    let (full, _) = solve(model, &grid, &p).unwrap();
    let (womo, _) = solve(model, &grid, &p.without_market_orders()).unwrap();
    let (low, _) = solve(model, &grid, &SolverParams::mean_penalty(0.049)).unwrap();
    let a = max_excess(&womo, &full).unwrap();
    let b = max_excess(&full, &low).unwrap();
    outcome(a <= 1e-9 && b <= 1e-9, format!("max(phi_womo - phi) = {a:e}, max(phi_5 - phi_0.049) = {b:e}"))
}

fn symmetry(ctx: &Ctx) -> Outcome {
    let model = symmetrize(ctx.calibrated());
    let grid = SolverGrid::default();
    let p = SolverParams::mean_penalty(5.0);
    let (v, _) = solve(&model, &grid, &p).unwrap();
    let d = check_solution(&v, &model, &grid, &p).unwrap();
    let res = d.symmetry_residual.unwrap();
    let mis = d.policy_mirror_mismatches.unwrap();
    outcome(res <= 1e-9 && mis == 0, format!("value residual {res:e}, policy mirror mismatches {mis}"))
}

fn orderings(ctx: &Ctx) -> Outcome {
    let t = Instant::now();
    let suite = ctx.suite();
    let ir: Vec<f64> = suite.information_ratios().into_iter().map(|r| r.unwrap_or(f64::NAN)).collect();
    let get = |n: &str| suite.get(n).unwrap();
    let ratio = get("constant").x_t.std / get("optimal").x_t.std;
    let y: Vec<f64> = ["womo", "optimal", "constant", "random"].iter().map(|n| get(n).max_abs_y.mean).collect();
    let ir_ok = ir[0] > ir[1] && ir[1] > ir[2] && ir[2] > ir[3];
    let y_ok = y.windows(2).all(|w| w[0] < w[1]);
    let secs = t.elapsed().as_secs_f64();
    outcome(
        ir_ok && ratio > 2.0 && y_ok && secs < 120.0,
        format!(
            "IR {:.2} > {:.2} > {:.2} > {:.2}; sigma ratio {ratio:.2}; m(sup|Y|) {:.1} < {:.1} < {:.1} < {:.1}; {secs:.1}s",
            ir[0], ir[1], ir[2], ir[3], y[0], y[1], y[2], y[3]
        ),
    )
}

fn execution_counts(ctx: &Ctx) -> Outcome {
    let suite = ctx.suite();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, s) in &suite.columns {
        let n = s.n_paths as f64;
        let se = ((s.n_bid.std.powi(2) + s.n_ask.std.powi(2)) / n).sqrt();
        let gap = (s.n_bid.mean - s.n_ask.mean).abs();
        pass &= gap < 3.0 * se;
        parts.push(format!("{name} {:.3}/{:.3} ({:.1} SE)", s.n_bid.mean, s.n_ask.mean, gap / se));
    }
    outcome(pass, parts.join(", "))
}

fn frontier(_: &Ctx) -> Outcome {
    let t = Instant::now();
    let model = reference::reference_model();
    let cfg = SimConfig { n_paths: PATHS, seed: SEED, ..SimConfig::default() };
    let rows = efficient_frontier(&model, &FRONTIER_GAMMAS, &SolverGrid::default(), &SolverParams::mean_penalty(1.0), &cfg)
        .unwrap();
    let inversions = rows.windows(2).filter(|w| w[1].sigma_star <= w[0].sigma_star).count();
    let best = rows.iter().enumerate().max_by(|a, b| a.1.nir.total_cmp(&b.1.nir)).unwrap().0;
    let interior = best != 0 && best != rows.len() - 1;
    let secs = t.elapsed().as_secs_f64();
    outcome(
        rows.len() == 14 && inversions <= 1 && interior && secs < 1800.0,
        format!(
            "{} rows, sigma inversions {inversions}, NIR peak {:.3} at gamma {} (ends {:.3}, {:.3}); {secs:.0}s",
            rows.len(),
            rows[best].nir,
            rows[best].gamma,
            rows[0].nir,
            rows[rows.len() - 1].nir
        ),
    )
}

fn martingale(_: &Ctx) -> Outcome {
    let model = reference::reference_model();
    let cfg = SimConfig { n_paths: PATHS, seed: SEED, ..SimConfig::default() };
    let s = run_backtest(&Strategy::Constant(100.0), &model, &cfg).unwrap();
    let bound = 3.0 * model.price.sigma * cfg.horizon.sqrt() / (PATHS as f64).sqrt();
    let gap = (s.p_t.mean - model.price.p0).abs();
    outcome(gap < bound, format!("|m(P_T) - p0| = {gap:.2e} < {bound:.2e}"))
}

fn run_cli(dir: &Path, threads: usize, args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_lobmm"))
        .current_dir(dir)
        .args(["--threads", &threads.to_string(), "--seed", "7"])
        .args(args)
        .status()
        .unwrap();
    assert!(status.success(), "lobmm {args:?} failed with {status}");
}

fn determinism(_: &Ctx) -> Outcome {
    let runs: Vec<_> = [1usize, 8]
        .iter()
        .map(|&threads| {
            let dir = tempfile::tempdir().unwrap();
            let d = dir.path();
            run_cli(d, threads, &["synth-ticks", "--days", "1", "--out", "ticks.csv"]);
            run_cli(d, threads, &["calibrate", "--input", "ticks.csv", "--symmetrize", "--out", "model.json"]);
            run_cli(d, threads, &["solve", "--model", "model.json", "--out", "star.json", "--n-out", "20", "--dump-values", "v.csv"]);
            run_cli(d, threads, &["solve", "--model", "model.json", "--out", "womo.json", "--n-out", "20", "--ebar", "0"]);
            run_cli(d, threads, &[
                "backtest", "--model", "model.json", "--policy", "star.json", "--policy-womo", "womo.json",
                "--paths", "2000", "--out", "suite.csv",
            ]);
            run_cli(d, threads, &[
                "backtest", "--model", "model.json", "--strategy", "random", "--paths", "2000", "--out", "random.csv",
                "--per-path", "paths.csv",
            ]);
            run_cli(d, threads, &[
                "frontier", "--model", "model.json", "--gammas", "5,0.5", "--paths", "500", "--n-out", "20", "--out",
                "frontier.csv",
            ]);
            run_cli(d, threads, &["export", "--policy", "star.json", "--slice", "0", "--out", "heat.csv"]);
            run_cli(d, threads, &["export", "--stats", "paths.csv", "--hist", "hist.csv"]);
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(d)
                .unwrap()
                .map(|e| {
                    let e = e.unwrap();
                    (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
                })
                .collect();
            files.sort();
            files
        })
        .collect();
    let same = runs[0] == runs[1];
    outcome(same, format!("{} output files byte-identical across --threads 1 and 8: {same}", runs[0].len()))
}

fn main() {
    let criteria: [(&str, Check); 13] = [
        ("calibration round trip, transition matrix", rho_round_trip),
        ("calibration round trip, tick clock", clock_round_trip),
        ("calibration round trip, execution intensities", execution_round_trip),
        ("terminal conditions exact", terminal_exact),
        ("obstacle inequality", obstacle),
        ("oracle equivalence", oracle_equivalence),
        ("value monotonicity", monotonicity),
        ("mirror symmetry", symmetry),
        ("backtest orderings", orderings),
        ("symmetric execution counts", execution_counts),
        ("efficient frontier", frontier),
        ("martingale mid price", martingale),
        ("determinism across thread counts", determinism),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let ctx = Ctx::default();
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let n = k + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let t = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(|| check(&ctx)))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                outcome(false, format!("panicked: {msg}"))
            });
        if !out.pass {
            failed += 1;
        }
        println!(
            "{} criterion {n:>2} {name}: {} [{:.1}s]",
            if out.pass { "PASS" } else { "FAIL" },
            out.detail,
            t.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
