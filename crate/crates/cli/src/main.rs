use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lobmm::analytics::{efficient_frontier, policy_heatmap_export, wealth_histogram, write_frontier_csv};
use lobmm::calibration::synthetic::{synthesize_ticks, SynthConfig};
use lobmm::calibration::{calibrate, read_ticks, write_ticks, CalibrationConfig};
use lobmm::model::{reference, MarketModel};
use lobmm::simulator::{
    benchmark_suite, run_paths, write_paths_csv, BacktestStats, BenchmarkTable, Strategy,
};
use lobmm::solver::{check_solution, solve, Objective, PolicyTable};

mod settings;

use settings::Settings;

/// Market making on a discrete-spread order book: calibrate, solve, backtest.
#[derive(Parser, Debug)]
#[command(name = "lobmm", version)]
struct Cli {
    /// Worker threads; 0 uses one per core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Seed for every random draw [default: 42].
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// JSON file of parameter defaults; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Estimate a market model from level-1 tick data.
    Calibrate(CalibrateArgs),
    /// Solve for the optimal policy and write it as JSON.
    Solve(SolveArgs),
    /// Monte Carlo backtest of a policy or benchmark strategy.
    Backtest(BacktestArgs),
    /// Sweep the inventory penalty and tabulate risk against return.
    Frontier(FrontierArgs),
    /// Plot data: a policy slice, or a histogram of per-path wealth.
    Export(ExportArgs),
    /// Write synthetic tick data generated from a model.
    SynthTicks(SynthArgs),
}

#[derive(Args, Debug)]
struct CalibrateArgs {
    /// Tick CSV `ts,bid,ask,bid_sz,ask_sz,buy_vol,sell_vol`.
    #[arg(long)]
    input: PathBuf,
    /// Tick size [default: 0.005].
    #[arg(long)]
    delta: Option<f64>,
    /// Number of spread states kept [default: 6].
    #[arg(long)]
    m: Option<usize>,
    /// Typical order size for the execution proxies [default: 100].
    #[arg(long)]
    v0: Option<f64>,
    /// Tick-clock bucket boundaries, seconds after midnight, comma separated [default: hourly 9:30 to 17:30].
    #[arg(long, value_delimiter = ',')]
    buckets: Option<Vec<f64>>,
    /// Average the two sides and mirror the execution table.
    #[arg(long)]
    symmetrize: bool,
    /// Model JSON; the report goes next to it as `<stem>.report.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Horizon in seconds [default: 300].
    #[arg(long)]
    horizon: Option<f64>,
    /// Stored time slices [default: 100].
    #[arg(long)]
    n_out: Option<usize>,
    /// Lowest inventory node [default: -1000].
    #[arg(long, allow_hyphen_values = true)]
    y_min: Option<i64>,
    /// Highest inventory node [default: 1000].
    #[arg(long)]
    y_max: Option<i64>,
    /// Inventory step [default: 10].
    #[arg(long)]
    dy: Option<i64>,
    /// Internal steps per slice [default: smallest stable count].
    #[arg(long)]
    substeps: Option<usize>,
    /// Largest limit order [default: 100].
    #[arg(long)]
    lbar: Option<i64>,
    /// Largest market order; 0 forbids market orders [default: 100].
    #[arg(long)]
    ebar: Option<i64>,
    /// Shares per unit of inventory in the penalty [default: 1000].
    #[arg(long)]
    inventory_unit: Option<f64>,
    /// Tick-clock time at the start of the horizon [default: 0].
    #[arg(long)]
    clock_offset: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ObjectiveArg {
    MeanPenalty,
    Exponential,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    model: PathBuf,
    /// Objective [default: mean-penalty].
    #[arg(long, value_enum)]
    objective: Option<ObjectiveArg>,
    /// Inventory penalty weight, mean-penalty only [default: 5].
    #[arg(long)]
    gamma: Option<f64>,
    /// Risk aversion, exponential only [default: 1].
    #[arg(long)]
    eta: Option<f64>,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: PathBuf,
    /// Also write the value surface as CSV `t,y,i,value`.
    #[arg(long)]
    dump_values: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimArgs {
    /// Monte Carlo paths [default: 100000].
    #[arg(long)]
    paths: Option<usize>,
    /// Euler step in seconds [default: 0.3].
    #[arg(long)]
    dt: Option<f64>,
    /// Initial spread state [default: 1].
    #[arg(long)]
    i0: Option<usize>,
    /// Order size of the constant and random benchmarks [default: 100].
    #[arg(long)]
    size: Option<f64>,
    /// Horizon in seconds [default: 300].
    #[arg(long)]
    horizon: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum StrategyArg {
    Star,
    Womo,
    Constant,
    Random,
    /// All four side by side.
    Suite,
}

#[derive(Args, Debug)]
struct BacktestArgs {
    #[arg(long)]
    model: PathBuf,
    /// Optimal policy JSON.
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Policy JSON solved without market orders.
    #[arg(long)]
    policy_womo: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "suite")]
    strategy: StrategyArg,
    #[command(flatten)]
    sim: SimArgs,
    /// Summary CSV, one column per strategy.
    #[arg(long)]
    out: PathBuf,
    /// Per-path CSV for a single strategy.
    #[arg(long)]
    per_path: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FrontierArgs {
    #[arg(long)]
    model: PathBuf,
    /// Penalty weights, comma separated [default: 50,25,...,0.006, 14 values halving].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    gammas: Option<Vec<f64>>,
    #[command(flatten)]
    grid: GridArgs,
    /// Monte Carlo paths per point [default: 100000].
    #[arg(long)]
    paths: Option<usize>,
    /// Euler step in seconds [default: 0.3].
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExportArgs {
    /// Policy JSON to map.
    #[arg(long, requires = "slice", conflicts_with = "stats")]
    policy: Option<PathBuf>,
    /// Time in seconds of the slice to map.
    #[arg(long)]
    slice: Option<f64>,
    /// Heatmap CSV.
    #[arg(long, requires = "policy")]
    out: Option<PathBuf>,
    /// Per-path CSV written by `backtest --per-path`.
    #[arg(long, requires = "hist")]
    stats: Option<PathBuf>,
    /// Histogram CSV of final wealth.
    #[arg(long)]
    hist: Option<PathBuf>,
    /// Histogram bins.
    #[arg(long, default_value_t = 50)]
    bins: usize,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Model to simulate [default: reference model with hourly clock].
    #[arg(long)]
    model: Option<PathBuf>,
    /// Trading days [default: 1].
    #[arg(long)]
    days: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

/// Failure with its exit status: usage and validation errors exit 2,
/// runtime and numerical failures exit 1.
#[derive(Debug)]
pub enum Fail {
    Usage(String),
    Runtime(String),
}

impl From<lobmm::Error> for Fail {
    fn from(e: lobmm::Error) -> Self {
        use lobmm::Error::*;
        match e {
            Numerical(_) | UndefinedRatio | Io(_) => Fail::Runtime(e.to_string()),
            _ => Fail::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Fail::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), Fail> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| Fail::Runtime(e.to_string()))?;
    let mut s = Settings::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    match cli.cmd {
        Cmd::Calibrate(a) => cmd_calibrate(a, s),
        Cmd::Solve(a) => cmd_solve(a, s),
        Cmd::Backtest(a) => cmd_backtest(a, s),
        Cmd::Frontier(a) => cmd_frontier(a, s),
        Cmd::Export(a) => cmd_export(a),
        Cmd::SynthTicks(a) => cmd_synth(a, s),
    }
}

macro_rules! set {
    ($s:ident, $a:expr, $($f:ident),+) => { $( if let Some(v) = $a.$f { $s.$f = v; } )+ };
}

fn apply_grid(s: &mut Settings, g: GridArgs) {
    set!(s, g, horizon, n_out, y_min, y_max, dy, lbar, ebar, inventory_unit, clock_offset);
    if g.substeps.is_some() {
        s.substeps = g.substeps;
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Fail> {
    File::open(path).map(BufReader::new).map_err(|e| Fail::Usage(format!("cannot open {}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| Fail::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Writes via a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Fail> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| Fail::Runtime(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn load_model(path: &Path) -> Result<MarketModel<f64>, Fail> {
    let model = MarketModel::<f64>::from_json(&read_text(path)?)?;
    for w in model.validate()? {
        log::warn!("{}: {w}", path.display());
    }
    Ok(model)
}

fn load_policy(path: &Path) -> Result<PolicyTable, Fail> {
    let policy = PolicyTable::from_json(&read_text(path)?)?;
    policy.validate()?;
    Ok(policy)
}

fn cmd_calibrate(a: CalibrateArgs, mut s: Settings) -> Result<(), Fail> {
    set!(s, a, delta, m, v0, buckets);
    let ticks = read_ticks(open(&a.input)?)?;
    let cfg = CalibrationConfig {
        v0: s.v0,
        boundaries: Some(s.buckets.clone()),
        period: Some(s.period),
        symmetrize: a.symmetrize || s.symmetrize,
        ..CalibrationConfig::new(s.delta, s.m)
    };
    let (model, report) = calibrate(&ticks, &cfg)?;
    for flag in &report.flags {
        log::warn!("{flag}");
    }
    let report_json = serde_json::to_string_pretty(&report).map_err(|e| Fail::Runtime(e.to_string()))?;
    write_atomic(&a.out, model.to_json()?.as_bytes())?;
    write_atomic(&a.out.with_extension("report.json"), report_json.as_bytes())?;
    Ok(())
}

fn cmd_solve(a: SolveArgs, mut s: Settings) -> Result<(), Fail> {
    set!(s, a, eta);
    if a.gamma.is_some() {
        s.gamma = a.gamma;
    }
    if let Some(o) = a.objective {
        s.objective = match o {
            ObjectiveArg::MeanPenalty => Objective::MeanPenalty,
            ObjectiveArg::Exponential => Objective::Exponential,
        };
    }
    apply_grid(&mut s, a.grid);
    let model = load_model(&a.model)?;
    let grid = s.grid();
    let params = s.params(model.price.drift, model.price.sigma)?;
    let (surface, policy) = solve(&model, &grid, &params)?;
    let diag = check_solution(&surface, &model, &grid, &params)?;
    log::info!("{diag:?}");
    if diag.floor_hits > 0 {
        log::warn!("{} nodes hit the value floor", diag.floor_hits);
    }
    write_atomic(&a.out, policy.to_json()?.as_bytes())?;
    if let Some(path) = a.dump_values {
        let mut buf = Vec::new();
        surface.write_csv(&mut buf)?;
        write_atomic(&path, &buf)?;
    }
    Ok(())
}

fn cmd_backtest(a: BacktestArgs, mut s: Settings) -> Result<(), Fail> {
    set!(s, a.sim, paths, dt, i0, size, horizon);
    let model = load_model(&a.model)?;
    let cfg = s.sim(model.price.p0);
    cfg.validate(&model)?;
    let need = |p: &Option<PathBuf>, flag: &str| -> Result<PolicyTable, Fail> {
        match p {
            Some(p) => load_policy(p),
            None => Err(Fail::Usage(format!("strategy {} needs {flag}", format!("{:?}", a.strategy).to_lowercase()))),
        }
    };
    let mut out = Vec::new();
    if a.strategy == StrategyArg::Suite {
        if a.per_path.is_some() {
            return Err(Fail::Usage("--per-path needs a single strategy".into()));
        }
        let star = need(&a.policy, "--policy")?;
        let womo = need(&a.policy_womo, "--policy-womo")?;
        benchmark_suite(&star, &womo, &model, &cfg, s.size)?.write_csv(&mut out)?;
    } else {
        let table;
        let (name, strategy) = match a.strategy {
            StrategyArg::Star => {
                table = need(&a.policy, "--policy")?;
                ("optimal", Strategy::Policy(&table))
            }
            StrategyArg::Womo => {
                table = need(&a.policy_womo, "--policy-womo")?;
                ("womo", Strategy::Policy(&table))
            }
            StrategyArg::Constant => ("constant", Strategy::Constant(s.size)),
            StrategyArg::Random => ("random", Strategy::Random(s.size)),
            StrategyArg::Suite => unreachable!(),
        };
        strategy.validate(&model)?;
        let paths = run_paths(&strategy, &model, &cfg)?;
        let stats = BacktestStats::from_paths(&paths)?;
        BenchmarkTable { columns: vec![(name.to_string(), stats)] }.write_csv(&mut out)?;
        if let Some(pp) = &a.per_path {
            let mut buf = Vec::new();
            write_paths_csv(&mut buf, &paths)?;
            write_atomic(pp, &buf)?;
        }
    }
    write_atomic(&a.out, &out)
}

fn cmd_frontier(a: FrontierArgs, mut s: Settings) -> Result<(), Fail> {
    set!(s, a, gammas, paths, dt);
    apply_grid(&mut s, a.grid);
    let model = load_model(&a.model)?;
    let params = s.params(0.0, 0.0)?;
    let cfg = s.sim(model.price.p0);
    cfg.validate(&model)?;
    let rows = efficient_frontier(&model, &s.gammas, &s.grid(), &params, &cfg)?;
    let mut out = Vec::new();
    write_frontier_csv(&mut out, &rows)?;
    write_atomic(&a.out, &out)
}

fn cmd_export(a: ExportArgs) -> Result<(), Fail> {
    match (a.policy, a.stats) {
        (Some(policy), None) => {
            let out = a.out.ok_or_else(|| Fail::Usage("--policy needs --out".into()))?;
            let t = a.slice.ok_or_else(|| Fail::Usage("--policy needs --slice".into()))?;
            let policy = load_policy(&policy)?;
            let g = policy.grid.solver_grid();
            if !(0.0..=g.horizon).contains(&t) {
                return Err(Fail::Usage(format!("slice time {t} outside [0, {}]", g.horizon)));
            }
            let csv = policy_heatmap_export(&policy, g.slice_at(t))?;
            write_atomic(&out, csv.as_bytes())
        }
        (None, Some(stats)) => {
            let hist = a.hist.ok_or_else(|| Fail::Usage("--stats needs --hist".into()))?;
            let values = read_wealth(&stats)?;
            let h = wealth_histogram(&values, a.bins)?;
            write_atomic(&hist, h.to_csv().as_bytes())
        }
        _ => Err(Fail::Usage("give either --policy with --slice and --out, or --stats with --hist".into())),
    }
}

/// Final wealth column of a per-path CSV.
fn read_wealth(path: &Path) -> Result<Vec<f64>, Fail> {
    let text = read_text(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Fail::Usage(format!("{} is empty", path.display())))?;
    let col = header
        .split(',')
        .position(|h| h == "x_T")
        .ok_or_else(|| Fail::Usage(format!("{} has no x_T column", path.display())))?;
    lines
        .enumerate()
        .map(|(row, line)| {
            line.split(',')
                .nth(col)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Fail::Usage(format!("{} row {}: bad x_T", path.display(), row + 2)))
        })
        .collect()
}

fn cmd_synth(a: SynthArgs, s: Settings) -> Result<(), Fail> {
    let model = match &a.model {
        Some(p) => load_model(p)?,
        None => MarketModel { tick_clock: reference::hourly_clock(), ..reference::reference_model() },
    };
    let cfg = SynthConfig { days: a.days.unwrap_or(1), seed: s.seed, ..SynthConfig::default() };
    let ticks = synthesize_ticks(&model, &cfg)?;
    let mut buf = Vec::new();
    write_ticks(&mut buf, &ticks)?;
    write_atomic(&a.out, &buf)
}
