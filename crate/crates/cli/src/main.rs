//! `standby`: simulate stand-by systems, estimate their reliability, test the
//! switching model and run the Monte Carlo studies.

mod io;
mod plot;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use standby::gof::{run_test_with, H0Variance};
use standby::montecarlo::{grid_cells, run_study, run_study_traced, ReplicationOutcome, TraceRow};
use standby::rng::{derive_seed, stream_rng};
use standby::{
    estimate_all, simulate_system, GofData, Hypothesis, HotSample, McConfig, McReport, ParametricDist,
    StandbyModel, SystemConfig, WarmSample,
};

use crate::io::CurveTable;

const DEFAULT_SEED: u64 = 20_240_501;
const LEVEL_SIZES: [usize; 5] = [50, 100, 170, 200, 400];
const POWER_SIZES: [usize; 3] = [100, 170, 400];
const POWER_DAMAGES: [f64; 4] = [0.1, 0.25, 0.5, 0.75];

#[derive(Debug, Parser)]
#[command(name = "standby", version, about = "Warm stand-by reliability: simulation, estimation and model tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate hot, warm and system failure times into a dataset directory.
    Simulate(SimulateArgs),
    /// Estimate r, the unit and system CDFs and the mean system lifetime.
    Estimate(EstimateArgs),
    /// Test the switching model. Exit status 0 = not rejected, 1 = rejected, 2 = error.
    Gof(GofArgs),
    /// Empirical significance level over a range of sample sizes.
    McLevel(McArgs),
    /// Empirical power against switch damage over an (n, p) grid.
    McPower(McArgs),
    /// Render a curve table as an SVG step plot.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HypothesisArg {
    H0,
    H0star,
}

impl From<HypothesisArg> for Hypothesis {
    fn from(h: HypothesisArg) -> Self {
        match h {
            HypothesisArg::H0 => Hypothesis::H0,
            HypothesisArg::H0star => Hypothesis::H0Star,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VarianceArg {
    Published,
    ChangeOfVariables,
}

impl From<VarianceArg> for H0Variance {
    fn from(v: VarianceArg) -> Self {
        match v {
            VarianceArg::Published => H0Variance::Published,
            VarianceArg::ChangeOfVariables => H0Variance::ChangeOfVariables,
        }
    }
}

/// Hot law (exponential, or Weibull when `--shape` is given) and warm scale.
#[derive(Debug, Clone, Copy, Args)]
struct ModelArgs {
    /// Hot failure rate; the Weibull scale is 1/rate.
    #[arg(long, default_value_t = 1.0)]
    rate: f64,
    /// Weibull shape of the hot law; exponential when omitted.
    #[arg(long)]
    shape: Option<f64>,
    /// Warm time-scale ratio: F2(t) = F1(r t).
    #[arg(long, default_value_t = 0.5)]
    r: f64,
}

impl ModelArgs {
    fn model(&self) -> Result<StandbyModel> {
        build_model(self.rate, self.shape, self.r)
    }
}

fn build_model(rate: f64, shape: Option<f64>, r: f64) -> Result<StandbyModel> {
    let hot = match shape {
        None => ParametricDist::exponential(rate)?,
        Some(k) => {
            if !(rate > 0.0 && rate.is_finite()) {
                bail!("rate must be positive, got {rate}");
            }
            ParametricDist::weibull(k, 1.0 / rate)?
        }
    };
    Ok(StandbyModel::scale_aft(hot, r)?)
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Units per system (main unit plus m - 1 stand-by units).
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Switch damage probability.
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    /// Number of systems.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Hot sample size (defaults to n).
    #[arg(long)]
    n1: Option<usize>,
    /// Warm units on test (defaults to n).
    #[arg(long)]
    n2: Option<usize>,
    /// Censoring time of the warm test; complete when omitted.
    #[arg(long)]
    t1: Option<f64>,
    #[arg(long, env = "STANDBY_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Dataset directory written by `simulate`; supplies the sample files, t1 and n2.
    #[arg(long, conflicts_with_all = ["hot", "warm"])]
    dataset: Option<PathBuf>,
    #[arg(long, requires = "warm")]
    hot: Option<PathBuf>,
    #[arg(long, requires = "hot")]
    warm: Option<PathBuf>,
    /// Censoring time of the warm test.
    #[arg(long, requires = "n2")]
    t1: Option<f64>,
    /// Warm units on test when censored.
    #[arg(long)]
    n2: Option<usize>,
    /// Units per system (defaults to the dataset's m, else 2).
    #[arg(long)]
    m: Option<usize>,
    /// Output directory for report.json and curves.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct GofArgs {
    #[arg(long, conflicts_with_all = ["systems", "hot", "warm"])]
    dataset: Option<PathBuf>,
    #[arg(long, requires_all = ["hot", "warm"])]
    systems: Option<PathBuf>,
    #[arg(long)]
    hot: Option<PathBuf>,
    #[arg(long)]
    warm: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = HypothesisArg::H0star)]
    hypothesis: HypothesisArg,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Variance form under the general model.
    #[arg(long, value_enum, default_value_t = VarianceArg::Published)]
    h0_variance: VarianceArg,
    /// Also write the result to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Study parameters. Flags override the values of `--config`.
#[derive(Debug, Args)]
struct McArgs {
    /// Study file as written to `<out>/config.json` by an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated sample sizes, n = n1 = n2.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Comma-separated switch damage probabilities (power study only).
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    shape: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum)]
    hypothesis: Option<HypothesisArg>,
    #[arg(long, value_enum)]
    h0_variance: Option<VarianceArg>,
    #[arg(long, env = "STANDBY_SEED")]
    seed: Option<u64>,
    /// Worker threads (defaults to the available cores).
    #[arg(long)]
    parallelism: Option<usize>,
    /// Also write every replication outcome to trace.csv.
    #[arg(long)]
    trace: bool,
    /// Output directory for report.csv, report.json and config.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Curve table with a `time` column, e.g. curves.csv from `estimate`.
    #[arg(long)]
    curves: PathBuf,
    /// Comma-separated subset of columns to draw.
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    #[arg(long, default_value = "Estimated distribution functions")]
    title: String,
    /// SVG output file.
    #[arg(long)]
    out: PathBuf,
}

/// Sidecar describing a simulated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Manifest {
    seed: u64,
    m: usize,
    n: usize,
    n1: usize,
    n2: usize,
    /// `None` for a complete warm test.
    t1: Option<f64>,
    p: f64,
    model: StandbyModel,
    hot: String,
    warm: String,
    systems: String,
}

/// A Monte Carlo study: the base configuration and its `(n, p)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StudySpec {
    config: McConfig,
    sizes: Vec<usize>,
    damages: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct EstimateReport {
    m: usize,
    n1: usize,
    n2: usize,
    warm_failures: usize,
    t1: Option<f64>,
    r_hat: Option<f64>,
    mu_hat: f64,
    mu_is_lower_bound: bool,
    grid_points: usize,
    curves: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Simulate(args) => simulate(&args)?,
        Command::Estimate(args) => estimate(&args)?,
        Command::Gof(args) => return gof(&args),
        Command::McLevel(args) => mc(&args, false)?,
        Command::McPower(args) => mc(&args, true)?,
        Command::Plot(args) => plot_curves(&args)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let model = args.model.model()?;
    let system = SystemConfig::new(args.m, model.with_damage(args.p)?)?;
    let (n1, n2) = (args.n1.unwrap_or(args.n), args.n2.unwrap_or(args.n));
    if args.n == 0 || n1 == 0 {
        bail!("sample sizes must be positive");
    }
    if let Some(t1) = args.t1 {
        if t1.is_nan() || t1 <= 0.0 {
            bail!("t1 must be positive, got {t1}");
        }
    }

    let mut rng = stream_rng(derive_seed(args.seed, 0));
    let hot: Vec<f64> = (0..n1).map(|_| model.hot.sample(&mut rng)).collect();
    let warm_law = model.warm();
    let mut rng = stream_rng(derive_seed(args.seed, 1));
    let warm: Vec<f64> = (0..n2)
        .map(|_| warm_law.sample(&mut rng))
        .filter(|&x| args.t1.is_none_or(|t1| x <= t1))
        .collect();
    let mut rng = stream_rng(derive_seed(args.seed, 2));
    let systems: Vec<f64> = (0..args.n).map(|_| simulate_system(&mut rng, &system)).collect();

    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    let manifest = Manifest {
        seed: args.seed,
        m: args.m,
        n: args.n,
        n1,
        n2,
        t1: args.t1,
        p: args.p,
        model,
        hot: "hot.csv".into(),
        warm: "warm.csv".into(),
        systems: "systems.csv".into(),
    };
    io::write_sample(&args.out.join(&manifest.hot), &hot)?;
    io::write_sample(&args.out.join(&manifest.warm), &warm)?;
    io::write_sample(&args.out.join(&manifest.systems), &systems)?;
    io::write_json(&args.out.join("manifest.json"), &manifest)
}

fn read_manifest(dir: &Path) -> Result<Manifest> {
    io::read_json(&dir.join("manifest.json"))
}

fn estimate(args: &EstimateArgs) -> Result<()> {
    let (hot_path, warm_path, t1, n2, default_m) = match &args.dataset {
        Some(dir) => {
            let man = read_manifest(dir)?;
            (dir.join(&man.hot), dir.join(&man.warm), man.t1, Some(man.n2), man.m)
        }
        None => match (&args.hot, &args.warm) {
            (Some(h), Some(w)) => (h.clone(), w.clone(), args.t1, args.n2, 2),
            _ => bail!("give --dataset or both --hot and --warm"),
        },
    };
    let m = args.m.unwrap_or(default_m);
    let hot = HotSample::new(io::read_sample(&hot_path)?).with_context(|| hot_path.display().to_string())?;
    let warm_times = io::read_sample(&warm_path)?;
    let warm = match t1 {
        Some(t1) => WarmSample::censored(warm_times, n2.context("--t1 needs --n2")?, t1),
        None => WarmSample::complete(warm_times),
    }
    .with_context(|| warm_path.display().to_string())?;

    let est = estimate_all(&hot, &warm, m)?;
    let mut curves = vec![("F1".to_string(), est.grid.iter().map(|&t| est.f1_hat_cdf.eval(t)).collect())];
    if let Some(f2) = &est.f2_hat_cdf {
        curves.push(("F2".to_string(), est.grid.iter().map(|&t| f2.eval(t)).collect()));
    }
    for (j, k) in est.k_hat.iter().enumerate() {
        curves.push((format!("K{}", j + 2), est.grid.iter().map(|&t| k.eval(t)).collect()));
    }
    let table = CurveTable {
        time: est.grid.clone(),
        curves,
    };

    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    table.write(&args.out.join("curves.csv"))?;
    let report = EstimateReport {
        m,
        n1: hot.len(),
        n2: warm.n_on_test(),
        warm_failures: warm.failures(),
        t1,
        r_hat: est.r_hat,
        mu_hat: est.mu_hat,
        mu_is_lower_bound: est.mu_is_lower_bound,
        grid_points: est.grid.len(),
        curves: "curves.csv".into(),
    };
    io::write_json(&args.out.join("report.json"), &report)
}

fn gof(args: &GofArgs) -> Result<ExitCode> {
    let (systems, hot, warm) = match &args.dataset {
        Some(dir) => {
            let man = read_manifest(dir)?;
            if man.t1.is_some() {
                bail!("the model test needs a complete warm sample; {} is censored", dir.display());
            }
            (dir.join(&man.systems), dir.join(&man.hot), dir.join(&man.warm))
        }
        None => match (&args.systems, &args.hot, &args.warm) {
            (Some(s), Some(h), Some(w)) => (s.clone(), h.clone(), w.clone()),
            _ => bail!("give --dataset or all of --systems, --hot and --warm"),
        },
    };
    let data = GofData::new(io::read_sample(&systems)?, io::read_sample(&hot)?, io::read_sample(&warm)?)?;
    let result = run_test_with(&data, args.hypothesis.into(), args.alpha, args.h0_variance.into())?;
    let json = serde_json::to_string_pretty(&result)?;
    println!("{json}");
    if let Some(out) = &args.out {
        io::write_json(out, &result)?;
    }
    Ok(if result.reject { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn study_spec(args: &McArgs, power: bool) -> Result<StudySpec> {
    let mut spec = match &args.config {
        Some(path) => io::read_json::<StudySpec>(path)?,
        None => {
            let (sizes, damages) = if power {
                (POWER_SIZES.to_vec(), POWER_DAMAGES.to_vec())
            } else {
                (LEVEL_SIZES.to_vec(), vec![0.0])
            };
            let mut config = McConfig::exponential(1.0, 0.5, sizes[0], 3000, DEFAULT_SEED)?;
            config.parallelism = std::thread::available_parallelism().map_or(1, |n| n.get());
            StudySpec { config, sizes, damages }
        }
    };
    let c = &mut spec.config;
    if args.rate.is_some() || args.shape.is_some() || args.r.is_some() {
        let (rate, shape, r) = current_model_params(&c.model);
        c.model = build_model(
            args.rate.unwrap_or(rate),
            args.shape.or(shape),
            args.r.unwrap_or(r),
        )?;
    }
    if !args.n.is_empty() {
        spec.sizes = args.n.clone();
    }
    if power && !args.p.is_empty() {
        spec.damages = args.p.clone();
    } else if !power {
        if !args.p.is_empty() {
            bail!("--p applies to mc-power only");
        }
        spec.damages = vec![0.0];
    }
    if let Some(reps) = args.reps {
        c.replications = reps;
    }
    if let Some(alpha) = args.alpha {
        c.alpha = alpha;
    }
    if let Some(h) = args.hypothesis {
        c.hypothesis = h.into();
    }
    if let Some(v) = args.h0_variance {
        c.h0_variance = v.into();
    }
    if let Some(seed) = args.seed {
        c.master_seed = seed;
    }
    if let Some(threads) = args.parallelism {
        c.parallelism = threads;
    }
    Ok(spec)
}

/// `(rate, shape, r)` of a scale model, falling back to the defaults.
fn current_model_params(model: &StandbyModel) -> (f64, Option<f64>, f64) {
    let r = match model.mode {
        standby::SwitchMode::ScaleAft { r } => r,
        standby::SwitchMode::GeneralSedyakin { .. } => 0.5,
    };
    match model.hot {
        ParametricDist::Exponential { rate } => (rate, None, r),
        ParametricDist::Weibull { shape, scale } => (1.0 / scale, Some(shape), r),
    }
}

fn mc(args: &McArgs, power: bool) -> Result<()> {
    let spec = study_spec(args, power)?;
    let cells = grid_cells(&spec.config, &spec.sizes, &spec.damages)?;
    let (report, trace) = if args.trace {
        let (report, rows) = run_study_traced(&spec.config, &cells)?;
        (report, Some(rows))
    } else {
        (run_study(&spec.config, &cells)?, None)
    };

    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    write_text(&args.out.join("report.csv"), &report.to_csv())?;
    write_text(&args.out.join("report.json"), &(report.to_json() + "\n"))?;
    io::write_json(&args.out.join("config.json"), &spec)?;
    if let Some(rows) = trace {
        write_trace(&args.out.join("trace.csv"), &rows)?;
    }
    print_summary(&report);
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(["n", "p", "replication", "outcome", "yn2", "reject", "error"])?;
    for row in rows {
        let (outcome, yn2, reject, error) = match &row.outcome {
            ReplicationOutcome::Tested { yn2, reject } => ("tested", yn2.to_string(), reject.to_string(), String::new()),
            ReplicationOutcome::Failed { error } => ("failed", String::new(), String::new(), error.clone()),
        };
        w.write_record([
            row.n.to_string(),
            row.p.to_string(),
            row.replication.to_string(),
            outcome.to_string(),
            yn2,
            reject,
            error,
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn print_summary(report: &McReport) {
    for cell in &report.cells {
        eprintln!(
            "n = {:>4}  p = {:<5}  rate = {:.4} (se {:.4})  failures = {}",
            cell.n, cell.p, cell.rate, cell.se, cell.failures
        );
    }
    eprintln!("elapsed {:.2?}", report.elapsed);
}

fn plot_curves(args: &PlotArgs) -> Result<()> {
    let mut table = CurveTable::read(&args.curves)?;
    if !args.columns.is_empty() {
        for name in &args.columns {
            if !table.curves.iter().any(|(c, _)| c == name) {
                bail!("{}: no column '{name}'", args.curves.display());
            }
        }
        table.curves.retain(|(c, _)| args.columns.contains(c));
    }
    write_text(&args.out, &plot::render_svg(&table, &args.title))
}
