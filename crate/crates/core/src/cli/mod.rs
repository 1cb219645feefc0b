//! Command-line front end: graph and data generation, discovery, evaluation
//! and benchmark suites.
//!
//! Exit codes: 0 success, 1 run failure, 2 input error.

mod bench;
mod manifest;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

pub use bench::{run_suite, BenchCell, BenchRow, BenchSuite, CellFailure, Interval, SuiteResult};
pub use manifest::{manifest_path, RunManifest};

use crate::augment::EnvironmentLayout;
use crate::dataset::{
    discretize, read_categorical_csv, read_continuous_csv, write_categorical_csv, write_continuous_csv,
    CategoricalModel, Dataset, DatasetError, LinearGaussianModel, NonlinearModel,
};
use crate::eval::compare;
use crate::graph::{generate_dag, load_edge_list, save_edge_list, Dag, GenConfig, GraphError, GraphKind};
use crate::invariance::TieBreak;
use crate::{glide, GlideConfig, GlideError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUN_FAILURE: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT_ERROR,
            CliError::Run(_) => EXIT_RUN_FAILURE,
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<GlideError> for CliError {
    fn from(e: GlideError) -> Self {
        match e {
            GlideError::Config(_) | GlideError::Data(_) => CliError::Input(e.to_string()),
            other => CliError::Run(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "glide", version, about = "Causal graph discovery from observational data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random DAG and write it as an edge list.
    GenGraph(GenGraphArgs),
    /// Simulate a dataset from a graph.
    GenData(GenDataArgs),
    /// Learn a graph from a CSV dataset.
    Discover(Box<DiscoverArgs>),
    /// Compare a predicted graph against the true graph.
    Eval(EvalArgs),
    /// Run a benchmark suite.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenGraphArgs {
    #[arg(long, default_value = "erdos_renyi", value_parser = parse_from_str::<GraphKind>)]
    pub kind: GraphKind,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub e: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataModel {
    /// Linear Gaussian.
    Lg,
    /// Nonlinear with uniform noise.
    Nlng,
    /// Categorical with random conditional tables.
    Cat,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulationArgs {
    #[arg(long, default_value_t = 2)]
    pub min_cats: usize,
    #[arg(long, default_value_t = 5)]
    pub max_cats: usize,
    #[arg(long, default_value_t = 0.5)]
    pub weight_low: f64,
    #[arg(long, default_value_t = 2.0)]
    pub weight_high: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise_sd: f64,
}

impl Default for SimulationArgs {
    fn default() -> Self {
        SimulationArgs { min_cats: 2, max_cats: 5, weight_low: 0.5, weight_high: 2.0, noise_sd: 1.0 }
    }
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub model: DataModel,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub sim: SimulationArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Integer category codes.
    Cat,
    /// Real values, discretized with `--bins` equal-width bins.
    Cont,
}

/// Flags overriding the configuration file, which overrides defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigFlags {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub laplace: Option<f64>,
    #[arg(long)]
    pub pool: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub min_rows: Option<usize>,
    #[arg(long)]
    pub cap_k: Option<usize>,
    #[arg(long)]
    pub max_candidates: Option<usize>,
    #[arg(long, value_parser = parse_from_str::<EnvironmentLayout>)]
    pub layout: Option<EnvironmentLayout>,
    #[arg(long, value_parser = parse_from_str::<TieBreak>)]
    pub tie_break: Option<TieBreak>,
    #[arg(long)]
    pub tie_tolerance: Option<f64>,
    #[arg(long)]
    pub min_stratum: Option<usize>,
}

impl ConfigFlags {
    pub fn resolve(&self) -> Result<GlideConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let file = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                serde_json::from_reader(BufReader::new(file))
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
            }
            None => GlideConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {$(if let Some(v) = self.$flag.clone() { cfg.$field = v; })*};
        }
        set!(m => m, gamma => gamma_o, epsilon => epsilon, alpha => ci_alpha, bins => bins, laplace => laplace_alpha,
             pool => pool, seed => seed, min_rows => min_rows, cap_k => cap_k, max_candidates => max_candidates,
             layout => layout, tie_break => tie_break, tie_tolerance => tie_tolerance, min_stratum => min_stratum);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "cat")]
    pub mode: Mode,
    /// Predicted edge list.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON run report; defaults to `<out>.report.json`.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub flags: ConfigFlags,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Suite definition (JSON).
    #[arg(long)]
    pub suite: PathBuf,
    /// Output prefix; writes `<out>.csv` and `<out>.json`.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_from_str<T: std::str::FromStr<Err = String>>(s: &str) -> Result<T, String> {
    s.parse()
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Run(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| io_err(path, e))
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenGraph(a) => gen_graph(&a),
        Command::GenData(a) => gen_data(&a),
        Command::Discover(a) => discover(&a),
        Command::Eval(a) => eval(&a),
        Command::Bench(a) => bench(&a),
    }
}

fn gen_graph(a: &GenGraphArgs) -> Result<(), CliError> {
    let cfg = GenConfig::new(a.kind, a.d, a.e, a.seed);
    let manifest = RunManifest::start("gen-graph", &cfg, a.seed);
    let dag = generate_dag(&cfg)?;
    save_edge_list(&dag, &a.out)?;
    write_json(&manifest_path(&a.out), &manifest.output(&a.out).finish())
}

/// Simulated data, continuous or categorical, plus the generating model.
pub enum Simulated {
    Categorical(Dataset, CategoricalModel),
    Continuous(crate::dataset::ContinuousTable, serde_json::Value),
}

pub fn simulate(dag: &Dag, model: DataModel, n: usize, seed: u64, sim: &SimulationArgs) -> Result<Simulated, CliError> {
    if n == 0 {
        return Err(CliError::Input("n must be at least 1".into()));
    }
    let json = |v: serde_json::Result<serde_json::Value>| v.unwrap_or(serde_json::Value::Null);
    Ok(match model {
        DataModel::Cat => {
            let m = CategoricalModel::random(dag, sim.min_cats, sim.max_cats, seed)?;
            Simulated::Categorical(m.sample(n, seed), m)
        }
        DataModel::Lg => {
            let m = LinearGaussianModel::random(dag, sim.weight_low, sim.weight_high, sim.noise_sd, seed)?;
            Simulated::Continuous(m.sample(n, seed), json(serde_json::to_value(&m)))
        }
        DataModel::Nlng => {
            let m = NonlinearModel::random(dag, seed);
            Simulated::Continuous(m.sample(n, seed), json(serde_json::to_value(&m)))
        }
    })
}

#[derive(Serialize)]
struct DataSidecar<'a> {
    manifest: RunManifest,
    model: DataModel,
    n: usize,
    parameters: &'a SimulationArgs,
    generator: serde_json::Value,
}

fn gen_data(a: &GenDataArgs) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Snapshot<'a> {
        model: DataModel,
        n: usize,
        sim: &'a SimulationArgs,
    }
    let manifest = RunManifest::start("gen-data", &Snapshot { model: a.model, n: a.n, sim: &a.sim }, a.seed);
    let dag = load_edge_list(&a.graph)?;
    let out = File::create(&a.out).map_err(|e| io_err(&a.out, e))?;
    let generator = match simulate(&dag, a.model, a.n, a.seed, &a.sim)? {
        Simulated::Categorical(ds, m) => {
            write_categorical_csv(&ds, BufWriter::new(out))?;
            serde_json::to_value(&m).unwrap_or(serde_json::Value::Null)
        }
        Simulated::Continuous(t, m) => {
            write_continuous_csv(&t, BufWriter::new(out))?;
            m
        }
    };
    let sidecar = DataSidecar {
        manifest: manifest.input(&a.graph).output(&a.out).finish(),
        model: a.model,
        n: a.n,
        parameters: &a.sim,
        generator,
    };
    write_json(&with_suffix(&a.out, ".json"), &sidecar)
}

pub fn load_dataset(path: &Path, mode: Mode, bins: usize) -> Result<Dataset, CliError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    Ok(match mode {
        Mode::Cat => read_categorical_csv(reader)?,
        Mode::Cont => discretize(&read_continuous_csv(reader)?, bins)?,
    })
}

#[derive(Serialize)]
struct DiscoverOutput<'a> {
    manifest: RunManifest,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a crate::GlideReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn discover(a: &DiscoverArgs) -> Result<(), CliError> {
    let cfg = a.flags.resolve()?;
    let report_path = a.report.clone().unwrap_or_else(|| with_suffix(&a.out, ".report.json"));
    let manifest = RunManifest::start("discover", &cfg, cfg.seed).input(&a.data);
    let data = load_dataset(&a.data, a.mode, cfg.bins)?;
    match glide(&data, &cfg) {
        Ok(result) => {
            save_edge_list(&result.dag, &a.out)?;
            let manifest = manifest.output(&a.out).output(&report_path).finish();
            write_json(&report_path, &DiscoverOutput { manifest, report: Some(&result.report), error: None })
        }
        Err(e) => {
            let err = CliError::from(e);
            if let CliError::Run(msg) = &err {
                let manifest = manifest.output(&report_path).finish();
                write_json(&report_path, &DiscoverOutput { manifest, report: None, error: Some(msg.clone()) })?;
            }
            Err(err)
        }
    }
}

fn eval(a: &EvalArgs) -> Result<(), CliError> {
    let pred = load_edge_list(&a.pred)?;
    let truth = load_edge_list(&a.truth)?;
    let r = compare(&pred, &truth).map_err(|e| CliError::Input(e.to_string()))?;
    let text = if a.json {
        serde_json::to_string_pretty(&r).map_err(|e| CliError::Run(e.to_string()))?
    } else {
        format!(
            "shd {}\nspurious_rate {}\ntpr {}\nmissing {} extra {} reversed {}\npredicted_edges {} true_edges {}",
            r.shd, r.spurious_rate, r.tpr, r.missing, r.extra, r.reversed, r.predicted_edges, r.true_edges
        )
    };
    // A closed pipe on stdout is not an error worth reporting.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    Ok(())
}

fn bench(a: &BenchArgs) -> Result<(), CliError> {
    let file = File::open(&a.suite).map_err(|e| io_err(&a.suite, e))?;
    let suite: BenchSuite = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| CliError::Input(format!("{}: {e}", a.suite.display())))?;
    let manifest = RunManifest::start("bench", &suite, suite.cells.first().map_or(0, |c| c.first_seed)).input(&a.suite);
    let result = run_suite(&suite)?;
    let csv_path = with_suffix(&a.out, ".csv");
    let json_path = with_suffix(&a.out, ".json");
    bench::write_csv(&result.rows, &csv_path)?;
    #[derive(Serialize)]
    struct BenchOutput<'a> {
        manifest: RunManifest,
        #[serde(flatten)]
        result: &'a SuiteResult,
    }
    let manifest = manifest.output(&csv_path).output(&json_path).finish();
    write_json(&json_path, &BenchOutput { manifest, result: &result })?;
    for row in &result.rows {
        println!(
            "{}: runs {} failures {} shd {:.2} spurious {:.4} runtime {:.2}s",
            row.cell, row.runs, row.failures, row.shd.mean, row.spurious_rate.mean, row.runtime_secs.mean
        );
    }
    Ok(())
}
