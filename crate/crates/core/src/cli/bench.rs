//! Benchmark suites: generate, discover and evaluate over seeded cells.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{simulate, CliError, DataModel, Simulated, SimulationArgs};
use crate::dataset::discretize;
use crate::eval::{compare, MetricReport};
use crate::graph::{generate_dag, GenConfig, GraphKind};
use crate::{glide, GlideConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchCell {
    /// Row label; defaults to a description of the cell.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default = "default_kind")]
    pub kind: GraphKind,
    pub d: usize,
    pub e: usize,
    pub model: DataModel,
    pub n: usize,
    /// Number of runs; run `k` uses seed `first_seed + k` for graph, data and discovery.
    pub seeds: u64,
    #[serde(default)]
    pub first_seed: u64,
    #[serde(default)]
    pub config: GlideConfig,
    #[serde(default = "default_min_cats")]
    pub min_cats: usize,
    #[serde(default = "default_max_cats")]
    pub max_cats: usize,
}

fn default_kind() -> GraphKind {
    GraphKind::ErdosRenyi
}

fn default_min_cats() -> usize {
    2
}

fn default_max_cats() -> usize {
    5
}

impl BenchCell {
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            let kind =
                serde_json::to_value(self.kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
            let model =
                serde_json::to_value(self.model).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
            format!("{kind}-d{}-e{}-{model}-n{}", self.d, self.e, self.n)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSuite {
    pub cells: Vec<BenchCell>,
}

/// Sample mean with a two-sided 95% Student-t interval; bounds are `None` below two samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub mean: f64,
    pub low: Option<f64>,
    pub high: Option<f64>,
}

impl Interval {
    pub fn of(xs: &[f64]) -> Interval {
        let n = xs.len();
        if n == 0 {
            return Interval { mean: f64::NAN, low: None, high: None };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n < 2 {
            return Interval { mean, low: None, high: None };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive degrees of freedom").inverse_cdf(0.975);
        let half = t * (var / n as f64).sqrt();
        Interval { mean, low: Some(mean - half), high: Some(mean + half) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFailure {
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub seed: u64,
    pub metrics: MetricReport,
    pub runtime_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub cell: String,
    pub runs: usize,
    pub failures: usize,
    pub shd: Interval,
    pub spurious_rate: Interval,
    pub tpr: Interval,
    pub runtime_secs: Interval,
    pub failed: Vec<CellFailure>,
    pub records: Vec<RunRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: BenchSuite,
    pub rows: Vec<BenchRow>,
}

fn run_one(cell: &BenchCell, seed: u64) -> Result<RunRecord, String> {
    let dag = generate_dag(&GenConfig::new(cell.kind, cell.d, cell.e, seed)).map_err(|e| e.to_string())?;
    let sim = SimulationArgs { min_cats: cell.min_cats, max_cats: cell.max_cats, ..SimulationArgs::default() };
    let cfg = GlideConfig { seed, ..cell.config.clone() };
    let data = match simulate(&dag, cell.model, cell.n, seed, &sim).map_err(|e| e.to_string())? {
        Simulated::Categorical(ds, _) => ds,
        Simulated::Continuous(t, _) => discretize(&t, cfg.bins).map_err(|e| e.to_string())?,
    };
    let start = Instant::now();
    let result = glide(&data, &cfg).map_err(|e| e.to_string())?;
    let runtime_secs = start.elapsed().as_secs_f64();
    let metrics = compare(&result.dag, &dag).map_err(|e| e.to_string())?;
    Ok(RunRecord { seed, metrics, runtime_secs })
}

/// Runs every (cell, seed) pair in a worker pool; rows keep suite order.
pub fn run_suite(suite: &BenchSuite) -> Result<SuiteResult, CliError> {
    for cell in &suite.cells {
        cell.config.validate().map_err(|e| CliError::Input(format!("cell `{}`: {e}", cell.label())))?;
        if cell.seeds == 0 {
            return Err(CliError::Input(format!("cell `{}`: seeds must be at least 1", cell.label())));
        }
    }
    let jobs: Vec<(usize, u64)> = suite
        .cells
        .iter()
        .enumerate()
        .flat_map(|(c, cell)| (0..cell.seeds).map(move |k| (c, cell.first_seed + k)))
        .collect();
    let outcomes: Vec<Result<RunRecord, String>> =
        jobs.par_iter().map(|&(c, seed)| run_one(&suite.cells[c], seed)).collect();

    let mut rows = Vec::with_capacity(suite.cells.len());
    for (c, cell) in suite.cells.iter().enumerate() {
        let mut records = Vec::new();
        let mut failed = Vec::new();
        for (&(jc, seed), out) in jobs.iter().zip(&outcomes) {
            if jc != c {
                continue;
            }
            match out {
                Ok(r) => records.push(r.clone()),
                Err(error) => failed.push(CellFailure { seed, error: error.clone() }),
            }
        }
        let col = |f: fn(&RunRecord) -> f64| Interval::of(&records.iter().map(f).collect::<Vec<_>>());
        rows.push(BenchRow {
            cell: cell.label(),
            runs: records.len(),
            failures: failed.len(),
            shd: col(|r| r.metrics.shd as f64),
            spurious_rate: col(|r| r.metrics.spurious_rate),
            tpr: col(|r| r.metrics.tpr),
            runtime_secs: col(|r| r.runtime_secs),
            failed,
            records,
        });
    }
    Ok(SuiteResult { suite: suite.clone(), rows })
}

#[derive(Serialize)]
struct CsvRow<'a> {
    cell: &'a str,
    runs: usize,
    failures: usize,
    shd_mean: f64,
    shd_ci_low: Option<f64>,
    shd_ci_high: Option<f64>,
    spurious_mean: f64,
    spurious_ci_low: Option<f64>,
    spurious_ci_high: Option<f64>,
    tpr_mean: f64,
    runtime_mean_secs: f64,
    runtime_ci_low: Option<f64>,
    runtime_ci_high: Option<f64>,
}

pub(crate) fn write_csv(rows: &[BenchRow], path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    for r in rows {
        w.serialize(CsvRow {
            cell: &r.cell,
            runs: r.runs,
            failures: r.failures,
            shd_mean: r.shd.mean,
            shd_ci_low: r.shd.low,
            shd_ci_high: r.shd.high,
            spurious_mean: r.spurious_rate.mean,
            spurious_ci_low: r.spurious_rate.low,
            spurious_ci_high: r.spurious_rate.high,
            tpr_mean: r.tpr.mean,
            runtime_mean_secs: r.runtime_secs.mean,
            runtime_ci_low: r.runtime_secs.low,
            runtime_ci_high: r.runtime_secs.high,
        })
        .map_err(|e| CliError::Run(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Run(e.to_string()))
}
