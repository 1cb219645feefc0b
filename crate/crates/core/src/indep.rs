//! Marginal and conditional independence tests.
//!
//! Two interchangeable backends: a G-test (likelihood-ratio chi-square) on
//! categorical codes, and a d-separation oracle on a known graph. Results are
//! memoized per `(x, y, sorted z)`; the G-test stands in for the pairwise
//! "Fisher" screen as the usual O(n) contingency test on categorical data.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::dataset::{radix, Dataset, DatasetError};
use crate::graph::{Dag, GraphError};

/// Strata with fewer rows than this are skipped by the stratified test.
pub const DEFAULT_MIN_STRATUM: usize = 5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IndepError {
    #[error("variable {0} out of range")]
    OutOfRange(usize),
    #[error("invalid test: {0}")]
    InvalidQuery(String),
    #[error("significance level {0} must lie in (0, 1)")]
    InvalidAlpha(f64),
    #[error(transparent)]
    Data(#[from] DatasetError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFlag {
    /// A variable is constant, so the table carries no information.
    DegenerateTable,
    /// Some strata were below the minimum support and were skipped.
    SparseStrata,
    /// Every stratum was skipped or degenerate.
    AllStrataDegenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub independent: bool,
    /// `NaN` for the oracle backend.
    pub p_value: f64,
    pub statistic: f64,
    pub dof: usize,
    pub flag: Option<TestFlag>,
}

impl TestOutcome {
    fn oracle(independent: bool) -> Self {
        TestOutcome { independent, p_value: f64::NAN, statistic: f64::NAN, dof: 0, flag: None }
    }
}

pub enum Backend<'a> {
    Data { data: &'a Dataset, alpha: f64 },
    Oracle { dag: &'a Dag },
}

/// Counters for reporting how tests behaved over a run.
#[derive(Debug, Default, Clone, Serialize)]
pub struct TestStats {
    pub tests_run: usize,
    pub cache_hits: usize,
    pub degenerate_tables: usize,
    pub sparse_strata: usize,
    pub all_strata_degenerate: usize,
}

#[derive(Default)]
struct Counters {
    tests_run: AtomicUsize,
    cache_hits: AtomicUsize,
    degenerate_tables: AtomicUsize,
    sparse_strata: AtomicUsize,
    all_strata_degenerate: AtomicUsize,
}

type CacheKey = (usize, usize, Vec<usize>);

/// A memoizing independence oracle over `d` variables.
pub struct IndepSource<'a> {
    backend: Backend<'a>,
    d: usize,
    min_stratum: usize,
    cache: Mutex<HashMap<CacheKey, TestOutcome>>,
    counters: Counters,
}

impl<'a> IndepSource<'a> {
    /// G-test backend at significance level `alpha`.
    pub fn data(data: &'a Dataset, alpha: f64) -> Result<Self, IndepError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(IndepError::InvalidAlpha(alpha));
        }
        Ok(Self::with_backend(Backend::Data { data, alpha }, data.n_vars()))
    }

    /// d-separation backend on a known graph.
    pub fn oracle(dag: &'a Dag) -> Self {
        Self::with_backend(Backend::Oracle { dag }, dag.node_count())
    }

    fn with_backend(backend: Backend<'a>, d: usize) -> Self {
        IndepSource {
            backend,
            d,
            min_stratum: DEFAULT_MIN_STRATUM,
            cache: Mutex::new(HashMap::new()),
            counters: Counters::default(),
        }
    }

    pub fn with_min_stratum(mut self, rows: usize) -> Self {
        self.min_stratum = rows;
        self
    }

    pub fn n_vars(&self) -> usize {
        self.d
    }

    pub fn is_oracle(&self) -> bool {
        matches!(self.backend, Backend::Oracle { .. })
    }

    /// Whether `xi` and `xj` are marginally dependent.
    pub fn dependent(&self, xi: usize, xj: usize) -> Result<bool, IndepError> {
        Ok(!self.test(xi, xj, &[])?.independent)
    }

    /// Whether `x` is independent of `y` given `z`.
    pub fn cond_independent(&self, x: usize, y: usize, z: &[usize]) -> Result<bool, IndepError> {
        Ok(self.test(x, y, z)?.independent)
    }

    /// Full test outcome, served from the memo table when possible.
    pub fn test(&self, x: usize, y: usize, z: &[usize]) -> Result<TestOutcome, IndepError> {
        for &v in [x, y].iter().chain(z) {
            if v >= self.d {
                return Err(IndepError::OutOfRange(v));
            }
        }
        if x == y {
            return Err(IndepError::InvalidQuery("x and y must differ".into()));
        }
        if z.contains(&x) || z.contains(&y) {
            return Err(IndepError::InvalidQuery("conditioning set contains a tested variable".into()));
        }
        let mut zs = z.to_vec();
        zs.sort_unstable();
        zs.dedup();
        let key = (x.min(y), x.max(y), zs);
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key).copied() {
            self.counters.cache_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(hit);
        }
        let outcome = match self.backend {
            Backend::Oracle { dag } => TestOutcome::oracle(dag.d_separated(key.0, key.1, &key.2)?),
            Backend::Data { data, alpha } => g_test(data, key.0, key.1, &key.2, alpha, self.min_stratum)?,
        };
        self.counters.tests_run.fetch_add(1, Ordering::Relaxed);
        match outcome.flag {
            Some(TestFlag::DegenerateTable) => self.counters.degenerate_tables.fetch_add(1, Ordering::Relaxed),
            Some(TestFlag::SparseStrata) => self.counters.sparse_strata.fetch_add(1, Ordering::Relaxed),
            Some(TestFlag::AllStrataDegenerate) => self.counters.all_strata_degenerate.fetch_add(1, Ordering::Relaxed),
            None => 0,
        };
        self.cache.lock().expect("cache lock").insert(key, outcome);
        Ok(outcome)
    }

    pub fn stats(&self) -> TestStats {
        let c = &self.counters;
        TestStats {
            tests_run: c.tests_run.load(Ordering::Relaxed),
            cache_hits: c.cache_hits.load(Ordering::Relaxed),
            degenerate_tables: c.degenerate_tables.load(Ordering::Relaxed),
            sparse_strata: c.sparse_strata.load(Ordering::Relaxed),
            all_strata_degenerate: c.all_strata_degenerate.load(Ordering::Relaxed),
        }
    }
}

const DENSE_CELLS: u64 = 1 << 20;

/// Stratified G-test of `x` against `y` over the configurations of `z`.
pub fn g_test(
    data: &Dataset,
    x: usize,
    y: usize,
    z: &[usize],
    alpha: f64,
    min_stratum: usize,
) -> Result<TestOutcome, IndepError> {
    let cx = data.cardinality(x);
    let cy = data.cardinality(y);
    let cells = cx * cy;
    let (strides, strata) = radix(data.cardinalities(), z)?;
    let xc = data.column(x);
    let yc = data.column(y);
    let zc: Vec<&[u32]> = z.iter().map(|&v| data.column(v)).collect();
    let n = data.n_rows();

    let tables: Vec<Vec<u32>> = if strata.saturating_mul(cells as u64) <= DENSE_CELLS {
        let mut dense = vec![0u32; strata as usize * cells];
        for r in 0..n {
            let s: u64 = zc.iter().zip(&strides).map(|(c, st)| u64::from(c[r]) * st).sum();
            dense[s as usize * cells + xc[r] as usize * cy + yc[r] as usize] += 1;
        }
        dense.chunks_exact(cells).filter(|t| t.iter().any(|&c| c > 0)).map(<[u32]>::to_vec).collect()
    } else {
        let mut map: HashMap<u64, Vec<u32>> = HashMap::new();
        for r in 0..n {
            let s: u64 = zc.iter().zip(&strides).map(|(c, st)| u64::from(c[r]) * st).sum();
            map.entry(s).or_insert_with(|| vec![0u32; cells])[xc[r] as usize * cy + yc[r] as usize] += 1;
        }
        map.into_values().collect()
    };

    let mut g = 0.0;
    let mut dof = 0usize;
    let mut skipped = 0usize;
    let mut row = vec![0u64; cx];
    let mut col = vec![0u64; cy];
    for t in &tables {
        let total: u64 = t.iter().map(|&c| u64::from(c)).sum();
        if (total as usize) < min_stratum {
            skipped += 1;
            continue;
        }
        row.iter_mut().for_each(|v| *v = 0);
        col.iter_mut().for_each(|v| *v = 0);
        for i in 0..cx {
            for j in 0..cy {
                let c = u64::from(t[i * cy + j]);
                row[i] += c;
                col[j] += c;
            }
        }
        let nr = row.iter().filter(|&&v| v > 0).count();
        let nc = col.iter().filter(|&&v| v > 0).count();
        if nr < 2 || nc < 2 {
            continue;
        }
        dof += (nr - 1) * (nc - 1);
        let nt = total as f64;
        for i in 0..cx {
            for j in 0..cy {
                let o = f64::from(t[i * cy + j]);
                if o > 0.0 {
                    g += o * (o * nt / (row[i] as f64 * col[j] as f64)).ln();
                }
            }
        }
    }
    g *= 2.0;
    if dof == 0 {
        let flag = if z.is_empty() { TestFlag::DegenerateTable } else { TestFlag::AllStrataDegenerate };
        return Ok(TestOutcome { independent: true, p_value: 1.0, statistic: 0.0, dof: 0, flag: Some(flag) });
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    let p_value = dist.sf(g.max(0.0));
    Ok(TestOutcome {
        independent: p_value >= alpha,
        p_value,
        statistic: g,
        dof,
        flag: (skipped > 0).then_some(TestFlag::SparseStrata),
    })
}
