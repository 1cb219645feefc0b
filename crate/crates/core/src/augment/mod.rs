//! Environment generation: source priors, representative selection and
//! prior-guided downsampling of the observational data.

mod kmeans;
mod prior;

use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use kmeans::select_representative;
pub use prior::{boundary_priors, gamma_of, mix, sample_priors, BoundaryPriors, Prior};

use crate::dataset::{empirical_marginal, Dataset, DatasetError, View};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AugmentError {
    #[error("gamma_o must lie in (0, 1), got {0}")]
    InvalidGamma(f64),
    #[error("category {0} carries all the probability mass")]
    DegenerateCategory(usize),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("environment {environment} of family {family} has {rows} rows, fewer than {min_rows}")]
    EnvironmentTooSmall { family: usize, environment: usize, rows: usize, min_rows: usize },
    #[error(transparent)]
    Data(#[from] DatasetError),
}

/// Rows kept by one downsampling pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Downsample {
    /// Retained row indices into the underlying dataset, ascending.
    pub rows: Vec<u32>,
    /// `gamma` of the prior against the marginal of the input view.
    pub gamma: f64,
    /// Set when a category target had to be capped by the rows available.
    pub clamped: bool,
}

/// Downsamples `view` so that `variable` follows `prior`.
///
/// The kept size is `floor(|view| * gamma)`; per-category targets are the
/// largest-remainder apportionment of that size, which never exceeds the rows
/// available in a category because `prior(b) * |view| * gamma <= count(b)`.
pub fn downsample_once(
    view: &View<'_>,
    variable: usize,
    prior: &[f64],
    rng: &mut Rng,
) -> Result<Downsample, AugmentError> {
    let ds = view.data();
    let card = ds.cardinality(variable);
    if prior.len() != card {
        return Err(AugmentError::LengthMismatch { expected: card, found: prior.len() });
    }
    if view.is_empty() {
        return Err(DatasetError::EmptyDataset.into());
    }
    let col = ds.column(variable);
    let mut by_cat: Vec<Vec<u32>> = vec![Vec::new(); card];
    view.for_each_row(|r| by_cat[col[r] as usize].push(r as u32));
    let n = view.len() as f64;
    let marginal: Vec<f64> = by_cat.iter().map(|rows| rows.len() as f64 / n).collect();
    let gamma = gamma_of(&marginal, prior)?;
    let total = (n * gamma + 1e-9).floor() as usize;

    let mut take = vec![0usize; card];
    let mut clamped = false;
    let mut remainders = Vec::with_capacity(card);
    for b in 0..card {
        let exact = prior[b] * total as f64;
        let base = (exact + 1e-9).floor() as usize;
        if base > by_cat[b].len() {
            clamped = true;
        }
        take[b] = base.min(by_cat[b].len());
        remainders.push((exact - take[b] as f64, b));
    }
    let mut left = total.saturating_sub(take.iter().sum());
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, b) in &remainders {
        if left == 0 {
            break;
        }
        if take[b] < by_cat[b].len() {
            take[b] += 1;
            left -= 1;
        }
    }
    clamped |= left > 0;

    let mut rows = Vec::with_capacity(total);
    for (b, cat_rows) in by_cat.iter().enumerate() {
        if take[b] == cat_rows.len() {
            rows.extend_from_slice(cat_rows);
        } else {
            rows.extend(index::sample(rng, cat_rows.len(), take[b]).into_iter().map(|i| cat_rows[i]));
        }
    }
    rows.sort_unstable();
    Ok(Downsample { rows, gamma, clamped })
}

/// How environments are assembled from the basis variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvironmentLayout {
    /// `Joint` while `gamma_o^|B| >= 0.25`, otherwise `PerVariable`.
    Auto,
    /// One family: environment `i` applies the `i`-th prior of every basis
    /// variable in turn.
    Joint,
    /// One family per basis variable: environment `i` reweights only that
    /// variable, starting from the full data.
    PerVariable,
}

impl std::str::FromStr for EnvironmentLayout {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Self::Auto),
            "joint" => Ok(Self::Joint),
            "per_variable" | "per-variable" => Ok(Self::PerVariable),
            other => Err(format!("unknown environment layout '{other}'")),
        }
    }
}

/// Smallest `gamma_o^|B|` for which `Auto` still picks the joint layout.
pub const AUTO_JOINT_RETENTION: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    pub m: usize,
    pub gamma_o: f64,
    pub pool: usize,
    pub min_rows: usize,
    pub layout: EnvironmentLayout,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig { m: 30, gamma_o: 0.5, pool: 10_000, min_rows: 100, layout: EnvironmentLayout::Auto, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    /// Row indices into the full dataset, ascending.
    pub rows: Vec<u32>,
    pub priors: Vec<Prior>,
    /// Per applied prior, the `gamma` realised against the data it was applied to.
    pub achieved_gamma: Vec<f64>,
}

/// Environments that share the same set of reweighted basis variables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvFamily {
    pub basis_vars: Vec<usize>,
    pub environments: Vec<Environment>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvironmentSet {
    /// The resolved layout (never `Auto`).
    pub layout: EnvironmentLayout,
    pub families: Vec<EnvFamily>,
    /// Basis variables that could not be reweighted (a single observed category).
    pub skipped: Vec<usize>,
    pub warnings: Vec<String>,
}

impl EnvironmentSet {
    pub fn environment_count(&self) -> usize {
        self.families.iter().map(|f| f.environments.len()).sum()
    }

    /// Mean of `|D_i| / |D|` over every environment.
    pub fn mean_retention(&self, n: usize) -> f64 {
        let count = self.environment_count();
        if count == 0 || n == 0 {
            return 1.0;
        }
        let kept: usize = self.families.iter().flat_map(|f| &f.environments).map(|e| e.rows.len()).sum();
        kept as f64 / (count as f64 * n as f64)
    }
}

/// Mean retention at or above which the environments are reported as degenerate.
pub const DEGENERATE_RETENTION: f64 = 0.95;

/// Representative priors per basis variable and how they are grouped into families.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentPlan {
    /// The resolved layout (never `Auto`).
    pub layout: EnvironmentLayout,
    /// `(basis variable, m representative priors)` for every reweighted variable.
    pub representatives: Vec<(usize, Vec<Prior>)>,
    /// Families as index lists into `representatives`; one empty group when
    /// nothing can be reweighted.
    pub groups: Vec<Vec<usize>>,
    pub skipped: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Resolves `Auto` for a basis of `k` reweighted variables.
pub fn resolve_layout(layout: EnvironmentLayout, gamma_o: f64, k: usize) -> EnvironmentLayout {
    match layout {
        EnvironmentLayout::Auto if gamma_o.powi(k as i32) >= AUTO_JOINT_RETENTION => EnvironmentLayout::Joint,
        EnvironmentLayout::Auto => EnvironmentLayout::PerVariable,
        other => other,
    }
}

/// Draws and clusters priors for each `(variable, marginal)` pair.
pub fn plan_environments(
    marginals: &[(usize, Vec<f64>)],
    names: &[String],
    cfg: &AugmentConfig,
) -> Result<EnvironmentPlan, AugmentError> {
    if cfg.m == 0 {
        return Err(AugmentError::InvalidParameter("m must be positive".into()));
    }
    if !(cfg.gamma_o > 0.0 && cfg.gamma_o < 1.0) {
        return Err(AugmentError::InvalidGamma(cfg.gamma_o));
    }
    if cfg.pool < cfg.m {
        return Err(AugmentError::InvalidParameter(format!("prior pool {} is smaller than m = {}", cfg.pool, cfg.m)));
    }
    let mut warnings = Vec::new();
    let mut skipped = Vec::new();
    let mut representatives = Vec::new();
    for (b, p) in marginals {
        let b = *b;
        if p.iter().filter(|&&v| v > 0.0).count() < 2 {
            warnings.push(format!("basis variable {} has a single observed category and is not reweighted", names[b]));
            skipped.push(b);
            continue;
        }
        let boundary = boundary_priors(p, cfg.gamma_o)?;
        for &k in &boundary.clamped {
            warnings.push(format!(
                "basis variable {} category {k} has frequency above gamma_o; its boundary point is the point mass",
                names[b]
            ));
        }
        let pool = sample_priors(b, p, cfg.gamma_o, cfg.pool, cfg.seed)?;
        representatives.push((b, select_representative(&pool, cfg.m, p, cfg.seed)?));
    }
    let layout = resolve_layout(cfg.layout, cfg.gamma_o, representatives.len());
    let groups: Vec<Vec<usize>> = if representatives.is_empty() {
        warnings.push("no basis variable can be reweighted; all environments equal the full data".into());
        vec![Vec::new()]
    } else if layout == EnvironmentLayout::Joint {
        vec![(0..representatives.len()).collect()]
    } else {
        (0..representatives.len()).map(|k| vec![k]).collect()
    };
    Ok(EnvironmentPlan { layout, representatives, groups, skipped, warnings })
}

/// Builds the environment set for `basis` on `data`.
pub fn make_environments(data: &Dataset, basis: &[usize], cfg: &AugmentConfig) -> Result<EnvironmentSet, AugmentError> {
    let full = data.view();
    let marginals =
        basis.iter().map(|&b| Ok((b, empirical_marginal(&full, b)?))).collect::<Result<Vec<_>, AugmentError>>()?;
    let EnvironmentPlan { layout, representatives: reps, groups, skipped, mut warnings } =
        plan_environments(&marginals, data.names(), cfg)?;

    let mut families = Vec::with_capacity(groups.len());
    for (f, group) in groups.iter().enumerate() {
        let mut environments = Vec::with_capacity(cfg.m);
        for i in 0..cfg.m {
            let mut rows: Option<Vec<u32>> = None;
            let mut priors = Vec::with_capacity(group.len());
            let mut achieved = Vec::with_capacity(group.len());
            for &k in group {
                let (b, ref list) = reps[k];
                let prior = &list[i];
                let view = match &rows {
                    Some(r) => data.subset(r),
                    None => data.view(),
                };
                let index = ((f as u64) << 40) | ((i as u64) << 20) | k as u64;
                let mut rng = rng::stream(cfg.seed, "downsample", index);
                let out = downsample_once(&view, b, &prior.probs, &mut rng)?;
                if out.clamped {
                    warnings.push(format!(
                        "environment {i}: a category target for {} was capped by available rows",
                        data.names()[b]
                    ));
                }
                achieved.push(out.gamma);
                priors.push(prior.clone());
                rows = Some(out.rows);
            }
            let rows = rows.unwrap_or_else(|| (0..data.n_rows() as u32).collect());
            if rows.len() < cfg.min_rows {
                return Err(AugmentError::EnvironmentTooSmall {
                    family: f,
                    environment: i,
                    rows: rows.len(),
                    min_rows: cfg.min_rows,
                });
            }
            environments.push(Environment { rows, priors, achieved_gamma: achieved });
        }
        let basis_vars = group.iter().map(|&k| reps[k].0).collect();
        families.push(EnvFamily { basis_vars, environments });
    }

    let set = EnvironmentSet { layout, families, skipped, warnings };
    let retention = set.mean_retention(data.n_rows());
    let mut set = set;
    if retention >= DEGENERATE_RETENTION {
        set.warnings
            .push(format!("environments are nearly identical to the full data (mean retention {retention:.3})"));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary(zeros: usize, ones: usize) -> Dataset {
        let col: Vec<u32> = std::iter::repeat_n(0, zeros).chain(std::iter::repeat_n(1, ones)).collect();
        Dataset::new(vec!["b".into()], vec![col]).unwrap()
    }

    fn counts(ds: &Dataset, rows: &[u32]) -> Vec<usize> {
        let mut c = vec![0; ds.cardinality(0)];
        for &r in rows {
            c[ds.column(0)[r as usize] as usize] += 1;
        }
        c
    }

    #[test]
    fn downsample_examples() {
        let ds = binary(50, 50);
        let mut rng = rng::stream(0, "t", 0);
        let out = downsample_once(&ds.view(), 0, &[0.625, 0.375], &mut rng).unwrap();
        assert_eq!(counts(&ds, &out.rows), vec![50, 30]);
        assert!((out.gamma - 0.8).abs() < 1e-12);

        let out = downsample_once(&ds.view(), 0, &[1.0, 0.0], &mut rng).unwrap();
        assert_eq!(counts(&ds, &out.rows), vec![50, 0]);

        let out = downsample_once(&ds.view(), 0, &[0.5, 0.5], &mut rng).unwrap();
        assert_eq!(out.rows, (0..100).collect::<Vec<u32>>());
        assert!(!out.clamped);
    }

    #[test]
    fn downsample_is_seeded() {
        let ds = binary(300, 700);
        let run = |s| downsample_once(&ds.view(), 0, &[0.5, 0.5], &mut rng::stream(s, "t", 0)).unwrap();
        assert_eq!(run(4), run(4));
        assert_ne!(run(4).rows, run(5).rows);
        assert_eq!(counts(&ds, &run(4).rows), vec![300, 300]);
    }

    #[test]
    fn environments_follow_layouts() {
        let n: u32 = 81 * 50;
        // Independent ternary columns: digits of the row index in base 3.
        let col = |k: u32| (0..n).map(|r: u32| (r / 3u32.pow(k)) % 3).collect::<Vec<u32>>();
        let ds = Dataset::new(vec!["a".into(), "b".into(), "c".into()], vec![col(0), col(1), col(2)]).unwrap();
        let base = AugmentConfig { m: 5, pool: 500, seed: 3, ..AugmentConfig::default() };

        let joint =
            make_environments(&ds, &[0, 2], &AugmentConfig { layout: EnvironmentLayout::Joint, ..base.clone() })
                .unwrap();
        assert_eq!(joint.families.len(), 1);
        assert_eq!(joint.families[0].basis_vars, vec![0, 2]);
        assert_eq!(joint.environment_count(), 5);
        for env in &joint.families[0].environments {
            assert!(env.rows.windows(2).all(|w| w[0] < w[1]));
            assert!(env.achieved_gamma.iter().all(|&g| g >= 0.45));
        }

        let per =
            make_environments(&ds, &[0, 2], &AugmentConfig { layout: EnvironmentLayout::PerVariable, ..base.clone() })
                .unwrap();
        assert_eq!(per.families.iter().map(|f| f.basis_vars.clone()).collect::<Vec<_>>(), vec![vec![0], vec![2]]);
        let again =
            make_environments(&ds, &[0, 2], &AugmentConfig { layout: EnvironmentLayout::PerVariable, ..base }).unwrap();
        assert_eq!(per, again);
    }

    #[test]
    fn auto_layout_switches_on_basis_size() {
        let n = 2000;
        let cols: Vec<Vec<u32>> = (0..3).map(|k| (0..n).map(|r| ((r >> k) & 1) as u32).collect()).collect();
        let ds = Dataset::new(vec!["a".into(), "b".into(), "c".into()], cols).unwrap();
        let cfg = AugmentConfig { m: 3, pool: 100, ..AugmentConfig::default() };
        assert_eq!(make_environments(&ds, &[0, 1], &cfg).unwrap().layout, EnvironmentLayout::Joint);
        assert_eq!(make_environments(&ds, &[0, 1, 2], &cfg).unwrap().layout, EnvironmentLayout::PerVariable);
    }

    #[test]
    fn small_environments_are_rejected() {
        let ds = binary(60, 60);
        let err =
            make_environments(&ds, &[0], &AugmentConfig { m: 2, pool: 50, ..AugmentConfig::default() }).unwrap_err();
        assert!(matches!(err, AugmentError::EnvironmentTooSmall { min_rows: 100, .. }));
    }

    #[test]
    fn constant_basis_variable_is_skipped() {
        let ds = binary(500, 0);
        let set = make_environments(&ds, &[0], &AugmentConfig { m: 2, pool: 50, ..AugmentConfig::default() }).unwrap();
        assert_eq!(set.skipped, vec![0]);
        assert_eq!(set.families[0].environments[0].rows.len(), 500);
        assert!(set.warnings.iter().any(|w| w.contains("nearly identical")));
    }

    #[test]
    fn high_gamma_is_flagged_degenerate() {
        let ds = binary(5000, 5000);
        let cfg = AugmentConfig { m: 4, pool: 200, gamma_o: 0.99, ..AugmentConfig::default() };
        let set = make_environments(&ds, &[0], &cfg).unwrap();
        assert!(set.mean_retention(10_000) >= DEGENERATE_RETENTION);
        assert!(set.warnings.iter().any(|w| w.contains("nearly identical")));
    }
}
