//! Invariance scoring of candidate parent sets across environments, parent
//! selection, and the end-to-end discovery pipeline.

mod data;
mod exact;
mod pipeline;

use serde::Serialize;
use thiserror::Error;

pub use data::DataEnvironments;
pub use exact::ExactEnvironments;
pub use pipeline::{
    glide, glide_exact, relevant_families, repair_cycles, EnvironmentSummary, GlideConfig, GlideError, GlideReport,
    GlideResult, NodeFlag, NodeReport, Repair,
};

use crate::augment::AugmentError;
use crate::dataset::DatasetError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvarianceError {
    #[error("target variable {0} appears in its own conditioning set")]
    TargetInConditioningSet(usize),
    #[error("invariance scoring needs at least two environments per family, found {0}")]
    TooFewEnvironments(usize),
    #[error("variable {0} out of range")]
    OutOfRange(usize),
    #[error(transparent)]
    Data(#[from] DatasetError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
}

/// Estimated `P(x | z)` in one environment over the z-configurations it supports.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvTable {
    pub x_card: usize,
    /// Configuration keys, ascending.
    pub keys: Vec<u64>,
    /// Weight of each configuration (row count or probability mass).
    pub support: Vec<f64>,
    /// `probs[k * x_card + v] = P(x = v | z = keys[k])`.
    pub probs: Vec<f64>,
}

/// Source of per-environment conditional tables, grouped into families of
/// environments that reweight the same basis variables.
pub trait EnvironmentTables: Sync {
    fn family_count(&self) -> usize;
    /// Basis variables reweighted by family `f`.
    fn family_basis(&self, f: usize) -> &[usize];
    /// One table per environment of family `f`.
    fn tables(&self, f: usize, x: usize, z: &[usize], laplace_alpha: f64) -> Result<Vec<EnvTable>, InvarianceError>;
}

/// Variance of a candidate conditioning set across environments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceScore {
    pub candidate: Vec<usize>,
    /// `+inf` when some family shares no configuration across its environments.
    pub variance: f64,
    /// Mean over families of shared configurations / configurations seen anywhere.
    pub coverage: f64,
}

/// Weighted spread of the tables of one family: the mean over environments of
/// the squared distance to the cell-wise mean table, with each configuration
/// weighted by its pooled support. Returns `(variance, coverage)`.
pub fn family_variance(tables: &[EnvTable]) -> (f64, f64) {
    let Some(first) = tables.first() else {
        return (0.0, 1.0);
    };
    let x_card = first.x_card;
    let mut common: Vec<u64> = first.keys.clone();
    let mut union: Vec<u64> = first.keys.clone();
    for t in &tables[1..] {
        common.retain(|k| t.keys.binary_search(k).is_ok());
        union.extend_from_slice(&t.keys);
    }
    union.sort_unstable();
    union.dedup();
    if common.is_empty() {
        return (f64::INFINITY, 0.0);
    }
    let coverage = common.len() as f64 / union.len() as f64;
    let positions: Vec<Vec<usize>> =
        tables.iter().map(|t| common.iter().map(|k| t.keys.binary_search(k).expect("common key")).collect()).collect();
    let weights: Vec<f64> =
        (0..common.len()).map(|c| tables.iter().zip(&positions).map(|(t, pos)| t.support[pos[c]]).sum()).collect();
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return (0.0, coverage);
    }
    let m = tables.len() as f64;
    let mut variance = 0.0;
    let mut mean = vec![0.0; x_card];
    for c in 0..common.len() {
        mean.iter_mut().for_each(|v| *v = 0.0);
        for (t, pos) in tables.iter().zip(&positions) {
            let row = &t.probs[pos[c] * x_card..(pos[c] + 1) * x_card];
            for (acc, p) in mean.iter_mut().zip(row) {
                *acc += p / m;
            }
        }
        let mut spread = 0.0;
        for (t, pos) in tables.iter().zip(&positions) {
            let row = &t.probs[pos[c] * x_card..(pos[c] + 1) * x_card];
            spread += row.iter().zip(&mean).map(|(p, q)| (p - q) * (p - q)).sum::<f64>();
        }
        variance += weights[c] / total * spread / m;
    }
    (variance, coverage)
}

/// Scores `z` as a conditioning set for `x`, averaged over `families`.
pub fn invariance_score(
    envs: &dyn EnvironmentTables,
    families: &[usize],
    x: usize,
    z: &[usize],
    laplace_alpha: f64,
) -> Result<InvarianceScore, InvarianceError> {
    if z.contains(&x) {
        return Err(InvarianceError::TargetInConditioningSet(x));
    }
    let mut variance = 0.0;
    let mut coverage = 0.0;
    for &f in families {
        let tables = envs.tables(f, x, z, laplace_alpha)?;
        if tables.len() < 2 {
            return Err(InvarianceError::TooFewEnvironments(tables.len()));
        }
        let (v, c) = family_variance(&tables);
        variance += v;
        coverage += c;
    }
    let k = families.len().max(1) as f64;
    Ok(InvarianceScore { candidate: z.to_vec(), variance: variance / k, coverage: coverage / k })
}

/// Largest clique whose subsets are all scored during refinement.
pub const MAX_REFINED_CLIQUE: usize = 12;

/// Outcome of parent selection for one variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub parents: Vec<usize>,
    pub variance: f64,
    /// Next-best variance minus the winner's; `+inf` with a single finite candidate.
    pub margin: f64,
    /// No candidate scored below `epsilon`.
    pub below_confidence: bool,
    /// Some clique was too large for subset refinement and was scored whole.
    pub unrefined_clique: bool,
    /// Every candidate scored `+inf`.
    pub no_finite_candidate: bool,
    pub scores: Vec<InvarianceScore>,
}

/// Which of several equally invariant candidates wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Fewest members, then lexicographic.
    Smaller,
    /// Most members, then lexicographic.
    Larger,
}

impl std::str::FromStr for TieBreak {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "smaller" => Ok(Self::Smaller),
            "larger" => Ok(Self::Larger),
            other => Err(format!("unknown tie break '{other}'")),
        }
    }
}

/// Thresholds used by [`select_parents`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionRule {
    pub epsilon: f64,
    /// Variances within this of the minimum count as tied.
    pub tie_tolerance: f64,
    pub tie_break: TieBreak,
    pub laplace_alpha: f64,
}

fn all_subsets(set: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    (0u32..1 << set.len()).map(move |mask| (0..set.len()).filter(|&i| mask >> i & 1 == 1).map(|i| set[i]).collect())
}

/// Scores every candidate and every subset of each candidate, then returns
/// the minimum-variance set, resolving ties with `rule.tie_break`.
pub fn select_parents(
    envs: &dyn EnvironmentTables,
    families: &[usize],
    x: usize,
    candidates: &[Vec<usize>],
    rule: &SelectionRule,
) -> Result<Selection, InvarianceError> {
    let mut pool: Vec<Vec<usize>> = Vec::new();
    let mut unrefined_clique = false;
    for c in candidates {
        if c.len() > MAX_REFINED_CLIQUE {
            unrefined_clique = true;
            pool.push(c.clone());
        } else {
            pool.extend(all_subsets(c));
        }
    }
    pool.push(Vec::new());
    pool.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    pool.dedup();

    let scores: Vec<InvarianceScore> =
        pool.iter().map(|z| invariance_score(envs, families, x, z, rule.laplace_alpha)).collect::<Result<_, _>>()?;

    let best = scores.iter().map(|s| s.variance).fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Ok(Selection {
            parents: Vec::new(),
            variance: f64::INFINITY,
            margin: f64::INFINITY,
            below_confidence: true,
            unrefined_clique,
            no_finite_candidate: true,
            scores,
        });
    }
    // `pool` is ordered by size then lexicographically.
    let tied = |s: &&InvarianceScore| s.variance <= best + rule.tie_tolerance;
    let winner = match rule.tie_break {
        TieBreak::Smaller => scores.iter().position(|s| tied(&s)),
        TieBreak::Larger => {
            let size = scores.iter().filter(tied).map(|s| s.candidate.len()).max().expect("a finite minimum exists");
            scores.iter().position(|s| tied(&s) && s.candidate.len() == size)
        }
    }
    .expect("a finite minimum exists");
    let variance = scores[winner].variance;
    let runner_up =
        scores.iter().enumerate().filter(|&(i, _)| i != winner).map(|(_, s)| s.variance).fold(f64::INFINITY, f64::min);
    Ok(Selection {
        parents: scores[winner].candidate.clone(),
        variance,
        margin: runner_up - variance,
        below_confidence: variance >= rule.epsilon,
        unrefined_clique,
        no_finite_candidate: false,
        scores,
    })
}
