//! End-to-end discovery: basis, environments, blankets, candidates, selection.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    select_parents, DataEnvironments, EnvironmentTables, ExactEnvironments, InvarianceError, SelectionRule, TieBreak,
};
use crate::augment::{make_environments, AugmentConfig, AugmentError, EnvironmentLayout};
use crate::basis::{dependence_matrix, find_basis, Basis, DependenceMatrix};
use crate::blanket::{blanket_map, BlanketMap, DEFAULT_CAP_K};
use crate::dataset::{CategoricalModel, Dataset, DatasetError};
use crate::graph::{Dag, GraphError};
use crate::indep::{IndepError, IndepSource, TestStats, DEFAULT_MIN_STRATUM};
use crate::parents::{plausible_parent_sets, ParentsError, DEFAULT_MAX_CANDIDATES};

#[derive(Debug, Error)]
pub enum GlideError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Indep(#[from] IndepError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error(transparent)]
    Parents(#[from] ParentsError),
    #[error(transparent)]
    Invariance(#[from] InvarianceError),
    #[error(transparent)]
    Data(#[from] DatasetError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// All tunable parameters of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlideConfig {
    /// Environments per family.
    pub m: usize,
    /// Floor on the inverse downsampling rate of every prior.
    pub gamma_o: f64,
    /// Variance below which a candidate counts as invariant.
    pub epsilon: f64,
    /// Significance level of the independence tests.
    pub ci_alpha: f64,
    /// Equal-width bins used when continuous data is discretized.
    pub bins: usize,
    /// Additive smoothing of conditional tables.
    pub laplace_alpha: f64,
    /// Priors drawn per basis variable before clustering.
    pub pool: usize,
    pub seed: u64,
    /// Smallest environment accepted.
    pub min_rows: usize,
    /// Largest separating set tried during spouse removal.
    pub cap_k: usize,
    /// Per-variable limit on candidate parent sets.
    pub max_candidates: usize,
    pub layout: EnvironmentLayout,
    /// Variances within this absolute distance of the minimum are tied.
    pub tie_tolerance: f64,
    pub tie_break: TieBreak,
    /// Strata with fewer rows are skipped by the conditional independence test.
    pub min_stratum: usize,
}

impl Default for GlideConfig {
    fn default() -> Self {
        GlideConfig {
            m: 30,
            gamma_o: 0.5,
            epsilon: 1e-3,
            ci_alpha: 0.05,
            bins: 4,
            laplace_alpha: 1.0,
            pool: 10_000,
            seed: 0,
            min_rows: 100,
            cap_k: DEFAULT_CAP_K,
            max_candidates: DEFAULT_MAX_CANDIDATES,
            layout: EnvironmentLayout::Auto,
            tie_tolerance: 1e-12,
            tie_break: TieBreak::Smaller,
            min_stratum: DEFAULT_MIN_STRATUM,
        }
    }
}

impl GlideConfig {
    pub fn validate(&self) -> Result<(), GlideError> {
        let fail = |msg: &str| Err(GlideError::Config(msg.to_string()));
        if self.m < 2 {
            return fail("m must be at least 2");
        }
        if !(self.gamma_o > 0.0 && self.gamma_o < 1.0) {
            return fail("gamma_o must lie in (0, 1)");
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return fail("epsilon must be positive");
        }
        if !(self.ci_alpha > 0.0 && self.ci_alpha < 1.0) {
            return fail("ci_alpha must lie in (0, 1)");
        }
        if self.bins < 2 {
            return fail("bins must be at least 2");
        }
        if !self.laplace_alpha.is_finite() || self.laplace_alpha < 0.0 {
            return fail("laplace_alpha must be a finite non-negative number");
        }
        if self.pool < self.m {
            return fail("pool must hold at least m priors");
        }
        if self.max_candidates == 0 {
            return fail("max_candidates must be positive");
        }
        if self.tie_tolerance.is_nan() || self.tie_tolerance < 0.0 {
            return fail("tie_tolerance must be non-negative");
        }
        Ok(())
    }

    pub fn augment(&self) -> AugmentConfig {
        AugmentConfig {
            m: self.m,
            gamma_o: self.gamma_o,
            pool: self.pool,
            min_rows: self.min_rows,
            layout: self.layout,
            seed: self.seed,
        }
    }

    pub fn rule(&self) -> SelectionRule {
        SelectionRule {
            epsilon: self.epsilon,
            tie_tolerance: self.tie_tolerance,
            tie_break: self.tie_break,
            laplace_alpha: self.laplace_alpha,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeFlag {
    /// Member of the basis; assigned no parents without scoring.
    Basis,
    /// No candidate scored below `epsilon`.
    BelowConfidence,
    /// Every candidate lacked shared support across environments.
    NoFiniteCandidate,
    /// A clique was too large for subset refinement.
    UnrefinedClique,
    /// An incoming edge was dropped to break a cycle.
    CycleRepaired,
    /// Oracle runs: a true parent is also a spouse.
    PaSpouseOverlap,
    /// Oracle runs: a true spouse belongs to the basis.
    SpouseInBasis,
    /// Oracle runs: a basis member is a descendant, so reweighting it can
    /// shift the causal conditional.
    BasisDescendant,
    /// Oracle runs: an ancestral source is missing from the basis, so the
    /// environments never shift it.
    SourceNotInBasis,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeReport {
    pub name: String,
    pub blanket: Vec<String>,
    pub core: Vec<String>,
    pub spouses: Vec<String>,
    pub candidates: Vec<Vec<String>>,
    pub degeneracy: usize,
    pub scored_sets: usize,
    pub winner: Vec<String>,
    pub variance: Option<f64>,
    pub margin: Option<f64>,
    pub flags: Vec<NodeFlag>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySummary {
    pub basis: Vec<String>,
    pub environment_rows: Vec<usize>,
    pub min_gamma: f64,
    pub mean_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvironmentSummary {
    pub layout: EnvironmentLayout,
    pub environments_per_family: usize,
    pub families: Vec<FamilySummary>,
    /// `None` for population-level environments.
    pub mean_retention: Option<f64>,
    pub skipped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Repair {
    pub parent: String,
    pub child: String,
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GlideReport {
    pub config: GlideConfig,
    pub mode: &'static str,
    pub n_rows: Option<usize>,
    pub n_vars: usize,
    pub basis: Vec<String>,
    pub environments: EnvironmentSummary,
    pub nodes: Vec<NodeReport>,
    pub edges: Vec<(String, String)>,
    pub repairs: Vec<Repair>,
    pub warnings: Vec<String>,
    /// Seconds per stage.
    pub timings: BTreeMap<String, f64>,
    pub tests: TestStats,
}

#[derive(Debug, Clone)]
pub struct GlideResult {
    pub dag: Dag,
    pub report: GlideReport,
    /// Selected parents per variable (after cycle repair).
    pub parents: Vec<Vec<usize>>,
    pub basis: Basis,
    pub blankets: BlanketMap,
}

struct Clock {
    start: Instant,
    timings: BTreeMap<String, f64>,
}

impl Clock {
    fn new() -> Self {
        Clock { start: Instant::now(), timings: BTreeMap::new() }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timings.insert(stage.to_string(), (now - self.start).as_secs_f64());
        self.start = now;
    }
}

/// Removes one edge per directed cycle, each time the edge into the child
/// whose selection margin is smallest, until the parent sets form a DAG.
pub fn repair_cycles(parents: &mut [Vec<usize>], margins: &[f64]) -> Vec<(usize, usize)> {
    let mut removed = Vec::new();
    while let Some(cycle) = find_cycle(parents) {
        let &(p, c) = cycle
            .iter()
            .min_by(|a, b| margins[a.1].total_cmp(&margins[b.1]).then(a.cmp(b)))
            .expect("a cycle has edges");
        parents[c].retain(|&v| v != p);
        removed.push((p, c));
    }
    removed
}

/// Edges `(parent, child)` of some directed cycle, if any.
fn find_cycle(parents: &[Vec<usize>]) -> Option<Vec<(usize, usize)>> {
    let d = parents.len();
    let mut children = vec![Vec::new(); d];
    for (c, ps) in parents.iter().enumerate() {
        for &p in ps {
            children[p].push(c);
        }
    }
    // 0 = unseen, 1 = on the stack, 2 = done.
    let mut state = vec![0u8; d];
    let mut via = vec![usize::MAX; d];
    for root in 0..d {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state[root] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < children[v].len() {
                let w = children[v][*next];
                *next += 1;
                match state[w] {
                    0 => {
                        state[w] = 1;
                        via[w] = v;
                        stack.push((w, 0));
                    }
                    1 => {
                        let mut edges = vec![(v, w)];
                        let mut u = v;
                        while u != w {
                            edges.push((via[u], u));
                            u = via[u];
                        }
                        return Some(edges);
                    }
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
            }
        }
    }
    None
}

fn names_of(names: &[String], ids: &[usize]) -> Vec<String> {
    ids.iter().map(|&i| names[i].clone()).collect()
}

/// Families whose reweighted variables are dependent on `x` or a member of
/// its blanket core; all families when none are.
pub fn relevant_families(envs: &dyn EnvironmentTables, phi: &DependenceMatrix, x: usize, core: &[usize]) -> Vec<usize> {
    let reach: Vec<usize> = std::iter::once(x).chain(core.iter().copied()).collect();
    let families: Vec<usize> = (0..envs.family_count())
        .filter(|&f| envs.family_basis(f).iter().any(|&b| reach.iter().any(|&v| phi.get(b, v))))
        .collect();
    if families.is_empty() {
        (0..envs.family_count()).collect()
    } else {
        families
    }
}

/// Shared tail of the pipeline once the dependence matrix, basis and
/// environments exist.
#[allow(clippy::too_many_arguments)]
fn finish(
    src: &IndepSource<'_>,
    names: &[String],
    phi: &DependenceMatrix,
    basis: Basis,
    envs: &dyn EnvironmentTables,
    environments: EnvironmentSummary,
    mut warnings: Vec<String>,
    cfg: &GlideConfig,
    mut clock: Clock,
    mode: &'static str,
    n_rows: Option<usize>,
) -> Result<GlideResult, GlideError> {
    let d = names.len();
    let blankets = blanket_map(src, d, cfg.cap_k)?;
    warnings.extend(blankets.warnings.iter().cloned());
    clock.lap("blankets");

    let candidates = plausible_parent_sets(&blankets, cfg.max_candidates)?;
    clock.lap("candidates");

    let rule = cfg.rule();
    let selections = (0..d)
        .into_par_iter()
        .map(|x| {
            if basis.contains(x) {
                return Ok(None);
            }
            let families = relevant_families(envs, phi, x, &blankets.cores[x]);
            let sets: Vec<Vec<usize>> = candidates[x].sets.iter().filter(|s| !s.is_empty()).cloned().collect();
            select_parents(envs, &families, x, &sets, &rule).map(Some)
        })
        .collect::<Result<Vec<_>, InvarianceError>>()?;
    clock.lap("selection");

    let mut parents: Vec<Vec<usize>> =
        selections.iter().map(|s| s.as_ref().map_or_else(Vec::new, |s| s.parents.clone())).collect();
    let margins: Vec<f64> = selections.iter().map(|s| s.as_ref().map_or(f64::INFINITY, |s| s.margin)).collect();
    let removed = repair_cycles(&mut parents, &margins);
    let repairs: Vec<Repair> = removed
        .iter()
        .map(|&(p, c)| Repair { parent: names[p].clone(), child: names[c].clone(), margin: margins[c] })
        .collect();
    if !removed.is_empty() {
        warnings.push(format!("{} edge(s) removed to break directed cycles", removed.len()));
    }

    let mut edges: Vec<(usize, usize)> =
        parents.iter().enumerate().flat_map(|(c, ps)| ps.iter().map(move |&p| (p, c))).collect();
    edges.sort_unstable();
    let dag = Dag::from_index_edges(names.to_vec(), &edges)?;

    let nodes = (0..d)
        .map(|x| {
            let mut flags = Vec::new();
            let (winner, variance, margin, scored) = match &selections[x] {
                None => {
                    flags.push(NodeFlag::Basis);
                    (Vec::new(), None, None, 0)
                }
                Some(s) => {
                    if s.below_confidence {
                        flags.push(NodeFlag::BelowConfidence);
                    }
                    if s.no_finite_candidate {
                        flags.push(NodeFlag::NoFiniteCandidate);
                    }
                    if s.unrefined_clique {
                        flags.push(NodeFlag::UnrefinedClique);
                    }
                    let finite = |v: f64| v.is_finite().then_some(v);
                    (s.parents.clone(), finite(s.variance), finite(s.margin), s.scores.len())
                }
            };
            if removed.iter().any(|&(_, c)| c == x) {
                flags.push(NodeFlag::CycleRepaired);
            }
            NodeReport {
                name: names[x].clone(),
                blanket: names_of(names, &blankets.blankets[x]),
                core: names_of(names, &blankets.cores[x]),
                spouses: names_of(names, &blankets.spouses[x]),
                candidates: candidates[x].sets.iter().map(|s| names_of(names, s)).collect(),
                degeneracy: candidates[x].degeneracy,
                scored_sets: scored,
                winner: names_of(names, &winner),
                variance,
                margin,
                flags,
            }
        })
        .collect();
    clock.lap("assembly");

    let report = GlideReport {
        config: cfg.clone(),
        mode,
        n_rows,
        n_vars: d,
        basis: names_of(names, &basis.members),
        environments,
        nodes,
        edges: edges.iter().map(|&(p, c)| (names[p].clone(), names[c].clone())).collect(),
        repairs,
        warnings,
        timings: clock.timings,
        tests: src.stats(),
    };
    Ok(GlideResult { dag, report, parents, basis, blankets })
}

/// Runs discovery on categorical data with the G-test backend.
pub fn glide(data: &Dataset, cfg: &GlideConfig) -> Result<GlideResult, GlideError> {
    cfg.validate()?;
    if data.n_rows() == 0 {
        return Err(DatasetError::EmptyDataset.into());
    }
    let mut clock = Clock::new();
    let names = data.names();
    let src = IndepSource::data(data, cfg.ci_alpha)?.with_min_stratum(cfg.min_stratum);
    let scan = dependence_matrix(&src, data.n_vars())?;
    let basis = find_basis(&scan.matrix);
    let mut warnings = Vec::new();
    if scan.degenerate_pairs > 0 {
        warnings.push(format!(
            "{} variable pair(s) involve a constant column and were treated as independent",
            scan.degenerate_pairs
        ));
    }
    clock.lap("basis");

    let set = make_environments(data, &basis.members, &cfg.augment())?;
    warnings.extend(set.warnings.iter().cloned());
    let summary = EnvironmentSummary {
        layout: set.layout,
        environments_per_family: cfg.m,
        families: set
            .families
            .iter()
            .map(|f| {
                let gammas: Vec<f64> = f.environments.iter().flat_map(|e| e.achieved_gamma.iter().copied()).collect();
                FamilySummary {
                    basis: names_of(names, &f.basis_vars),
                    environment_rows: f.environments.iter().map(|e| e.rows.len()).collect(),
                    min_gamma: gammas.iter().copied().fold(1.0, f64::min),
                    mean_gamma: if gammas.is_empty() { 1.0 } else { gammas.iter().sum::<f64>() / gammas.len() as f64 },
                }
            })
            .collect(),
        mean_retention: Some(set.mean_retention(data.n_rows())),
        skipped: names_of(names, &set.skipped),
    };
    clock.lap("environments");

    let envs = DataEnvironments::new(data, &set);
    finish(&src, names, &scan.matrix, basis, &envs, summary, warnings, cfg, clock, "data", Some(data.n_rows()))
}

/// Runs discovery with the d-separation oracle on `truth` and population-level
/// environments of `model`; nodes outside the identifiability conditions are flagged.
pub fn glide_exact(model: &CategoricalModel, truth: &Dag, cfg: &GlideConfig) -> Result<GlideResult, GlideError> {
    cfg.validate()?;
    let mut clock = Clock::new();
    let names = truth.names();
    let src = IndepSource::oracle(truth);
    let scan = dependence_matrix(&src, truth.node_count())?;
    let basis = find_basis(&scan.matrix);
    clock.lap("basis");

    let envs = ExactEnvironments::new(model, &basis.members, &cfg.augment())?;
    let plan = envs.plan();
    let summary = EnvironmentSummary {
        layout: plan.layout,
        environments_per_family: envs.environments_per_family(),
        families: plan
            .groups
            .iter()
            .map(|g| {
                let gammas: Vec<f64> =
                    g.iter().flat_map(|&k| plan.representatives[k].1.iter().map(|p| p.gamma)).collect();
                FamilySummary {
                    basis: g.iter().map(|&k| names[plan.representatives[k].0].clone()).collect(),
                    environment_rows: Vec::new(),
                    min_gamma: gammas.iter().copied().fold(1.0, f64::min),
                    mean_gamma: if gammas.is_empty() { 1.0 } else { gammas.iter().sum::<f64>() / gammas.len() as f64 },
                }
            })
            .collect(),
        mean_retention: None,
        skipped: names_of(names, &plan.skipped),
    };
    let warnings = plan.warnings.clone();
    clock.lap("environments");

    let mut result = finish(&src, names, &scan.matrix, basis, &envs, summary, warnings, cfg, clock, "exact", None)?;
    let sources = truth.sources();
    for (x, node) in result.report.nodes.iter_mut().enumerate() {
        let spouses = truth.spouses(x);
        if truth.parents(x).iter().any(|p| spouses.contains(p)) {
            node.flags.push(NodeFlag::PaSpouseOverlap);
        }
        if spouses.iter().any(|&s| result.basis.contains(s)) {
            node.flags.push(NodeFlag::SpouseInBasis);
        }
        if truth.descendants(x).iter().any(|&v| result.basis.contains(v)) {
            node.flags.push(NodeFlag::BasisDescendant);
        }
        let ancestors = truth.ancestors(x);
        if sources.iter().any(|s| ancestors.contains(s) && !result.basis.contains(*s)) {
            node.flags.push(NodeFlag::SourceNotInBasis);
        }
    }
    Ok(result)
}
