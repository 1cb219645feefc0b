//! Random DAG generators for benchmarks and property tests.

use rand::seq::{index, SliceRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Dag, GraphError};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    ErdosRenyi,
    ScaleFree,
    Bipartite,
}

impl std::str::FromStr for GraphKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "erdos_renyi" | "er" => Ok(GraphKind::ErdosRenyi),
            "scale_free" | "sf" => Ok(GraphKind::ScaleFree),
            "bipartite" | "bp" => Ok(GraphKind::Bipartite),
            other => Err(format!("unknown graph kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub kind: GraphKind,
    pub d: usize,
    pub e: usize,
    pub seed: u64,
    /// Size of the parent layer for bipartite graphs; `None` means `ceil(d/2)`.
    #[serde(default)]
    pub bipartite_split: Option<usize>,
    /// Preferential-attachment weight is `(degree + 1)^exponent`.
    #[serde(default = "default_exponent")]
    pub attachment_exponent: f64,
    /// Number of initial nodes wired as a clique before attachment starts.
    #[serde(default)]
    pub initial_clique: usize,
}

fn default_exponent() -> f64 {
    1.0
}

impl GenConfig {
    pub fn new(kind: GraphKind, d: usize, e: usize, seed: u64) -> Self {
        GenConfig { kind, d, e, seed, bipartite_split: None, attachment_exponent: 1.0, initial_clique: 0 }
    }
}

/// Draws a random DAG with exactly `cfg.e` edges.
pub fn generate_dag(cfg: &GenConfig) -> Result<Dag, GraphError> {
    if cfg.d == 0 {
        return Err(GraphError::InvalidQuery("graph needs at least one node".into()));
    }
    let mut rng = rng::stream(cfg.seed, "graph", 0);
    let d = cfg.d;
    // Edges in "position space": (u, v) means position u precedes position v.
    let positional: Vec<(usize, usize)> = match cfg.kind {
        GraphKind::ErdosRenyi => {
            let max = d * (d - 1) / 2;
            if cfg.e > max {
                return Err(GraphError::InfeasibleEdgeCount { requested: cfg.e, max });
            }
            index::sample(&mut rng, max, cfg.e).into_iter().map(|k| decode_pair(k, d)).collect()
        }
        GraphKind::ScaleFree => scale_free(cfg, &mut rng)?,
        GraphKind::Bipartite => {
            let top = cfg.bipartite_split.unwrap_or(d.div_ceil(2)).min(d);
            let bottom = d - top;
            let max = top * bottom;
            if cfg.e > max {
                return Err(GraphError::InfeasibleEdgeCount { requested: cfg.e, max });
            }
            index::sample(&mut rng, max, cfg.e).into_iter().map(|k| (k / bottom, top + k % bottom)).collect()
        }
    };
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(&mut rng);
    let edges: Vec<(usize, usize)> = positional.into_iter().map(|(u, v)| (perm[u], perm[v])).collect();
    Dag::with_default_names(d, &edges)
}

/// Maps a linear index to the pair `(i, j)`, `i < j`, in row-major order.
fn decode_pair(mut k: usize, d: usize) -> (usize, usize) {
    let mut i = 0;
    loop {
        let row = d - 1 - i;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
        i += 1;
    }
}

fn scale_free(cfg: &GenConfig, rng: &mut rng::Rng) -> Result<Vec<(usize, usize)>, GraphError> {
    let d = cfg.d;
    let max = d * (d - 1) / 2;
    if cfg.e > max {
        return Err(GraphError::InfeasibleEdgeCount { requested: cfg.e, max });
    }
    let m0 = cfg.initial_clique.min(d);
    let clique_edges = m0 * m0.saturating_sub(1) / 2;
    if clique_edges > cfg.e {
        return Err(GraphError::InfeasibleEdgeCount { requested: cfg.e, max: clique_edges });
    }
    let mut edges = Vec::with_capacity(cfg.e);
    let mut degree = vec![0usize; d];
    for a in 0..m0 {
        for b in a + 1..m0 {
            edges.push((a, b));
            degree[a] += 1;
            degree[b] += 1;
        }
    }
    // Out-degree budget for each later node, spread as evenly as capacity allows.
    let start = m0.max(1);
    let mut quota = vec![0usize; d];
    let mut remaining = cfg.e - clique_edges;
    let slots = d.saturating_sub(start);
    if let Some(base) = remaining.checked_div(slots) {
        for (t, q) in quota.iter_mut().enumerate().skip(start) {
            *q = base.min(t);
            remaining -= *q;
        }
        while remaining > 0 {
            let mut progressed = false;
            for t in (start..d).rev() {
                if remaining == 0 {
                    break;
                }
                if quota[t] < t {
                    quota[t] += 1;
                    remaining -= 1;
                    progressed = true;
                }
            }
            if !progressed {
                break;
            }
        }
    }
    debug_assert_eq!(remaining, 0);
    for t in start..d {
        let mut pool: Vec<usize> = (0..t).collect();
        for _ in 0..quota[t] {
            let weights: Vec<f64> =
                pool.iter().map(|&u| ((degree[u] + 1) as f64).powf(cfg.attachment_exponent)).collect();
            let total: f64 = weights.iter().sum();
            let mut r = rng.random::<f64>() * total;
            let mut pick = pool.len() - 1;
            for (k, w) in weights.iter().enumerate() {
                if r < *w {
                    pick = k;
                    break;
                }
                r -= w;
            }
            let u = pool.swap_remove(pick);
            edges.push((u, t));
            degree[u] += 1;
            degree[t] += 1;
        }
    }
    Ok(edges)
}
