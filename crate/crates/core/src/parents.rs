//! Plausible parent sets: maximal cliques of the blanket graph over `M*(x)`.

use serde::Serialize;
use thiserror::Error;

use crate::blanket::BlanketMap;
use crate::graph::{degeneracy, BiGraph};

/// Default per-variable limit on enumerated candidate sets.
pub const DEFAULT_MAX_CANDIDATES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParentsError {
    #[error("variable {variable} has more than {limit} candidate parent sets (graph degeneracy {degeneracy})")]
    CandidateExplosion { variable: usize, limit: usize, degeneracy: usize },
}

/// Graph on `core` with an edge wherever membership is mutual in the blankets.
pub fn build_bigraph(core: &[usize], blankets: &BlanketMap) -> BiGraph {
    let mut g = BiGraph::new(core.to_vec());
    for a in 0..core.len() {
        for b in a + 1..core.len() {
            if blankets.in_blanket(core[a], core[b]) && blankets.in_blanket(core[b], core[a]) {
                g.add_edge(a, b);
            }
        }
    }
    g
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    // Both sorted ascending.
    let mut it = big.iter();
    small.iter().all(|s| it.by_ref().any(|b| b == s))
}

fn sorted_union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

struct TreeSearch<'g> {
    g: &'g BiGraph,
    leaves: Vec<Vec<usize>>,
    limit: usize,
    overflow: bool,
}

impl TreeSearch<'_> {
    /// Expands a tree node: `path` is the clique so far, `search` the vertices
    /// adjacent to all of `path` that are still eligible below this node.
    fn expand(&mut self, path: &[usize], search: &[usize]) {
        if self.overflow {
            return;
        }
        if search.is_empty() {
            let mut leaf = path.to_vec();
            leaf.sort_unstable();
            self.leaves.push(leaf);
            if self.leaves.len() > self.limit {
                self.overflow = true;
            }
            return;
        }
        let mut order: Vec<(usize, usize)> =
            search.iter().map(|&v| (search.iter().filter(|&&u| self.g.has_edge(u, v)).count(), v)).collect();
        order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut remaining: Vec<usize> = order.iter().map(|&(_, v)| v).collect();
        while !remaining.is_empty() {
            let v = remaining.remove(0);
            let next_search: Vec<usize> = remaining.iter().copied().filter(|&u| self.g.has_edge(u, v)).collect();
            let mut next_path = path.to_vec();
            next_path.push(v);
            // Every clique below this branch lies inside path + search; skip it
            // when that whole set is already covered by a leaf.
            let reach = sorted_union(&next_path, &next_search);
            if self.leaves.iter().any(|leaf| is_subset(&reach, leaf)) {
                continue;
            }
            self.expand(&next_path, &next_search);
        }
    }
}

/// Maximal cliques of `g` (local indices, each ascending) by the virtual-root
/// search tree, or `None` when more than `limit` leaves are produced.
pub fn tree_cliques(g: &BiGraph, limit: usize) -> Option<Vec<Vec<usize>>> {
    if g.is_empty() {
        return Some(Vec::new());
    }
    let mut search = TreeSearch { g, leaves: Vec::new(), limit, overflow: false };
    let all: Vec<usize> = (0..g.len()).collect();
    search.expand(&[], &all);
    if search.overflow {
        return None;
    }
    let leaves = search.leaves;
    let mut maximal: Vec<Vec<usize>> = leaves
        .iter()
        .enumerate()
        .filter(|(i, leaf)| {
            !leaves.iter().enumerate().any(|(j, other)| {
                (other.len() > leaf.len() || (other.len() == leaf.len() && j < *i)) && is_subset(leaf, other)
            })
        })
        .map(|(_, leaf)| leaf.clone())
        .collect();
    maximal.sort();
    Some(maximal)
}

/// Classical Bron-Kerbosch with Tomita pivoting (local indices, each ascending).
pub fn bron_kerbosch_reference(g: &BiGraph) -> Vec<Vec<usize>> {
    fn recurse(g: &BiGraph, r: &mut Vec<usize>, mut p: Vec<usize>, mut x: Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if p.is_empty() {
            if x.is_empty() {
                let mut c = r.clone();
                c.sort_unstable();
                out.push(c);
            }
            return;
        }
        let pivot = p
            .iter()
            .chain(&x)
            .copied()
            .max_by_key(|&u| (p.iter().filter(|&&v| g.has_edge(u, v)).count(), std::cmp::Reverse(u)))
            .expect("p is non-empty");
        let branch: Vec<usize> = p.iter().copied().filter(|&v| !g.has_edge(pivot, v)).collect();
        for v in branch {
            let np = p.iter().copied().filter(|&u| g.has_edge(u, v)).collect();
            let nx = x.iter().copied().filter(|&u| g.has_edge(u, v)).collect();
            r.push(v);
            recurse(g, r, np, nx, out);
            r.pop();
            p.retain(|&u| u != v);
            x.push(v);
        }
    }
    let mut out = Vec::new();
    if !g.is_empty() {
        recurse(g, &mut Vec::new(), (0..g.len()).collect(), Vec::new(), &mut out);
    }
    out.sort();
    out
}

/// Candidate parent sets for one variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeCandidates {
    /// Maximal cliques over global indices plus the empty set, sorted by size
    /// descending then lexicographically.
    pub sets: Vec<Vec<usize>>,
    /// Degeneracy of the blanket graph.
    pub degeneracy: usize,
}

/// Candidate lists for every variable.
pub fn plausible_parent_sets(
    blankets: &BlanketMap,
    max_candidates: usize,
) -> Result<Vec<NodeCandidates>, ParentsError> {
    (0..blankets.len())
        .map(|x| {
            let g = build_bigraph(&blankets.cores[x], blankets);
            let (p, _) = degeneracy(&g);
            let cliques = tree_cliques(&g, max_candidates).ok_or(ParentsError::CandidateExplosion {
                variable: x,
                limit: max_candidates,
                degeneracy: p,
            })?;
            let mut sets: Vec<Vec<usize>> = cliques.iter().map(|c| g.to_ids(c)).collect();
            for s in sets.iter_mut() {
                s.sort_unstable();
            }
            if !sets.iter().any(Vec::is_empty) {
                sets.push(Vec::new());
            }
            sets.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
            sets.dedup();
            if sets.len() > max_candidates {
                return Err(ParentsError::CandidateExplosion { variable: x, limit: max_candidates, degeneracy: p });
            }
            Ok(NodeCandidates { sets, degeneracy: p })
        })
        .collect()
}
