//! Directed acyclic graph with parent/child adjacency and d-separation queries.

use std::collections::{HashMap, HashSet, VecDeque};

use super::GraphError;

/// A validated DAG over `d` named nodes.
///
/// Edges are kept sorted by `(parent, child)`; parent and child lists are
/// sorted ascending. The structure is immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    names: Vec<String>,
    edges: Vec<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl Dag {
    /// Builds a DAG from node names and named edges.
    pub fn from_edges<S: AsRef<str>>(names: Vec<String>, edges: &[(S, S)]) -> Result<Self, GraphError> {
        let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        if index.len() != names.len() {
            let mut seen = HashSet::new();
            let dup = names.iter().find(|n| !seen.insert(n.as_str())).cloned().unwrap_or_default();
            return Err(GraphError::DuplicateNode(dup));
        }
        let mut idx_edges = Vec::with_capacity(edges.len());
        for (p, c) in edges {
            let p = p.as_ref();
            let c = c.as_ref();
            let pi = *index.get(p).ok_or_else(|| GraphError::UnknownNode(p.to_string()))?;
            let ci = *index.get(c).ok_or_else(|| GraphError::UnknownNode(c.to_string()))?;
            idx_edges.push((pi, ci));
        }
        Self::from_index_edges(names, &idx_edges)
    }

    /// Builds a DAG from node names and index edges.
    pub fn from_index_edges(names: Vec<String>, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let d = names.len();
        let mut parents = vec![Vec::new(); d];
        let mut children = vec![Vec::new(); d];
        let mut set = HashSet::with_capacity(edges.len());
        for &(p, c) in edges {
            if p >= d {
                return Err(GraphError::NodeOutOfRange(p));
            }
            if c >= d {
                return Err(GraphError::NodeOutOfRange(c));
            }
            if p == c {
                return Err(GraphError::SelfLoop(names[p].clone()));
            }
            if !set.insert((p, c)) {
                return Err(GraphError::DuplicateEdge(names[p].clone(), names[c].clone()));
            }
            parents[c].push(p);
            children[p].push(c);
        }
        for l in parents.iter_mut().chain(children.iter_mut()) {
            l.sort_unstable();
        }
        let mut edges: Vec<(usize, usize)> = set.into_iter().collect();
        edges.sort_unstable();
        let dag = Dag { names, edges, parents, children };
        if dag.topological_order().is_none() {
            return Err(GraphError::CycleDetected);
        }
        Ok(dag)
    }

    /// Builds a DAG with default names `X0..X{d-1}`.
    pub fn with_default_names(d: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        Self::from_index_edges(default_names(d), edges)
    }

    /// The graph on `d` nodes with no edges.
    pub fn empty(d: usize) -> Self {
        Dag { names: default_names(d), edges: Vec::new(), parents: vec![Vec::new(); d], children: vec![Vec::new(); d] }
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Edges sorted by `(parent, child)`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn has_edge(&self, p: usize, c: usize) -> bool {
        self.children.get(p).is_some_and(|ch| ch.binary_search(&c).is_ok())
    }

    /// Nodes with an empty parent list.
    pub fn sources(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&i| self.parents[i].is_empty()).collect()
    }

    /// Kahn's algorithm; `None` when a cycle exists. Ties resolve to the
    /// lowest index so the order is deterministic.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        topological_order(self.node_count(), &self.parents, &self.children)
    }

    /// Parents of the children of `i`, excluding `i` itself.
    pub fn spouses(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> =
            self.children[i].iter().flat_map(|&c| self.parents[c].iter().copied()).filter(|&p| p != i).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Parents, children and spouses of `i`.
    pub fn markov_blanket(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.parents[i].iter().chain(&self.children[i]).copied().collect();
        out.extend(self.spouses(i));
        out.sort_unstable();
        out.dedup();
        out
    }

    /// All nodes reachable from `i` by directed paths (excluding `i`).
    pub fn descendants(&self, i: usize) -> Vec<usize> {
        reach(i, &self.children)
    }

    /// All nodes with a directed path into `i` (excluding `i`).
    pub fn ancestors(&self, i: usize) -> Vec<usize> {
        reach(i, &self.parents)
    }

    /// Whether `x` and `y` are d-separated given `z`.
    ///
    /// Uses the reachable-by-active-trail traversal: a node is entered either
    /// from a child (moving up) or from a parent (moving down); colliders pass
    /// only when they or a descendant are conditioned on.
    pub fn d_separated(&self, x: usize, y: usize, z: &[usize]) -> Result<bool, GraphError> {
        let d = self.node_count();
        for &v in [x, y].iter().chain(z) {
            if v >= d {
                return Err(GraphError::NodeOutOfRange(v));
            }
        }
        if x == y {
            return Err(GraphError::InvalidQuery("x and y must differ".into()));
        }
        if z.contains(&x) || z.contains(&y) {
            return Err(GraphError::InvalidQuery("x and y must not be in the conditioning set".into()));
        }
        Ok(!self.reachable(x, z)[y])
    }

    /// Nodes d-connected to `x` given `z` (entry `x` itself is marked).
    pub(crate) fn reachable(&self, x: usize, z: &[usize]) -> Vec<bool> {
        let d = self.node_count();
        let mut observed = vec![false; d];
        for &v in z {
            observed[v] = true;
        }
        // Nodes that are in z or have a descendant in z.
        let mut anc_of_obs = vec![false; d];
        let mut stack: Vec<usize> = z.to_vec();
        while let Some(v) = stack.pop() {
            if anc_of_obs[v] {
                continue;
            }
            anc_of_obs[v] = true;
            stack.extend(self.parents[v].iter().copied().filter(|&p| !anc_of_obs[p]));
        }

        const UP: usize = 0;
        const DOWN: usize = 1;
        let mut visited = vec![[false; 2]; d];
        let mut reachable = vec![false; d];
        let mut queue = VecDeque::new();
        queue.push_back((x, UP));
        while let Some((v, dir)) = queue.pop_front() {
            if visited[v][dir] {
                continue;
            }
            visited[v][dir] = true;
            if !observed[v] {
                reachable[v] = true;
            }
            if dir == UP && !observed[v] {
                for &p in &self.parents[v] {
                    queue.push_back((p, UP));
                }
                for &c in &self.children[v] {
                    queue.push_back((c, DOWN));
                }
            } else if dir == DOWN {
                if !observed[v] {
                    for &c in &self.children[v] {
                        queue.push_back((c, DOWN));
                    }
                }
                if anc_of_obs[v] {
                    for &p in &self.parents[v] {
                        queue.push_back((p, UP));
                    }
                }
            }
        }
        reachable
    }

    /// Returns a copy of the graph with every node renamed by `perm`:
    /// old node `i` becomes new node `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Dag, GraphError> {
        let d = self.node_count();
        let mut names = vec![String::new(); d];
        for (i, &p) in perm.iter().enumerate() {
            names[p] = self.names[i].clone();
        }
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        Dag::from_index_edges(names, &edges)
    }
}

pub(crate) fn default_names(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("X{i}")).collect()
}

pub(crate) fn topological_order(d: usize, parents: &[Vec<usize>], children: &[Vec<usize>]) -> Option<Vec<usize>> {
    let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: std::collections::BTreeSet<usize> = (0..d).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(d);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                ready.insert(c);
            }
        }
    }
    (order.len() == d).then_some(order)
}

fn reach(start: usize, adj: &[Vec<usize>]) -> Vec<usize> {
    let mut seen = vec![false; adj.len()];
    let mut stack = adj[start].clone();
    while let Some(v) = stack.pop() {
        if !seen[v] {
            seen[v] = true;
            stack.extend(adj[v].iter().copied().filter(|&w| !seen[w]));
        }
    }
    (0..adj.len()).filter(|&i| seen[i]).collect()
}
