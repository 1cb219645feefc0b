//! Undirected ("bidirectional") graph over a subset of variables.

/// Symmetric graph whose local vertex `k` stands for variable `node_ids[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiGraph {
    node_ids: Vec<usize>,
    adj: Vec<Vec<usize>>,
}

impl BiGraph {
    /// Graph on `node_ids` with no edges.
    pub fn new(node_ids: Vec<usize>) -> Self {
        let n = node_ids.len();
        BiGraph { node_ids, adj: vec![Vec::new(); n] }
    }

    /// Graph on local vertices `0..n` labelled with their own index.
    pub fn with_size(n: usize) -> Self {
        Self::new((0..n).collect())
    }

    /// Builds from local edges; self-loops and duplicates are dropped.
    pub fn from_local_edges(node_ids: Vec<usize>, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::new(node_ids);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    /// Adds the undirected edge between local vertices `a` and `b`.
    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a == b || self.has_edge(a, b) {
            return;
        }
        let pos = self.adj[a].binary_search(&b).unwrap_err();
        self.adj[a].insert(pos, b);
        let pos = self.adj[b].binary_search(&a).unwrap_err();
        self.adj[b].insert(pos, a);
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn node_ids(&self) -> &[usize] {
        &self.node_ids
    }

    /// Sorted local neighbours of local vertex `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Maps local vertices to variable ids, sorted ascending.
    pub fn to_ids(&self, local: &[usize]) -> Vec<usize> {
        let mut ids: Vec<usize> = local.iter().map(|&v| self.node_ids[v]).collect();
        ids.sort_unstable();
        ids
    }
}

/// Degeneracy `p` and the minimum-degree removal order that certifies it.
///
/// Repeatedly removes a vertex of minimum remaining degree (lowest local
/// index on ties); `p` is the largest degree seen at removal time.
pub fn degeneracy(g: &BiGraph) -> (usize, Vec<usize>) {
    let n = g.len();
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut removed = vec![false; n];
    let maxdeg = deg.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); maxdeg + 1];
    for v in 0..n {
        buckets[deg[v]].insert(v);
    }
    let mut order = Vec::with_capacity(n);
    let mut p = 0;
    let mut lo = 0;
    for _ in 0..n {
        lo = lo.min(maxdeg);
        while buckets[lo].is_empty() {
            lo += 1;
        }
        let v = buckets[lo].pop_first().expect("non-empty bucket");
        p = p.max(lo);
        removed[v] = true;
        order.push(v);
        for &w in g.neighbors(v) {
            if !removed[w] {
                buckets[deg[w]].remove(&w);
                deg[w] -= 1;
                buckets[deg[w]].insert(w);
                lo = lo.min(deg[w]);
            }
        }
    }
    (p, order)
}
