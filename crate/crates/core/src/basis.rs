//! Pairwise dependence matrix and the greedy maximum-sized basis search.

use serde::Serialize;

use crate::indep::{IndepError, IndepSource, TestFlag};

/// Symmetric boolean matrix: entry `(i, j)` is set iff `X_j` depends on `X_i`.
/// The diagonal is always set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependenceMatrix {
    d: usize,
    bits: Vec<bool>,
}

impl DependenceMatrix {
    /// Identity matrix: every variable depends only on itself.
    pub fn identity(d: usize) -> Self {
        let mut bits = vec![false; d * d];
        for i in 0..d {
            bits[i * d + i] = true;
        }
        DependenceMatrix { d, bits }
    }

    /// Builds from a predicate evaluated on `i < j`; the result is symmetrized.
    pub fn from_fn(d: usize, mut dep: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::identity(d);
        for i in 0..d {
            for j in i + 1..d {
                if dep(i, j) {
                    m.set(i, j);
                }
            }
        }
        m
    }

    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.d + j] = true;
        self.bits[j * self.d + i] = true;
    }

    pub fn size(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.d + j]
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.bits[i * self.d..(i + 1) * self.d]
    }

    /// `|Phi(X_i)|` over all variables, including `X_i` itself.
    pub fn dependence_count(&self, i: usize) -> usize {
        self.row(i).iter().filter(|&&b| b).count()
    }
}

/// A dependence matrix plus the number of degenerate pairs treated as independent.
#[derive(Debug, Clone)]
pub struct DependenceScan {
    pub matrix: DependenceMatrix,
    pub degenerate_pairs: usize,
}

/// Runs the pairwise test over all unordered pairs.
pub fn dependence_matrix(src: &IndepSource<'_>, d: usize) -> Result<DependenceScan, IndepError> {
    let mut degenerate_pairs = 0;
    let mut err = None;
    let matrix = DependenceMatrix::from_fn(d, |i, j| match src.test(i, j, &[]) {
        Ok(t) => {
            if t.flag == Some(TestFlag::DegenerateTable) {
                degenerate_pairs += 1;
            }
            !t.independent
        }
        Err(e) => {
            err.get_or_insert(e);
            false
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(DependenceScan { matrix, degenerate_pairs }),
    }
}

/// Mutually independent variables that together reach every other variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Basis {
    /// Members in selection order.
    pub members: Vec<usize>,
    /// For each member, the variables its selection removed from the pool.
    pub dependence_sets: Vec<Vec<usize>>,
}

impl Basis {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.contains(&v)
    }
}

/// Greedy selection: take the live variable with the fewest live dependents
/// (lowest index on ties), add it, drop its dependents from the pool, repeat.
pub fn find_basis(phi: &DependenceMatrix) -> Basis {
    let d = phi.size();
    let mut live = vec![true; d];
    let mut remaining = d;
    let mut members = Vec::new();
    let mut dependence_sets = Vec::new();
    while remaining > 0 {
        let (best, _) = (0..d)
            .filter(|&i| live[i])
            .map(|i| (i, (0..d).filter(|&j| live[j] && phi.get(i, j)).count()))
            .min_by_key(|&(i, c)| (c, i))
            .expect("pool is non-empty");
        let removed: Vec<usize> = (0..d).filter(|&j| live[j] && phi.get(best, j)).collect();
        for &j in &removed {
            live[j] = false;
        }
        remaining -= removed.len();
        members.push(best);
        dependence_sets.push(removed);
    }
    Basis { members, dependence_sets }
}

/// Checks the basis definition against `phi`: members pairwise independent,
/// every other variable dependent on at least one member.
pub fn is_valid_basis(phi: &DependenceMatrix, members: &[usize]) -> bool {
    let pairwise = members.iter().enumerate().all(|(k, &a)| members[k + 1..].iter().all(|&b| !phi.get(a, b)));
    let covering = (0..phi.size()).all(|v| members.contains(&v) || members.iter().any(|&b| phi.get(b, v)));
    pairwise && covering
}
