//! Markov blanket recovery (grow-shrink) and spouse removal.

use serde::Serialize;

use crate::indep::{IndepError, IndepSource};

/// Default largest conditioning-set size tried when separating spouses.
pub const DEFAULT_CAP_K: usize = 4;
/// Blankets larger than this fall back to a subset cap of 2.
pub const LARGE_BLANKET: usize = 25;
const LARGE_BLANKET_CAP: usize = 2;

/// Blankets, their spouse-free cores, and the spouses removed from each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlanketMap {
    /// Symmetrized blankets `M(x)`, ascending.
    pub blankets: Vec<Vec<usize>>,
    /// `M*(x) = M(x) \ Sp(x)`, ascending.
    pub cores: Vec<Vec<usize>>,
    /// Members of `M(x)` separated from `x` by some small subset.
    pub spouses: Vec<Vec<usize>>,
    pub warnings: Vec<String>,
}

impl BlanketMap {
    pub fn len(&self) -> usize {
        self.blankets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blankets.is_empty()
    }

    pub fn in_blanket(&self, of: usize, v: usize) -> bool {
        self.blankets[of].binary_search(&v).is_ok()
    }
}

/// Grow-shrink blanket of `x` with an ascending scan over all other variables.
pub fn grow_shrink_mb(src: &IndepSource<'_>, x: usize, d: usize) -> Result<Vec<usize>, IndepError> {
    let mut set: Vec<usize> = Vec::new();
    loop {
        let mut grew = false;
        for y in 0..d {
            if y == x || set.contains(&y) {
                continue;
            }
            if !src.cond_independent(x, y, &set)? {
                set.push(y);
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    let mut k = 0;
    while k < set.len() {
        let y = set[k];
        let rest: Vec<usize> = set.iter().copied().filter(|&v| v != y).collect();
        if src.cond_independent(x, y, &rest)? {
            set.remove(k);
        } else {
            k += 1;
        }
    }
    set.sort_unstable();
    Ok(set)
}

/// Grow-shrink blankets for every variable, kept only where membership is mutual.
pub fn all_markov_blankets(src: &IndepSource<'_>, d: usize) -> Result<Vec<Vec<usize>>, IndepError> {
    let raw: Vec<Vec<usize>> = (0..d).map(|x| grow_shrink_mb(src, x, d)).collect::<Result<_, _>>()?;
    Ok((0..d).map(|x| raw[x].iter().copied().filter(|&y| raw[y].binary_search(&x).is_ok()).collect()).collect())
}

/// Calls `f` on every subset of `pool` with at most `cap` elements, smallest
/// first and lexicographic within a size; stops early when `f` returns true.
fn any_subset(
    pool: &[usize],
    cap: usize,
    mut f: impl FnMut(&[usize]) -> Result<bool, IndepError>,
) -> Result<bool, IndepError> {
    let n = pool.len();
    for size in 0..=cap.min(n) {
        let mut idx: Vec<usize> = (0..size).collect();
        let mut subset = vec![0; size];
        loop {
            for (s, &i) in subset.iter_mut().zip(&idx) {
                *s = pool[i];
            }
            if f(&subset)? {
                return Ok(true);
            }
            // Next combination in lexicographic order.
            let mut k = size;
            while k > 0 && idx[k - 1] == n - size + k - 1 {
                k -= 1;
            }
            if k == 0 {
                break;
            }
            idx[k - 1] += 1;
            for j in k..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    Ok(false)
}

/// Outcome of spouse removal for one variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpouseSplit {
    pub core: Vec<usize>,
    pub spouses: Vec<usize>,
    /// Set when the blanket exceeded the size guard and the cap was lowered.
    pub capped: bool,
}

/// Drops every `y` in `blanket` that some subset of at most `cap_k` other
/// blanket members separates from `x`.
///
/// When `partner_blankets` is given, subsets of `M(y) \ {x}` are tried as
/// well, which keeps the split symmetric in `x` and `y`.
pub fn remove_spouses(
    src: &IndepSource<'_>,
    x: usize,
    blanket: &[usize],
    cap_k: usize,
    partner_blankets: Option<&[Vec<usize>]>,
) -> Result<SpouseSplit, IndepError> {
    let capped = blanket.len() > LARGE_BLANKET;
    let cap = if capped { cap_k.min(LARGE_BLANKET_CAP) } else { cap_k };
    let mut core = Vec::new();
    let mut spouses = Vec::new();
    for &y in blanket {
        let own: Vec<usize> = blanket.iter().copied().filter(|&v| v != y).collect();
        let mut separated = any_subset(&own, cap, |s| src.cond_independent(x, y, s))?;
        if !separated {
            if let Some(other) = partner_blankets {
                let theirs: Vec<usize> = other[y].iter().copied().filter(|&v| v != x).collect();
                let cap_y = if theirs.len() > LARGE_BLANKET { cap.min(LARGE_BLANKET_CAP) } else { cap };
                separated = any_subset(&theirs, cap_y, |s| src.cond_independent(x, y, s))?;
            }
        }
        if separated {
            spouses.push(y);
        } else {
            core.push(y);
        }
    }
    Ok(SpouseSplit { core, spouses, capped })
}

/// Symmetrized blankets plus spouse removal for every variable.
pub fn blanket_map(src: &IndepSource<'_>, d: usize, cap_k: usize) -> Result<BlanketMap, IndepError> {
    let blankets = all_markov_blankets(src, d)?;
    let mut cores = Vec::with_capacity(d);
    let mut spouses = Vec::with_capacity(d);
    let mut warnings = Vec::new();
    for x in 0..d {
        let split = remove_spouses(src, x, &blankets[x], cap_k, Some(&blankets))?;
        if split.capped {
            warnings.push(format!(
                "blanket of variable {x} has {} members; spouse search limited to subsets of size {LARGE_BLANKET_CAP}",
                blankets[x].len()
            ));
        }
        cores.push(split.core);
        spouses.push(split.spouses);
    }
    Ok(BlanketMap { blankets, cores, spouses, warnings })
}
