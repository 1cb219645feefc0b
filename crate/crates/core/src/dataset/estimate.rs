//! Empirical marginals and conditional probability tables.

use std::collections::HashMap;

use super::{DatasetError, View};

/// Empirical estimate of `P(x | z)` over the z-configurations present in the data.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    pub x: usize,
    pub z: Vec<usize>,
    pub x_card: usize,
    /// Observed z-configurations, sorted lexicographically.
    pub configs: Vec<Vec<u32>>,
    /// One probability vector over x per configuration.
    pub table: Vec<Vec<f64>>,
    /// Raw row count per configuration.
    pub support: Vec<usize>,
}

/// Joint counts of `x` within each observed z-configuration.
///
/// Configurations are identified by a mixed-radix key (first conditioning
/// variable most significant), so sorting by key is lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub x_card: usize,
    pub keys: Vec<u64>,
    /// `counts[k * x_card + v]` = rows with configuration `keys[k]` and `x = v`.
    pub counts: Vec<u32>,
}

impl CountTable {
    pub fn support(&self, k: usize) -> u64 {
        self.counts[k * self.x_card..(k + 1) * self.x_card].iter().map(|&c| u64::from(c)).sum()
    }
}

const DENSE_LIMIT: u64 = 1 << 16;

/// Mixed-radix strides for `z`; fails when the configuration space overflows `u64`.
pub(crate) fn radix(cards: &[usize], z: &[usize]) -> Result<(Vec<u64>, u64), DatasetError> {
    let mut strides = vec![0u64; z.len()];
    let mut total: u64 = 1;
    for (k, &v) in z.iter().enumerate().rev() {
        strides[k] = total;
        total = total.checked_mul(cards[v].max(1) as u64).ok_or(DatasetError::ConfigurationOverflow)?;
    }
    Ok((strides, total))
}

/// Counts `x` per z-configuration on a view.
pub fn count_table(view: &View<'_>, x: usize, z: &[usize]) -> Result<CountTable, DatasetError> {
    let ds = view.data();
    let x_card = ds.cardinality(x);
    let (strides, total) = radix(ds.cardinalities(), z)?;
    let xcol = ds.column(x);
    let zcols: Vec<&[u32]> = z.iter().map(|&v| ds.column(v)).collect();
    let key_of = |r: usize| -> u64 { zcols.iter().zip(&strides).map(|(c, s)| u64::from(c[r]) * s).sum() };
    if total <= DENSE_LIMIT {
        let mut dense = vec![0u32; total as usize * x_card];
        view.for_each_row(|r| {
            dense[key_of(r) as usize * x_card + xcol[r] as usize] += 1;
        });
        let mut keys = Vec::new();
        let mut counts = Vec::new();
        for (k, chunk) in dense.chunks_exact(x_card).enumerate() {
            if chunk.iter().any(|&c| c > 0) {
                keys.push(k as u64);
                counts.extend_from_slice(chunk);
            }
        }
        Ok(CountTable { x_card, keys, counts })
    } else {
        let mut slots: HashMap<u64, usize> = HashMap::new();
        let mut raw: Vec<u32> = Vec::new();
        view.for_each_row(|r| {
            let key = key_of(r);
            let next = slots.len();
            let slot = *slots.entry(key).or_insert(next);
            if slot == next {
                raw.resize(raw.len() + x_card, 0);
            }
            raw[slot * x_card + xcol[r] as usize] += 1;
        });
        let mut order: Vec<(u64, usize)> = slots.into_iter().collect();
        order.sort_unstable();
        let mut keys = Vec::with_capacity(order.len());
        let mut counts = Vec::with_capacity(raw.len());
        for (key, slot) in order {
            keys.push(key);
            counts.extend_from_slice(&raw[slot * x_card..(slot + 1) * x_card]);
        }
        Ok(CountTable { x_card, keys, counts })
    }
}

/// Decodes a configuration key back into per-variable codes.
pub(crate) fn decode_key(key: u64, cards: &[usize], z: &[usize]) -> Vec<u32> {
    let mut out = vec![0u32; z.len()];
    let mut rest = key;
    for (k, &v) in z.iter().enumerate().rev() {
        let c = cards[v].max(1) as u64;
        out[k] = (rest % c) as u32;
        rest /= c;
    }
    out
}

/// Relative frequency of every category of `var` (length = cardinality).
pub fn empirical_marginal(view: &View<'_>, var: usize) -> Result<Vec<f64>, DatasetError> {
    let n = view.len();
    if n == 0 {
        return Err(DatasetError::EmptyDataset);
    }
    let ds = view.data();
    let col = ds.column(var);
    let mut counts = vec![0usize; ds.cardinality(var)];
    view.for_each_row(|r| counts[col[r] as usize] += 1);
    Ok(counts.into_iter().map(|c| c as f64 / n as f64).collect())
}

/// Add-`alpha` smoothed estimate of `P(x | z)` for every observed z-configuration.
pub fn empirical_conditional(view: &View<'_>, x: usize, z: &[usize], laplace_alpha: f64) -> Result<Cpt, DatasetError> {
    if view.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    if z.contains(&x) {
        return Err(DatasetError::Shape("target variable appears in the conditioning set".into()));
    }
    let ds = view.data();
    let counts = count_table(view, x, z)?;
    let x_card = counts.x_card;
    let mut configs = Vec::with_capacity(counts.keys.len());
    let mut table = Vec::with_capacity(counts.keys.len());
    let mut support = Vec::with_capacity(counts.keys.len());
    for (k, &key) in counts.keys.iter().enumerate() {
        let row = &counts.counts[k * x_card..(k + 1) * x_card];
        let total: u64 = row.iter().map(|&c| u64::from(c)).sum();
        let denom = total as f64 + laplace_alpha * x_card as f64;
        table.push(row.iter().map(|&c| (f64::from(c) + laplace_alpha) / denom).collect());
        support.push(total as usize);
        configs.push(decode_key(key, ds.cardinalities(), z));
    }
    Ok(Cpt { x, z: z.to_vec(), x_card, configs, table, support })
}
