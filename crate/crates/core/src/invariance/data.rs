//! Conditional tables estimated from downsampled environments.

use super::{EnvTable, EnvironmentTables, InvarianceError};
use crate::augment::EnvironmentSet;
use crate::dataset::{count_table, Dataset};

/// Environments realised as row subsets of one dataset.
pub struct DataEnvironments<'a> {
    data: &'a Dataset,
    set: &'a EnvironmentSet,
}

impl<'a> DataEnvironments<'a> {
    pub fn new(data: &'a Dataset, set: &'a EnvironmentSet) -> Self {
        DataEnvironments { data, set }
    }

    pub fn set(&self) -> &EnvironmentSet {
        self.set
    }
}

impl EnvironmentTables for DataEnvironments<'_> {
    fn family_count(&self) -> usize {
        self.set.families.len()
    }

    fn family_basis(&self, f: usize) -> &[usize] {
        &self.set.families[f].basis_vars
    }

    /// Add-`laplace_alpha` smoothed tables; support is the raw row count.
    fn tables(&self, f: usize, x: usize, z: &[usize], laplace_alpha: f64) -> Result<Vec<EnvTable>, InvarianceError> {
        let d = self.data.n_vars();
        if let Some(&bad) = std::iter::once(&x).chain(z).find(|&&v| v >= d) {
            return Err(InvarianceError::OutOfRange(bad));
        }
        self.set.families[f]
            .environments
            .iter()
            .map(|env| {
                let counts = count_table(&self.data.subset(&env.rows), x, z)?;
                let x_card = counts.x_card;
                let mut support = Vec::with_capacity(counts.keys.len());
                let mut probs = Vec::with_capacity(counts.counts.len());
                for row in counts.counts.chunks_exact(x_card) {
                    let total: f64 = row.iter().map(|&c| f64::from(c)).sum();
                    let denom = total + laplace_alpha * x_card as f64;
                    support.push(total);
                    probs.extend(row.iter().map(|&c| (f64::from(c) + laplace_alpha) / denom));
                }
                Ok(EnvTable { x_card, keys: counts.keys, support, probs })
            })
            .collect()
    }
}
