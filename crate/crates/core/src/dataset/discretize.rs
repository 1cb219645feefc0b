//! Equal-width binning of continuous columns.

use super::{ContinuousTable, Dataset, DatasetError};

/// Per-column bin ranges fitted once and reused for every row subset.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretizer {
    pub bins: usize,
    /// `(min, max)` per column.
    pub ranges: Vec<(f64, f64)>,
}

impl Discretizer {
    pub fn fit(table: &ContinuousTable, bins: usize) -> Result<Self, DatasetError> {
        if bins < 2 {
            return Err(DatasetError::InvalidParameter(format!("bins must be at least 2, got {bins}")));
        }
        let mut ranges = Vec::with_capacity(table.n_vars());
        for (j, col) in table.columns.iter().enumerate() {
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(DatasetError::NonFiniteValue { column: table.names[j].clone(), row });
            }
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            ranges.push((lo, hi));
        }
        Ok(Discretizer { bins, ranges })
    }

    /// Bin index of `v` in column `j`; values outside the fitted range clamp.
    pub fn code(&self, j: usize, v: f64) -> u32 {
        let (lo, hi) = self.ranges[j];
        if hi <= lo {
            return 0;
        }
        let k = ((v - lo) / (hi - lo) * self.bins as f64).floor();
        k.clamp(0.0, (self.bins - 1) as f64) as u32
    }

    pub fn cardinality(&self, j: usize) -> usize {
        let (lo, hi) = self.ranges[j];
        if hi <= lo {
            1
        } else {
            self.bins
        }
    }

    pub fn apply(&self, table: &ContinuousTable) -> Result<Dataset, DatasetError> {
        if table.n_vars() != self.ranges.len() {
            return Err(DatasetError::Shape("table width differs from the fitted discretizer".into()));
        }
        let mut columns = Vec::with_capacity(table.n_vars());
        for (j, col) in table.columns.iter().enumerate() {
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(DatasetError::NonFiniteValue { column: table.names[j].clone(), row });
            }
            columns.push(col.iter().map(|&v| self.code(j, v)).collect());
        }
        let cards = (0..table.n_vars()).map(|j| self.cardinality(j)).collect();
        Dataset::with_cardinalities(table.names.clone(), columns, cards)
    }
}

/// Equal-width binning over each column's `[min, max]`; constant columns become
/// a single category.
pub fn discretize(table: &ContinuousTable, bins: usize) -> Result<Dataset, DatasetError> {
    Discretizer::fit(table, bins)?.apply(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(col: Vec<f64>) -> ContinuousTable {
        ContinuousTable::new(vec!["v".into()], vec![col]).unwrap()
    }

    #[test]
    fn exact_quartering() {
        let ds = discretize(&one(vec![0.0, 1.0, 2.0, 3.0]), 4).unwrap();
        assert_eq!(ds.column(0), &[0, 1, 2, 3]);
    }

    #[test]
    fn constant_column() {
        let ds = discretize(&one(vec![5.0, 5.0, 5.0]), 4).unwrap();
        assert_eq!(ds.column(0), &[0, 0, 0]);
        assert_eq!(ds.cardinality(0), 1);
    }

    #[test]
    fn two_bins_split_at_midpoint() {
        let ds = discretize(&one(vec![0.0, 0.1, 0.9, 1.0]), 2).unwrap();
        assert_eq!(ds.column(0), &[0, 0, 1, 1]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(discretize(&one(vec![0.0, f64::NAN]), 4), Err(DatasetError::NonFiniteValue { .. })));
        assert!(matches!(discretize(&one(vec![0.0, 1.0]), 1), Err(DatasetError::InvalidParameter(_))));
    }

    proptest::proptest! {
        #[test]
        fn binning_is_monotone(mut col in proptest::collection::vec(-1e6f64..1e6, 2..60), bins in 2usize..9) {
            let ds = discretize(&one(col.clone()), bins).unwrap();
            let mut pairs: Vec<(f64, u32)> = col.drain(..).zip(ds.column(0).iter().copied()).collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            proptest::prop_assert!(pairs.windows(2).all(|w| w[0].1 <= w[1].1));
            proptest::prop_assert!(ds.column(0).iter().all(|&c| (c as usize) < ds.cardinality(0)));
        }
    }
}
