use super::DatasetError;

/// Column-oriented table of categorical codes.
///
/// Every code in column `j` is below `cardinalities[j]`; all columns share
/// the same length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<u32>>,
    cards: Vec<usize>,
    n: usize,
}

impl Dataset {
    /// Builds a dataset whose cardinalities are `max code + 1` per column.
    pub fn new(names: Vec<String>, columns: Vec<Vec<u32>>) -> Result<Self, DatasetError> {
        let cards = columns.iter().map(|c| c.iter().max().map_or(1, |&m| m as usize + 1)).collect();
        Self::with_cardinalities(names, columns, cards)
    }

    pub fn with_cardinalities(
        names: Vec<String>,
        columns: Vec<Vec<u32>>,
        cards: Vec<usize>,
    ) -> Result<Self, DatasetError> {
        if names.len() != columns.len() || cards.len() != columns.len() {
            return Err(DatasetError::Shape(format!(
                "{} names, {} columns, {} cardinalities",
                names.len(),
                columns.len(),
                cards.len()
            )));
        }
        let n = columns.first().map_or(0, Vec::len);
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(DatasetError::Shape(format!("column `{}` has {} rows, expected {n}", names[j], col.len())));
            }
            if let Some(&bad) = col.iter().find(|&&v| v as usize >= cards[j]) {
                return Err(DatasetError::CodeOutOfRange {
                    column: names[j].clone(),
                    code: bad,
                    cardinality: cards[j],
                });
            }
        }
        Ok(Dataset { names, columns, cards, n })
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_vars(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, j: usize) -> &[u32] {
        &self.columns[j]
    }

    pub fn cardinality(&self, j: usize) -> usize {
        self.cards[j]
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cards
    }

    /// View over every row.
    pub fn view(&self) -> View<'_> {
        View { data: self, rows: None }
    }

    /// View over the given row indices; callers guarantee they are in range.
    pub fn subset<'a>(&'a self, rows: &'a [u32]) -> View<'a> {
        debug_assert!(rows.iter().all(|&r| (r as usize) < self.n));
        View { data: self, rows: Some(rows) }
    }

    /// Copies the selected rows into a standalone dataset with the same cardinalities.
    pub fn materialize(&self, rows: &[u32]) -> Dataset {
        let columns = self.columns.iter().map(|c| rows.iter().map(|&r| c[r as usize]).collect()).collect();
        Dataset { names: self.names.clone(), columns, cards: self.cards.clone(), n: rows.len() }
    }
}

/// Read-only row view of a [`Dataset`]; downsampled environments are views.
#[derive(Debug, Clone, Copy)]
pub struct View<'a> {
    data: &'a Dataset,
    rows: Option<&'a [u32]>,
}

impl<'a> View<'a> {
    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    pub fn len(&self) -> usize {
        self.rows.map_or(self.data.n, <[u32]>::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Explicit row indices, or `None` for the full dataset.
    pub fn row_indices(&self) -> Option<&'a [u32]> {
        self.rows
    }

    /// Calls `f` with each underlying row index.
    #[inline]
    pub fn for_each_row(&self, mut f: impl FnMut(usize)) {
        match self.rows {
            Some(rows) => rows.iter().for_each(|&r| f(r as usize)),
            None => (0..self.data.n).for_each(f),
        }
    }

    /// The viewed values of column `j`, in view order.
    pub fn values(&self, j: usize) -> Vec<u32> {
        let col = self.data.column(j);
        match self.rows {
            Some(rows) => rows.iter().map(|&r| col[r as usize]).collect(),
            None => col.to_vec(),
        }
    }
}

/// Column-oriented table of real values.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousTable {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl ContinuousTable {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self, DatasetError> {
        if names.len() != columns.len() {
            return Err(DatasetError::Shape(format!("{} names for {} columns", names.len(), columns.len())));
        }
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(DatasetError::Shape("columns differ in length".into()));
        }
        Ok(ContinuousTable { names, columns })
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn n_vars(&self) -> usize {
        self.columns.len()
    }
}
