//! Observational datasets: categorical tables, simulation, discretization and
//! empirical distribution estimates.

mod discretize;
mod estimate;
mod io;
mod simulate;
mod table;

pub use discretize::{discretize, Discretizer};
pub(crate) use estimate::radix;
pub use estimate::{count_table, empirical_conditional, empirical_marginal, CountTable, Cpt};
pub use io::{read_categorical_csv, read_continuous_csv, write_categorical_csv, write_continuous_csv};
pub use simulate::{
    simulate_categorical, simulate_linear_gaussian, simulate_nonlinear, CategoricalModel, LinearGaussianModel, NodeCpt,
    NonlinearModel,
};
pub use table::{ContinuousTable, Dataset, View};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("non-finite value in column `{column}` at row {row}")]
    NonFiniteValue { column: String, row: usize },
    #[error("code {code} in column `{column}` exceeds cardinality {cardinality}")]
    CodeOutOfRange { column: String, code: u32, cardinality: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("conditioning configuration space overflows 64-bit keys")]
    ConfigurationOverflow,
    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<u64>, message: String },
    #[error("io error: {0}")]
    Io(String),
}
