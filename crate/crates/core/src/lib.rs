pub mod augment;
pub mod basis;
pub mod blanket;
pub mod cli;
pub mod dataset;
pub mod eval;
pub mod graph;
pub mod indep;
pub mod invariance;
pub mod parents;
pub mod rng;

pub use invariance::{glide, glide_exact, GlideConfig, GlideError, GlideReport, GlideResult};
