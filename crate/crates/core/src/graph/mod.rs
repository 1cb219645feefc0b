//! Graph structures: DAGs, bidirectional graphs, generators and file IO.

mod bigraph;
mod dag;
mod generate;
mod io;

pub use bigraph::{degeneracy, BiGraph};
pub use dag::Dag;
pub use generate::{generate_dag, GenConfig, GraphKind};
pub use io::{load_edge_list, parse_edge_list, save_edge_list, write_edge_list};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("graph contains a directed cycle")]
    CycleDetected,
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node name `{0}`")]
    DuplicateNode(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("node index {0} out of range")]
    NodeOutOfRange(usize),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("cannot place {requested} edges, at most {max} are feasible")]
    InfeasibleEdgeCount { requested: usize, max: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

/// Small named graphs used across tests and examples.
pub mod fixtures {
    use super::Dag;

    /// The eight-node lung-cancer network with two parentless nodes.
    pub fn asia() -> Dag {
        let names = ["asia", "tub", "smoke", "lung", "bronc", "either", "xray", "dysp"];
        let edges = [
            ("asia", "tub"),
            ("smoke", "lung"),
            ("smoke", "bronc"),
            ("tub", "either"),
            ("lung", "either"),
            ("either", "xray"),
            ("either", "dysp"),
            ("bronc", "dysp"),
        ];
        Dag::from_edges(names.iter().map(|s| s.to_string()).collect(), &edges).expect("asia is a DAG")
    }

    /// Chain `X0 -> X1 -> ... -> X{d-1}`.
    pub fn chain(d: usize) -> Dag {
        let edges: Vec<(usize, usize)> = (1..d).map(|i| (i - 1, i)).collect();
        Dag::with_default_names(d, &edges).expect("chain is a DAG")
    }
}
