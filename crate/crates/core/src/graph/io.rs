//! Plain-text edge-list format.
//!
//! ```text
//! # nodes: A,B,C
//! A<TAB>B
//! B<TAB>C
//! ```
//!
//! Edges are written in `(parent index, child index)` order, so saving a
//! loaded file that was itself produced by [`write_edge_list`] reproduces
//! it byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use super::{Dag, GraphError};

const HEADER: &str = "# nodes:";

pub fn write_edge_list(g: &Dag) -> Result<String, GraphError> {
    for n in g.names() {
        if n.is_empty() || n.contains([',', '\t', '\n', '\r']) || n.trim() != n {
            return Err(GraphError::Parse(format!("node name `{n}` cannot be written to an edge list")));
        }
    }
    let mut out = format!("{HEADER} {}\n", g.names().join(","));
    for &(p, c) in g.edges() {
        writeln!(out, "{}\t{}", g.name(p), g.name(c)).expect("write to String");
    }
    Ok(out)
}

pub fn parse_edge_list(text: &str) -> Result<Dag, GraphError> {
    let mut lines = text.lines().enumerate();
    let names: Vec<String> = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => {
                let rest = l
                    .strip_prefix(HEADER)
                    .ok_or_else(|| GraphError::Parse("missing `# nodes:` header line".into()))?
                    .trim();
                break if rest.is_empty() {
                    Vec::new()
                } else {
                    rest.split(',').map(|s| s.trim().to_string()).collect()
                };
            }
            None => return Err(GraphError::Parse("empty graph file".into())),
        }
    };
    let mut edges = Vec::new();
    for (lineno, l) in lines {
        if l.trim().is_empty() || l.starts_with('#') {
            continue;
        }
        let mut parts = l.split('\t');
        match (parts.next(), parts.next(), parts.next()) {
            (Some(p), Some(c), None) => edges.push((p.trim().to_string(), c.trim().to_string())),
            _ => return Err(GraphError::Parse(format!("line {}: expected `parent<TAB>child`", lineno + 1))),
        }
    }
    Dag::from_edges(names, &edges)
}

pub fn load_edge_list(path: &Path) -> Result<Dag, GraphError> {
    let text = std::fs::read_to_string(path).map_err(|e| GraphError::Io(format!("{}: {e}", path.display())))?;
    parse_edge_list(&text)
}

pub fn save_edge_list(g: &Dag, path: &Path) -> Result<(), GraphError> {
    let text = write_edge_list(g)?;
    std::fs::write(path, text).map_err(|e| GraphError::Io(format!("{}: {e}", path.display())))
}
