//! Structural comparison of a predicted graph against the true graph.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::graph::Dag;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("graphs have different node sets")]
    NodeSetMismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    /// `missing + extra + reversed`.
    pub shd: usize,
    /// Predicted edges whose pair is absent from the true skeleton, over predicted edges.
    pub spurious_rate: f64,
    /// Correctly oriented true edges over true edges.
    pub tpr: f64,
    pub missing: usize,
    pub extra: usize,
    pub reversed: usize,
    pub predicted_edges: usize,
    pub true_edges: usize,
}

/// Predicted edges translated into the truth's indices by node name.
fn aligned(pred: &Dag, truth: &Dag) -> Result<BTreeSet<(usize, usize)>, EvalError> {
    if pred.node_count() != truth.node_count() {
        return Err(EvalError::NodeSetMismatch);
    }
    let map: Vec<usize> =
        pred.names().iter().map(|n| truth.index_of(n).ok_or(EvalError::NodeSetMismatch)).collect::<Result<_, _>>()?;
    Ok(pred.edges().iter().map(|&(a, b)| (map[a], map[b])).collect())
}

/// Full breakdown; reversals count once.
pub fn compare(pred: &Dag, truth: &Dag) -> Result<MetricReport, EvalError> {
    let p = aligned(pred, truth)?;
    let t: BTreeSet<(usize, usize)> = truth.edges().iter().copied().collect();
    let mut missing = 0;
    let mut reversed = 0;
    let mut correct = 0;
    for &(a, b) in &t {
        if p.contains(&(a, b)) {
            correct += 1;
        } else if p.contains(&(b, a)) {
            reversed += 1;
        } else {
            missing += 1;
        }
    }
    let extra = p.iter().filter(|&&(a, b)| !t.contains(&(a, b)) && !t.contains(&(b, a))).count();
    let spurious_rate = if p.is_empty() { 0.0 } else { extra as f64 / p.len() as f64 };
    let tpr = if t.is_empty() { 1.0 } else { correct as f64 / t.len() as f64 };
    Ok(MetricReport {
        shd: missing + extra + reversed,
        spurious_rate,
        tpr,
        missing,
        extra,
        reversed,
        predicted_edges: p.len(),
        true_edges: t.len(),
    })
}

pub fn shd(pred: &Dag, truth: &Dag) -> Result<usize, EvalError> {
    Ok(compare(pred, truth)?.shd)
}

pub fn spurious_rate(pred: &Dag, truth: &Dag) -> Result<f64, EvalError> {
    Ok(compare(pred, truth)?.spurious_rate)
}

pub fn tpr(pred: &Dag, truth: &Dag) -> Result<f64, EvalError> {
    Ok(compare(pred, truth)?.tpr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_dag, GenConfig, GraphKind};

    fn g(d: usize, edges: &[(usize, usize)]) -> Dag {
        Dag::with_default_names(d, edges).unwrap()
    }

    #[test]
    fn shd_examples() {
        let truth = g(3, &[(0, 1), (1, 2)]);
        assert_eq!(shd(&truth, &truth).unwrap(), 0);
        assert_eq!(shd(&g(3, &[(1, 0), (1, 2)]), &truth).unwrap(), 1);
        assert_eq!(shd(&Dag::empty(3), &truth).unwrap(), 2);
    }

    #[test]
    fn spurious_examples() {
        let truth = g(4, &[(0, 1), (1, 2)]);
        assert_eq!(spurious_rate(&g(4, &[(1, 0)]), &truth).unwrap(), 0.0);
        assert_eq!(spurious_rate(&g(4, &[(2, 3)]), &truth).unwrap(), 1.0);
        assert_eq!(spurious_rate(&g(4, &[(0, 1), (2, 3)]), &truth).unwrap(), 0.5);
        assert_eq!(spurious_rate(&Dag::empty(4), &truth).unwrap(), 0.0);
    }

    #[test]
    fn tpr_examples() {
        let truth = g(3, &[(0, 1), (1, 2)]);
        assert_eq!(tpr(&truth, &truth).unwrap(), 1.0);
        assert_eq!(tpr(&g(3, &[(1, 0), (2, 1)]), &truth).unwrap(), 0.0);
        assert_eq!(tpr(&truth, &Dag::empty(3)).unwrap(), 1.0);
        // 14 of 17 directed edges recovered.
        let names: Vec<String> = (0..18).map(|i| format!("v{i}")).collect();
        let edges: Vec<(usize, usize)> = (0..17).map(|i| (i, i + 1)).collect();
        let t = Dag::from_index_edges(names.clone(), &edges).unwrap();
        let p = Dag::from_index_edges(names, &edges[..14]).unwrap();
        assert!((tpr(&p, &t).unwrap() - 14.0 / 17.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_nodes_are_rejected() {
        assert_eq!(shd(&Dag::empty(3), &Dag::empty(4)), Err(EvalError::NodeSetMismatch));
        let renamed = Dag::from_index_edges(vec!["a".into(), "b".into()], &[]).unwrap();
        assert_eq!(shd(&renamed, &Dag::empty(2)), Err(EvalError::NodeSetMismatch));
    }

    #[test]
    fn matching_is_by_name() {
        let truth = Dag::from_edges(vec!["a".into(), "b".into()], &[("a", "b")]).unwrap();
        let pred = Dag::from_edges(vec!["b".into(), "a".into()], &[("a", "b")]).unwrap();
        assert_eq!(shd(&pred, &truth).unwrap(), 0);
    }

    /// Brute-force reference: classify every unordered pair by its edge states.
    fn brute(pred: &Dag, truth: &Dag) -> (usize, f64, f64) {
        let d = truth.node_count();
        let (mut s, mut extra, mut correct) = (0, 0, 0);
        for a in 0..d {
            for b in a + 1..d {
                let t = (truth.has_edge(a, b), truth.has_edge(b, a));
                let p = (pred.has_edge(a, b), pred.has_edge(b, a));
                if t != p {
                    s += 1;
                }
                if (p.0 || p.1) && !(t.0 || t.1) {
                    extra += 1;
                }
                correct += usize::from(p.0 && t.0) + usize::from(p.1 && t.1);
            }
        }
        let sp = if pred.edge_count() == 0 { 0.0 } else { extra as f64 / pred.edge_count() as f64 };
        let tp = if truth.edge_count() == 0 { 1.0 } else { correct as f64 / truth.edge_count() as f64 };
        (s, sp, tp)
    }

    #[test]
    fn exhaustive_small_pairs_match_brute_force() {
        // Every DAG on 3 labelled nodes against every other.
        let pairs: Vec<(usize, usize)> = vec![(0, 1), (0, 2), (1, 2)];
        let mut dags = Vec::new();
        for code in 0..27u32 {
            let mut edges = Vec::new();
            let mut c = code;
            for &(a, b) in &pairs {
                match c % 3 {
                    1 => edges.push((a, b)),
                    2 => edges.push((b, a)),
                    _ => {}
                }
                c /= 3;
            }
            if let Ok(dag) = Dag::with_default_names(3, &edges) {
                dags.push(dag);
            }
        }
        assert_eq!(dags.len(), 25);
        for p in &dags {
            for t in &dags {
                let r = compare(p, t).unwrap();
                assert_eq!((r.shd, r.spurious_rate, r.tpr), brute(p, t));
                assert_eq!(r.shd, shd(t, p).unwrap());
            }
        }
    }

    #[test]
    fn random_pairs_match_brute_force() {
        for seed in 0..300u64 {
            let d = 2 + (seed % 4) as usize;
            let max = d * (d - 1) / 2;
            let a = generate_dag(&GenConfig::new(GraphKind::ErdosRenyi, d, seed as usize % (max + 1), seed)).unwrap();
            let b = generate_dag(&GenConfig::new(GraphKind::ErdosRenyi, d, (seed as usize / 3) % (max + 1), seed + 7))
                .unwrap();
            let c = generate_dag(&GenConfig::new(GraphKind::ErdosRenyi, d, (seed as usize / 5) % (max + 1), seed + 9))
                .unwrap();
            let r = compare(&a, &b).unwrap();
            assert_eq!((r.shd, r.spurious_rate, r.tpr), brute(&a, &b));
            assert!((r.spurious_rate * r.predicted_edges as f64 - r.extra as f64).abs() < 1e-9);
            assert!(shd(&a, &c).unwrap() <= shd(&a, &b).unwrap() + shd(&b, &c).unwrap());
        }
    }
}
