//! End-to-end behaviour of discovery on simulated data.

mod common;

use glide_core::augment::{
    make_environments, AugmentConfig, EnvFamily, Environment, EnvironmentLayout, EnvironmentSet,
};
use glide_core::dataset::{simulate_categorical, CategoricalModel, NodeCpt};
use glide_core::eval::shd;
use glide_core::graph::{fixtures, generate_dag, Dag, GenConfig, GraphKind};
use glide_core::invariance::{invariance_score, select_parents, DataEnvironments, NodeFlag, SelectionRule, TieBreak};
use glide_core::{glide, glide_exact, GlideConfig};

#[test]
fn chain_is_recovered_exactly() {
    let truth = fixtures::chain(3);
    let mut exact = 0;
    for seed in 0..10u64 {
        let data = common::faithful_model(&truth, 2, 3, 0.3, seed).sample(100_000, seed);
        let out = glide(&data, &GlideConfig { seed, ..GlideConfig::default() }).unwrap();
        if shd(&out.dag, &truth).unwrap() == 0 {
            exact += 1;
        }
    }
    assert!(exact >= 9, "chain recovered in {exact}/10 seeds");
}

/// A -> X <- B with X a noisy OR of its parents.
fn collider() -> (Dag, CategoricalModel) {
    let dag = Dag::from_edges(vec!["A".into(), "B".into(), "X".into()], &[("A", "X"), ("B", "X")]).unwrap();
    let cpts = vec![
        NodeCpt { parents: vec![], table: vec![vec![0.6, 0.4]] },
        NodeCpt { parents: vec![], table: vec![vec![0.3, 0.7]] },
        NodeCpt { parents: vec![0, 1], table: vec![vec![0.9, 0.1], vec![0.3, 0.7], vec![0.2, 0.8], vec![0.05, 0.95]] },
    ];
    let model = CategoricalModel::new(&dag, vec![2, 2, 2], cpts).unwrap();
    (dag, model)
}

#[test]
fn collider_needs_both_parents() {
    let (_, model) = collider();
    let data = model.sample(100_000, 11);
    let cfg = AugmentConfig { m: 30, seed: 3, layout: EnvironmentLayout::Joint, ..AugmentConfig::default() };
    let set = make_environments(&data, &[0, 1], &cfg).unwrap();
    let envs = DataEnvironments::new(&data, &set);
    let both = invariance_score(&envs, &[0], 2, &[0, 1], 1.0).unwrap().variance;
    let only_a = invariance_score(&envs, &[0], 2, &[0], 1.0).unwrap().variance;
    let only_b = invariance_score(&envs, &[0], 2, &[1], 1.0).unwrap().variance;
    assert!(only_a > both && only_b > both, "{only_a} {only_b} {both}");

    let rule = SelectionRule { epsilon: 1e-3, tie_tolerance: 1e-12, tie_break: TieBreak::Smaller, laplace_alpha: 1.0 };
    let sel = select_parents(&envs, &[0], 2, &[vec![0, 1]], &rule).unwrap();
    assert_eq!(sel.parents, vec![0, 1]);
    assert!(!sel.below_confidence);
}

#[test]
fn collider_is_exact_under_the_oracle() {
    let (dag, model) = collider();
    let out = glide_exact(&model, &dag, &GlideConfig::default()).unwrap();
    assert_eq!(out.parents[2], vec![0, 1]);
    assert_eq!(shd(&out.dag, &dag).unwrap(), 0);
}

#[test]
fn identical_environments_score_zero_for_every_candidate() {
    let g = generate_dag(&GenConfig::new(GraphKind::ErdosRenyi, 5, 6, 2)).unwrap();
    let (data, _) = simulate_categorical(&g, 5_000, 2, 4, 2).unwrap();
    let all: Vec<u32> = (0..data.n_rows() as u32).collect();
    let env = Environment { rows: all, priors: Vec::new(), achieved_gamma: Vec::new() };
    let set = EnvironmentSet {
        layout: EnvironmentLayout::Joint,
        families: vec![EnvFamily { basis_vars: vec![0], environments: vec![env; 7] }],
        skipped: Vec::new(),
        warnings: Vec::new(),
    };
    let envs = DataEnvironments::new(&data, &set);
    for x in 0..5 {
        let others: Vec<usize> = (0..5).filter(|&v| v != x).collect();
        for mask in 0..(1u32 << others.len()) {
            let z: Vec<usize> =
                others.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect();
            let s = invariance_score(&envs, &[0], x, &z, 1.0).unwrap();
            assert!(s.variance <= 1e-12, "x {x} z {z:?}: {}", s.variance);
        }
    }
}

#[test]
fn output_is_always_acyclic_and_repairs_are_reported() {
    let mut repaired_runs = 0;
    for seed in 0..12u64 {
        let g = generate_dag(&GenConfig::new(GraphKind::ErdosRenyi, 8, 12, seed)).unwrap();
        let (data, _) = simulate_categorical(&g, 3_000, 2, 3, seed).unwrap();
        let cfg = GlideConfig { seed, m: 10, pool: 500, min_rows: 50, ..GlideConfig::default() };
        let out = glide(&data, &cfg).unwrap();
        assert_eq!(out.dag.topological_order().map(|o| o.len()), Some(8));
        let flagged = out.report.nodes.iter().filter(|n| n.flags.contains(&NodeFlag::CycleRepaired)).count();
        assert!(out.report.repairs.len() >= flagged);
        assert_eq!(out.report.edges.len(), out.dag.edge_count());
        for r in &out.report.repairs {
            let (p, c) = (out.dag.index_of(&r.parent).unwrap(), out.dag.index_of(&r.child).unwrap());
            assert!(!out.dag.has_edge(p, c));
        }
        if !out.report.repairs.is_empty() {
            repaired_runs += 1;
        }
    }
    println!("{repaired_runs}/12 runs needed cycle repair");
}

#[test]
fn runs_are_deterministic() {
    let g = generate_dag(&GenConfig::new(GraphKind::ErdosRenyi, 7, 8, 4)).unwrap();
    let (data, _) = simulate_categorical(&g, 20_000, 2, 3, 4).unwrap();
    let cfg = GlideConfig { seed: 9, ..GlideConfig::default() };
    let a = glide(&data, &cfg).unwrap();
    let b = glide(&data, &cfg).unwrap();
    assert_eq!(a.parents, b.parents);
    assert_eq!(a.report.nodes, b.report.nodes);
}

#[test]
fn report_serializes_with_per_node_detail() {
    let (data, _) = simulate_categorical(&fixtures::asia(), 20_000, 2, 2, 1).unwrap();
    let out = glide(&data, &GlideConfig::default()).unwrap();
    let json: serde_json::Value = serde_json::to_value(&out.report).unwrap();
    assert_eq!(json["nodes"].as_array().unwrap().len(), 8);
    for key in ["blanket", "core", "candidates", "winner", "flags"] {
        assert!(json["nodes"][0].get(key).is_some(), "missing {key}");
    }
    assert!(json["timings"]["selection"].is_number());
    assert_eq!(json["config"]["m"], 30);
}
