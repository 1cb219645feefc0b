//! Statistical properties of the data-driven pipeline on small faithful networks.

mod common;

use glide_core::augment::make_environments;
use glide_core::basis::dependence_matrix;
use glide_core::dataset::Dataset;
use glide_core::graph::{generate_dag, Dag, GenConfig, GraphKind};
use glide_core::indep::IndepSource;
use glide_core::invariance::{invariance_score, relevant_families, select_parents, DataEnvironments};
use glide_core::parents::plausible_parent_sets;
use glide_core::{glide, GlideConfig};

const TRIALS: u64 = 50;

fn fixture(trial: u64) -> (Dag, Dataset) {
    let e = 3 + (trial % 7) as usize;
    let g = generate_dag(&GenConfig::new(GraphKind::ErdosRenyi, 6, e, 500 + trial)).unwrap();
    let data = common::faithful_model(&g, 2, 3, 0.3, 500 + trial).sample(100_000, 500 + trial);
    (g, data)
}

/// Non-source nodes with no parent-spouse overlap and no spouse in the basis,
/// whose environments shift every ancestral source and no descendant.
fn qualifies(g: &Dag, basis: &[usize], x: usize) -> bool {
    let pa = g.parents(x);
    let sp = g.spouses(x);
    let ancestors = g.ancestors(x);
    !pa.is_empty()
        && !sp.iter().any(|s| pa.contains(s) || basis.contains(s))
        && !g.descendants(x).iter().any(|v| basis.contains(v))
        && g.sources().iter().all(|s| !ancestors.contains(s) || basis.contains(s))
}

#[test]
fn true_parents_attain_minimum_variance() {
    let (mut trials, mut hits) = (0usize, 0usize);
    for trial in 0..TRIALS {
        let (g, data) = fixture(trial);
        let cfg = GlideConfig { seed: trial, ..GlideConfig::default() };
        let res = glide(&data, &cfg).unwrap();
        let src = IndepSource::data(&data, cfg.ci_alpha).unwrap().with_min_stratum(cfg.min_stratum);
        let phi = dependence_matrix(&src, 6).unwrap().matrix;
        let set = make_environments(&data, &res.basis.members, &cfg.augment()).unwrap();
        let envs = DataEnvironments::new(&data, &set);
        let candidates = plausible_parent_sets(&res.blankets, cfg.max_candidates).unwrap();
        for (x, cands) in candidates.iter().enumerate() {
            if res.basis.contains(x) || !qualifies(&g, &res.basis.members, x) {
                continue;
            }
            trials += 1;
            let families = relevant_families(&envs, &phi, x, &res.blankets.cores[x]);
            let sets: Vec<Vec<usize>> = cands.sets.iter().filter(|s| !s.is_empty()).cloned().collect();
            let sel = select_parents(&envs, &families, x, &sets, &cfg.rule()).unwrap();
            let truth = invariance_score(&envs, &families, x, g.parents(x), cfg.laplace_alpha).unwrap().variance;
            let best = sel.scores.iter().map(|s| s.variance).fold(f64::INFINITY, f64::min);
            if truth <= best + cfg.tie_tolerance {
                hits += 1;
            }
        }
    }
    let rate = hits as f64 / trials as f64;
    println!("true parents minimal in {hits}/{trials} node trials ({:.1}%)", rate * 100.0);
    assert!(trials > 0);
    assert!(rate >= 0.9, "true parents minimal in only {hits}/{trials} node trials");
}

#[test]
fn doubling_laplace_rarely_changes_parents() {
    let (mut nodes, mut changed) = (0usize, 0usize);
    for trial in 0..TRIALS {
        let (_, data) = fixture(trial);
        let cfg = GlideConfig { seed: trial, ..GlideConfig::default() };
        let a = glide(&data, &cfg).unwrap();
        let b = glide(&data, &GlideConfig { laplace_alpha: 2.0 * cfg.laplace_alpha, ..cfg }).unwrap();
        nodes += a.parents.len();
        changed += a.parents.iter().zip(&b.parents).filter(|(p, q)| p != q).count();
    }
    let rate = changed as f64 / nodes as f64;
    println!("parents changed at {changed}/{nodes} nodes ({:.1}%)", rate * 100.0);
    assert!(rate <= 0.05, "parents changed at {changed}/{nodes} nodes");
}
