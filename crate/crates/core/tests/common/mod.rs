use glide_core::dataset::CategoricalModel;
use glide_core::graph::Dag;

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum::<f64>()
}

/// Weakest edge strength: for each edge `p -> x`, the best configuration of the
/// other parents of `x` at which every pair of values of `p` moves the row of `x`
/// by at least this much in total variation.
pub fn edge_margin(model: &CategoricalModel) -> f64 {
    let mut weakest = f64::INFINITY;
    for cpt in &model.cpts {
        let cards: Vec<usize> = cpt.parents.iter().map(|&p| model.cards[p]).collect();
        let row = |values: &[usize]| values.iter().zip(&cards).fold(0, |acc, (&v, &c)| acc * c + v);
        for i in 0..cards.len() {
            let mut best = 0.0f64;
            for flat in 0..cpt.table.len() / cards[i] {
                // Decode the other parents' values, leaving slot `i` free.
                let mut values = vec![0; cards.len()];
                let mut rest = flat;
                for j in (0..cards.len()).rev().filter(|&j| j != i) {
                    values[j] = rest % cards[j];
                    rest /= cards[j];
                }
                let mut worst = f64::INFINITY;
                for a in 0..cards[i] {
                    for b in a + 1..cards[i] {
                        values[i] = a;
                        let ra = row(&values);
                        values[i] = b;
                        worst = worst.min(tv(&cpt.table[ra], &cpt.table[row(&values)]));
                    }
                }
                best = best.max(worst);
            }
            weakest = weakest.min(best);
        }
    }
    weakest
}

/// First Dirichlet model, scanning seeds upward from `seed`, whose every edge
/// has strength at least `margin`. Dirichlet(1) draws alone often produce
/// edges too weak to detect.
pub fn faithful_model(dag: &Dag, min_cats: usize, max_cats: usize, margin: f64, seed: u64) -> CategoricalModel {
    (0..100_000)
        .map(|k| CategoricalModel::random(dag, min_cats, max_cats, seed.wrapping_mul(100_003).wrapping_add(k)).unwrap())
        .find(|m| edge_margin(m) >= margin)
        .expect("a model with the requested margin")
}
