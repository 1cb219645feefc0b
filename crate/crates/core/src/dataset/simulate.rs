//! Synthetic data under three data-generating models.

use rand::Rng as _;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{ContinuousTable, Dataset, DatasetError};
use crate::graph::Dag;
use crate::rng;

/// Linear structural equations with Gaussian noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearGaussianModel {
    pub names: Vec<String>,
    pub order: Vec<usize>,
    /// Incoming `(parent, weight)` pairs per node.
    pub weights: Vec<Vec<(usize, f64)>>,
    pub noise_sd: f64,
}

impl LinearGaussianModel {
    /// Draws `|w| ~ U[low, high]` with a random sign for every edge.
    pub fn random(
        dag: &Dag,
        weight_low: f64,
        weight_high: f64,
        noise_sd: f64,
        seed: u64,
    ) -> Result<Self, DatasetError> {
        if !(weight_low > 0.0 && weight_low <= weight_high) {
            return Err(DatasetError::InvalidParameter(format!(
                "weight range [{weight_low}, {weight_high}] must satisfy 0 < low <= high"
            )));
        }
        let mut rng = rng::stream(seed, "weights", 0);
        let weights = (0..dag.node_count())
            .map(|v| {
                dag.parents(v)
                    .iter()
                    .map(|&p| {
                        let mag = rng.random_range(weight_low..=weight_high);
                        (p, if rng.random::<bool>() { mag } else { -mag })
                    })
                    .collect()
            })
            .collect();
        Ok(Self::with_weights(dag, weights, noise_sd))
    }

    /// Fixed weights, for tests that need a known coefficient.
    pub fn with_weights(dag: &Dag, weights: Vec<Vec<(usize, f64)>>, noise_sd: f64) -> Self {
        LinearGaussianModel {
            names: dag.names().to_vec(),
            order: dag.topological_order().expect("validated DAG"),
            weights,
            noise_sd,
        }
    }

    pub fn sample(&self, n: usize, seed: u64) -> ContinuousTable {
        let mut rng = rng::stream(seed, "data", 0);
        let mut columns = vec![Vec::with_capacity(n); self.names.len()];
        let mut row = vec![0.0; self.names.len()];
        for _ in 0..n {
            for &v in &self.order {
                let mean: f64 = self.weights[v].iter().map(|&(p, w)| w * row[p]).sum();
                let eps: f64 = StandardNormal.sample(&mut rng);
                row[v] = mean + self.noise_sd * eps;
                columns[v].push(row[v]);
            }
        }
        ContinuousTable { names: self.names.clone(), columns }
    }
}

/// Ancestral simulation of a linear-Gaussian model with random weights.
pub fn simulate_linear_gaussian(
    dag: &Dag,
    n: usize,
    weight_low: f64,
    weight_high: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<ContinuousTable, DatasetError> {
    Ok(LinearGaussianModel::random(dag, weight_low, weight_high, noise_sd, seed)?.sample(n, seed))
}

/// `x = tanh(w . pa + b) + U[-1, 1]` per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearModel {
    pub names: Vec<String>,
    pub order: Vec<usize>,
    pub weights: Vec<Vec<(usize, f64)>>,
    pub bias: Vec<f64>,
}

impl NonlinearModel {
    pub fn random(dag: &Dag, seed: u64) -> Self {
        let mut rng = rng::stream(seed, "weights", 1);
        let mut weights = Vec::with_capacity(dag.node_count());
        let mut bias = Vec::with_capacity(dag.node_count());
        for v in 0..dag.node_count() {
            weights.push(
                dag.parents(v)
                    .iter()
                    .map(|&p| {
                        let mag = rng.random_range(0.5..=2.0);
                        (p, if rng.random::<bool>() { mag } else { -mag })
                    })
                    .collect(),
            );
            bias.push(if dag.parents(v).is_empty() { 0.0 } else { rng.random_range(-0.5..=0.5) });
        }
        NonlinearModel {
            names: dag.names().to_vec(),
            order: dag.topological_order().expect("validated DAG"),
            weights,
            bias,
        }
    }

    pub fn sample(&self, n: usize, seed: u64) -> ContinuousTable {
        let mut rng = rng::stream(seed, "data", 1);
        let mut columns = vec![Vec::with_capacity(n); self.names.len()];
        let mut row = vec![0.0; self.names.len()];
        for _ in 0..n {
            for &v in &self.order {
                let noise = rng.random_range(-1.0..=1.0);
                row[v] = if self.weights[v].is_empty() {
                    noise
                } else {
                    let a: f64 = self.weights[v].iter().map(|&(p, w)| w * row[p]).sum::<f64>() + self.bias[v];
                    a.tanh() + noise
                };
                columns[v].push(row[v]);
            }
        }
        ContinuousTable { names: self.names.clone(), columns }
    }
}

pub fn simulate_nonlinear(dag: &Dag, n: usize, seed: u64) -> ContinuousTable {
    NonlinearModel::random(dag, seed).sample(n, seed)
}

/// Conditional probability table of one node given its parents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeCpt {
    pub parents: Vec<usize>,
    /// One distribution per parent configuration; configuration index is
    /// mixed radix with the first parent most significant.
    pub table: Vec<Vec<f64>>,
}

/// Categorical Bayesian network: cardinalities plus one CPT per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalModel {
    pub names: Vec<String>,
    pub order: Vec<usize>,
    pub cards: Vec<usize>,
    pub cpts: Vec<NodeCpt>,
}

impl CategoricalModel {
    /// Cardinalities uniform in `[min_cats, max_cats]`, CPT rows ~ Dirichlet(1, ..., 1).
    pub fn random(dag: &Dag, min_cats: usize, max_cats: usize, seed: u64) -> Result<Self, DatasetError> {
        if min_cats < 2 || min_cats > max_cats {
            return Err(DatasetError::InvalidParameter(format!(
                "category range [{min_cats}, {max_cats}] must satisfy 2 <= min <= max"
            )));
        }
        let mut rng = rng::stream(seed, "cpt", 0);
        let cards: Vec<usize> = (0..dag.node_count()).map(|_| rng.random_range(min_cats..=max_cats)).collect();
        let cpts = (0..dag.node_count())
            .map(|v| {
                let parents = dag.parents(v).to_vec();
                let configs: usize = parents.iter().map(|&p| cards[p]).product();
                let table = (0..configs).map(|_| dirichlet_ones(cards[v], &mut rng)).collect();
                NodeCpt { parents, table }
            })
            .collect();
        Self::new(dag, cards, cpts)
    }

    /// Validates shapes and normalisation of explicitly supplied CPTs.
    pub fn new(dag: &Dag, cards: Vec<usize>, cpts: Vec<NodeCpt>) -> Result<Self, DatasetError> {
        if cards.len() != dag.node_count() || cpts.len() != dag.node_count() {
            return Err(DatasetError::Shape("model size does not match the graph".into()));
        }
        for (v, cpt) in cpts.iter().enumerate() {
            if cpt.parents != dag.parents(v) {
                return Err(DatasetError::Shape(format!("CPT parents of node {v} differ from the graph")));
            }
            let configs: usize = cpt.parents.iter().map(|&p| cards[p]).product();
            if cpt.table.len() != configs {
                return Err(DatasetError::Shape(format!("node {v} needs {configs} CPT rows")));
            }
            for row in &cpt.table {
                if row.len() != cards[v] || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 || row.iter().any(|&p| p < 0.0)
                {
                    return Err(DatasetError::InvalidParameter(format!("CPT row of node {v} is not a distribution")));
                }
            }
        }
        Ok(CategoricalModel {
            names: dag.names().to_vec(),
            order: dag.topological_order().expect("validated DAG"),
            cards,
            cpts,
        })
    }

    /// Row index into the CPT of `v` for a full assignment.
    pub fn config_index(&self, v: usize, values: &[u32]) -> usize {
        self.cpts[v].parents.iter().fold(0, |acc, &p| acc * self.cards[p] + values[p] as usize)
    }

    /// Exact forward sampling in topological order.
    pub fn sample(&self, n: usize, seed: u64) -> Dataset {
        let mut rng = rng::stream(seed, "data", 2);
        let d = self.cards.len();
        let cumulative: Vec<Vec<Vec<f64>>> = self
            .cpts
            .iter()
            .map(|c| {
                c.table
                    .iter()
                    .map(|row| {
                        row.iter()
                            .scan(0.0, |s, &p| {
                                *s += p;
                                Some(*s)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut columns = vec![Vec::with_capacity(n); d];
        let mut row = vec![0u32; d];
        for _ in 0..n {
            for &v in &self.order {
                let cdf = &cumulative[v][self.config_index(v, &row)];
                let u: f64 = rng.random();
                let k = cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1);
                row[v] = k as u32;
                columns[v].push(k as u32);
            }
        }
        Dataset::with_cardinalities(self.names.clone(), columns, self.cards.clone()).expect("codes within cardinality")
    }

    /// Exact joint probability of a full assignment.
    pub fn joint_probability(&self, values: &[u32]) -> f64 {
        (0..self.cards.len()).map(|v| self.cpts[v].table[self.config_index(v, values)][values[v] as usize]).product()
    }
}

fn dirichlet_ones(k: usize, rng: &mut rng::Rng) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / s).collect()
}

/// Random categorical network on `dag` and `n` forward samples from it.
pub fn simulate_categorical(
    dag: &Dag,
    n: usize,
    min_cats: usize,
    max_cats: usize,
    seed: u64,
) -> Result<(Dataset, CategoricalModel), DatasetError> {
    let model = CategoricalModel::random(dag, min_cats, max_cats, seed)?;
    Ok((model.sample(n, seed), model))
}
