//! Population-level environments of a known categorical model.
//!
//! Environment `i` of a family reweights the model's joint distribution by
//! `prod_b prior_i(b) / P(b)` over the family's basis variables, which is the
//! distribution prior-guided downsampling converges to. Tables are exact
//! conditionals of that reweighted joint, so scoring carries no sampling noise.

use std::collections::HashMap;

use super::{EnvTable, EnvironmentTables, InvarianceError};
use crate::augment::{plan_environments, AugmentConfig, EnvironmentPlan};
use crate::dataset::{CategoricalModel, DatasetError};

/// Largest joint state space enumerated.
pub const MAX_EXACT_STATES: usize = 1 << 22;

struct ExactFamily {
    basis_vars: Vec<usize>,
    /// Per state, the index of its basis configuration.
    config_of_state: Vec<u32>,
    /// `weights[i][c]` = reweighting factor of environment `i` on basis configuration `c`.
    weights: Vec<Vec<f64>>,
}

pub struct ExactEnvironments {
    cards: Vec<usize>,
    strides: Vec<usize>,
    joint: Vec<f64>,
    families: Vec<ExactFamily>,
    plan: EnvironmentPlan,
}

impl ExactEnvironments {
    pub fn new(model: &CategoricalModel, basis: &[usize], cfg: &AugmentConfig) -> Result<Self, InvarianceError> {
        let cards = model.cards.clone();
        let d = cards.len();
        let mut strides = vec![0usize; d];
        let mut states: usize = 1;
        for v in (0..d).rev() {
            strides[v] = states;
            states = states.checked_mul(cards[v]).filter(|&s| s <= MAX_EXACT_STATES).ok_or(InvarianceError::Data(
                DatasetError::InvalidParameter(format!("joint state space exceeds {MAX_EXACT_STATES} states")),
            ))?;
        }
        let mut values = vec![0u32; d];
        let joint: Vec<f64> = (0..states)
            .map(|s| {
                for v in 0..d {
                    values[v] = ((s / strides[v]) % cards[v]) as u32;
                }
                model.joint_probability(&values)
            })
            .collect();

        let marginal = |b: usize| -> Vec<f64> {
            let mut p = vec![0.0; cards[b]];
            for (s, &pr) in joint.iter().enumerate() {
                p[(s / strides[b]) % cards[b]] += pr;
            }
            p
        };
        let marginals: Vec<(usize, Vec<f64>)> = basis.iter().map(|&b| (b, marginal(b))).collect();
        let plan = plan_environments(&marginals, &model.names, cfg)?;

        let mut families = Vec::with_capacity(plan.groups.len());
        for group in &plan.groups {
            let basis_vars: Vec<usize> = group.iter().map(|&k| plan.representatives[k].0).collect();
            let config_count: usize = basis_vars.iter().map(|&b| cards[b]).product();
            let config_of_state: Vec<u32> = (0..states)
                .map(|s| basis_vars.iter().fold(0usize, |acc, &b| acc * cards[b] + (s / strides[b]) % cards[b]) as u32)
                .collect();
            let weights: Vec<Vec<f64>> = (0..cfg.m)
                .map(|i| {
                    (0..config_count)
                        .map(|mut c| {
                            let mut w = 1.0;
                            for &k in group.iter().rev() {
                                let (b, ref priors) = plan.representatives[k];
                                let value = c % cards[b];
                                c /= cards[b];
                                let base = marginals.iter().find(|(v, _)| *v == b).expect("planned variable").1[value];
                                w *= if base > 0.0 { priors[i].probs[value] / base } else { 0.0 };
                            }
                            w
                        })
                        .collect()
                })
                .collect();
            families.push(ExactFamily { basis_vars, config_of_state, weights });
        }
        Ok(ExactEnvironments { cards, strides, joint, families, plan })
    }

    pub fn plan(&self) -> &EnvironmentPlan {
        &self.plan
    }

    pub fn environments_per_family(&self) -> usize {
        self.families.first().map_or(0, |f| f.weights.len())
    }
}

impl EnvironmentTables for ExactEnvironments {
    fn family_count(&self) -> usize {
        self.families.len()
    }

    fn family_basis(&self, f: usize) -> &[usize] {
        &self.families[f].basis_vars
    }

    /// Exact conditionals; `laplace_alpha` is ignored and support is probability mass.
    fn tables(&self, f: usize, x: usize, z: &[usize], _laplace_alpha: f64) -> Result<Vec<EnvTable>, InvarianceError> {
        let d = self.cards.len();
        if let Some(&bad) = std::iter::once(&x).chain(z).find(|&&v| v >= d) {
            return Err(InvarianceError::OutOfRange(bad));
        }
        let fam = &self.families[f];
        let x_card = self.cards[x];
        let z_count: usize = z.iter().map(|&v| self.cards[v]).product();
        let zkey =
            |s: usize| z.iter().fold(0usize, |acc, &v| acc * self.cards[v] + (s / self.strides[v]) % self.cards[v]);
        let xval = |s: usize| (s / self.strides[x]) % x_card;

        // Aggregate the joint onto (basis configuration, z configuration, x value).
        let mut cells: HashMap<(u32, usize), Vec<f64>> = HashMap::new();
        for (s, &p) in self.joint.iter().enumerate() {
            let cell = cells.entry((fam.config_of_state[s], zkey(s))).or_insert_with(|| vec![0.0; x_card]);
            cell[xval(s)] += p;
        }
        let mut cells: Vec<((u32, usize), Vec<f64>)> = cells.into_iter().collect();
        cells.sort_unstable_by_key(|(k, _)| *k);

        Ok(fam
            .weights
            .iter()
            .map(|w| {
                let mut mass = vec![0.0; z_count * x_card];
                for ((c, zk), probs) in &cells {
                    let wc = w[*c as usize];
                    for (v, p) in probs.iter().enumerate() {
                        mass[zk * x_card + v] += wc * p;
                    }
                }
                let mut keys = Vec::new();
                let mut support = Vec::new();
                let mut probs = Vec::new();
                for (k, row) in mass.chunks_exact(x_card).enumerate() {
                    let total: f64 = row.iter().sum();
                    if total > 0.0 {
                        keys.push(k as u64);
                        support.push(total);
                        probs.extend(row.iter().map(|p| p / total));
                    }
                }
                EnvTable { x_card, keys, support, probs }
            })
            .collect())
    }
}
