//! Source priors inside the region `gamma >= gamma_o` and their boundary points.

use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::AugmentError;
use crate::rng;

/// A target distribution for one basis variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prior {
    pub variable: usize,
    pub probs: Vec<f64>,
    /// Inverse downsampling rate against the marginal the prior was built from.
    pub gamma: f64,
}

impl Prior {
    pub fn new(variable: usize, probs: Vec<f64>, reference: &[f64]) -> Result<Self, AugmentError> {
        let gamma = gamma_of(reference, &probs)?;
        Ok(Prior { variable, probs, gamma })
    }
}

/// `min_b p(b) / pi(b)` over categories with `pi(b) > 0`.
///
/// Not clamped: a prior that equals `p` gives exactly 1.
pub fn gamma_of(p: &[f64], pi: &[f64]) -> Result<f64, AugmentError> {
    if p.len() != pi.len() {
        return Err(AugmentError::LengthMismatch { expected: p.len(), found: pi.len() });
    }
    Ok(p.iter().zip(pi).filter(|(_, &t)| t > 0.0).map(|(&a, &t)| a / t).fold(f64::INFINITY, f64::min))
}

/// The `r` points where the region `gamma >= gamma_o` meets the simplex edges.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPriors {
    pub points: Vec<Vec<f64>>,
    /// Categories whose mixing weight went negative and was clamped to 0;
    /// their point is the point mass, which sits strictly inside the region.
    pub clamped: Vec<usize>,
}

/// `P(k) = a_k P + (1 - a_k) delta_k` with `a_k = (1 - q_k / gamma_o) / (1 - q_k)`.
pub fn boundary_priors(p: &[f64], gamma_o: f64) -> Result<BoundaryPriors, AugmentError> {
    if !(gamma_o > 0.0 && gamma_o < 1.0) {
        return Err(AugmentError::InvalidGamma(gamma_o));
    }
    let mut points = Vec::with_capacity(p.len());
    let mut clamped = Vec::new();
    for (k, &q) in p.iter().enumerate() {
        if q >= 1.0 - 1e-12 {
            return Err(AugmentError::DegenerateCategory(k));
        }
        let mut a = (1.0 - q / gamma_o) / (1.0 - q);
        if a < 0.0 {
            a = 0.0;
            clamped.push(k);
        }
        let point: Vec<f64> =
            p.iter().enumerate().map(|(b, &pb)| a * pb + if b == k { 1.0 - a } else { 0.0 }).collect();
        points.push(point);
    }
    Ok(BoundaryPriors { points, clamped })
}

/// Convex combination `sum_k w_k P(k)`.
pub fn mix(points: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let r = points.first().map_or(0, Vec::len);
    let mut out = vec![0.0; r];
    for (pt, &w) in points.iter().zip(weights) {
        for (o, &v) in out.iter_mut().zip(pt) {
            *o += w * v;
        }
    }
    out
}

/// Draws `count` priors as Dirichlet(1, ..., 1) mixtures of the boundary points.
pub fn sample_priors(
    variable: usize,
    p: &[f64],
    gamma_o: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<Prior>, AugmentError> {
    if count == 0 {
        return Err(AugmentError::InvalidParameter("prior pool must hold at least one sample".into()));
    }
    let boundary = boundary_priors(p, gamma_o)?;
    let mut rng = rng::stream(seed, "priors", variable as u64);
    let r = boundary.points.len();
    let mut weights = vec![0.0; r];
    (0..count)
        .map(|_| {
            for w in weights.iter_mut() {
                *w = Exp1.sample(&mut rng);
            }
            let s: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= s);
            Prior::new(variable, mix(&boundary.points, &weights), p)
        })
        .collect()
}
