//! Picks `m` representative priors from a pool with k-means++ and Lloyd iterations.

use rand::Rng as _;

use super::{gamma_of, AugmentError, Prior};
use crate::rng;

const MAX_ITERS: usize = 100;
const SHIFT_TOL: f64 = 1e-6;

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, cen) in centroids.iter().enumerate() {
        let d = dist2(p, cen);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Returns `m` centroids (renormalized onto the simplex) with `gamma`
/// recomputed against `reference`.
pub fn select_representative(
    priors: &[Prior],
    m: usize,
    reference: &[f64],
    seed: u64,
) -> Result<Vec<Prior>, AugmentError> {
    if m == 0 || m > priors.len() {
        return Err(AugmentError::InvalidParameter(format!(
            "cannot pick {m} representatives from a pool of {}",
            priors.len()
        )));
    }
    let variable = priors[0].variable;
    let points: Vec<&[f64]> = priors.iter().map(|p| p.probs.as_slice()).collect();
    let mut rng = rng::stream(seed, "kmeans", variable as u64);

    let mut centroids: Vec<Vec<f64>> = vec![points[rng.random_range(0..points.len())].to_vec()];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < m {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    chosen = i;
                    break;
                }
                u -= w;
            }
            chosen
        } else {
            rng.random_range(0..points.len())
        };
        let c = points[pick].to_vec();
        for (slot, p) in d2.iter_mut().zip(&points) {
            *slot = slot.min(dist2(p, &c));
        }
        centroids.push(c);
    }

    let r = reference.len();
    let mut assign = vec![0usize; points.len()];
    for _ in 0..MAX_ITERS {
        let mut sums = vec![vec![0.0; r]; m];
        let mut sizes = vec![0usize; m];
        let mut err = vec![0.0; points.len()];
        for (i, p) in points.iter().enumerate() {
            let (c, d) = nearest(p, &centroids);
            assign[i] = c;
            err[i] = d;
            sizes[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p.iter()) {
                *s += v;
            }
        }
        let mut shift: f64 = 0.0;
        for c in 0..m {
            let next: Vec<f64> = if sizes[c] == 0 {
                // Empty cluster: reseed at the point worst served by its centroid.
                let far = (0..points.len())
                    .max_by(|&a, &b| err[a].total_cmp(&err[b]).then(b.cmp(&a)))
                    .expect("pool is non-empty");
                err[far] = 0.0;
                points[far].to_vec()
            } else {
                sums[c].iter().map(|s| s / sizes[c] as f64).collect()
            };
            shift = shift.max(dist2(&next, &centroids[c]).sqrt());
            centroids[c] = next;
        }
        if shift < SHIFT_TOL {
            break;
        }
    }

    centroids
        .into_iter()
        .map(|c| {
            let s: f64 = c.iter().sum();
            let probs: Vec<f64> = c.iter().map(|v| v / s).collect();
            let gamma = gamma_of(reference, &probs)?;
            Ok(Prior { variable, probs, gamma })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::sample_priors;

    fn prior(probs: Vec<f64>, reference: &[f64]) -> Prior {
        Prior::new(0, probs, reference).unwrap()
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let p = [0.5, 0.5];
        let pool: Vec<Prior> = [[0.6, 0.4], [0.4, 0.6], [0.7, 0.3]].iter().map(|v| prior(v.to_vec(), &p)).collect();
        let out = select_representative(&pool, 1, &p, 1).unwrap();
        assert!((out[0].probs[0] - 17.0 / 30.0).abs() < 1e-12);
        assert!((out[0].probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_count_returns_the_pool() {
        let p = [0.2, 0.3, 0.5];
        let pool = sample_priors(0, &p, 0.5, 12, 4).unwrap();
        let out = select_representative(&pool, 12, &p, 9).unwrap();
        let mut got: Vec<Vec<f64>> = out.iter().map(|q| q.probs.clone()).collect();
        let mut want: Vec<Vec<f64>> = pool.iter().map(|q| q.probs.clone()).collect();
        let key = |v: &Vec<f64>| v.iter().map(|x| (x * 1e9).round() as i64).collect::<Vec<_>>();
        got.sort_by_key(key);
        want.sort_by_key(key);
        for (a, b) in got.iter().zip(&want) {
            assert!(dist2(a, b) < 1e-20);
        }
    }

    #[test]
    fn separated_blobs_are_recovered() {
        let p = [0.5, 0.5];
        let mut pool = Vec::new();
        for i in 0..50 {
            let e = i as f64 * 1e-4;
            pool.push(prior(vec![0.8 + e, 0.2 - e], &p));
            pool.push(prior(vec![0.2 + e, 0.8 - e], &p));
        }
        let out = select_representative(&pool, 2, &p, 5).unwrap();
        let mut firsts: Vec<f64> = out.iter().map(|q| q.probs[0]).collect();
        firsts.sort_by(f64::total_cmp);
        let mean_offset = 49.0 * 1e-4 / 2.0;
        assert!((firsts[0] - (0.2 + mean_offset)).abs() < 1e-9);
        assert!((firsts[1] - (0.8 + mean_offset)).abs() < 1e-9);
    }

    #[test]
    fn representatives_stay_in_region() {
        for (p, g) in [(vec![0.5, 0.5], 0.5), (vec![0.1, 0.3, 0.6], 0.3), (vec![0.25; 4], 0.8)] {
            let pool = sample_priors(0, &p, g, 10_000, 2).unwrap();
            let out = select_representative(&pool, 30, &p, 2).unwrap();
            assert_eq!(out.len(), 30);
            assert!(out.iter().all(|q| q.gamma >= g - 1e-9));
        }
    }

    #[test]
    fn too_many_representatives() {
        let p = [0.5, 0.5];
        let pool = sample_priors(0, &p, 0.5, 3, 0).unwrap();
        assert!(select_representative(&pool, 4, &p, 0).is_err());
        assert!(select_representative(&pool, 0, &p, 0).is_err());
    }
}
