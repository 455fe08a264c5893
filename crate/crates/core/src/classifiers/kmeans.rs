//! Lloyd's algorithm with k-means++ seeding, used to initialize mixtures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const MAX_ITERS: usize = 100;

/// Cluster `n = data.len() / dim` points into `k` centers. Runs to an
/// assignment fixpoint or 100 iterations; an emptied cluster is re-seeded
/// to the point farthest from its nearest center.
#[allow(clippy::needless_range_loop)]
pub fn kmeans(data: &[f64], dim: usize, k: usize, seed: u64) -> Result<Vec<f64>> {
    assert!(dim > 0 && data.len().is_multiple_of(dim), "flat row-major data");
    let n = data.len() / dim;
    if k == 0 || k > n {
        return Err(Error::ParamOutOfRange {
            what: "k",
            got: k.to_string(),
            allowed: "1..=n points",
        });
    }
    let point = |i: usize| &data[i * dim..(i + 1) * dim];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // k-means++ seeding
    let mut centers: Vec<f64> = Vec::with_capacity(k * dim);
    let first = rng.random_range(0..n);
    centers.extend_from_slice(point(first));
    let mut dist2: Vec<f64> = (0..n).map(|i| sq_dist(point(i), &centers[0..dim])).collect();
    while centers.len() < k * dim {
        let total: f64 = dist2.iter().sum();
        let next = if total <= 0.0 {
            // all remaining points coincide with a center
            rng.random_range(0..n)
        } else {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in dist2.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        };
        let start = centers.len();
        centers.extend_from_slice(point(next));
        for i in 0..n {
            let d = sq_dist(point(i), &centers[start..start + dim]);
            if d < dist2[i] {
                dist2[i] = d;
            }
        }
    }

    // Lloyd iterations
    let mut assignment = vec![usize::MAX; n];
    for _ in 0..MAX_ITERS {
        let mut changed = false;
        for i in 0..n {
            let mut best = (0, f64::INFINITY);
            for c in 0..k {
                let d = sq_dist(point(i), &centers[c * dim..(c + 1) * dim]);
                if d < best.1 {
                    best = (c, d);
                }
            }
            if assignment[i] != best.0 {
                assignment[i] = best.0;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut counts = vec![0usize; k];
        let mut sums = vec![0.0; k * dim];
        for i in 0..n {
            let c = assignment[i];
            counts[c] += 1;
            for (s, v) in sums[c * dim..(c + 1) * dim].iter_mut().zip(point(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // farthest point from its nearest center takes over
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = nearest_dist(point(a), &centers, k, dim);
                        let db = nearest_dist(point(b), &centers, k, dim);
                        da.total_cmp(&db)
                    })
                    .unwrap();
                centers[c * dim..(c + 1) * dim].copy_from_slice(point(far));
            } else {
                for (slot, s) in centers[c * dim..(c + 1) * dim].iter_mut().zip(&sums[c * dim..]) {
                    *slot = s / counts[c] as f64;
                }
            }
        }
    }
    Ok(centers)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

fn nearest_dist(p: &[f64], centers: &[f64], k: usize, dim: usize) -> f64 {
    (0..k)
        .map(|c| sq_dist(p, &centers[c * dim..(c + 1) * dim]))
        .fold(f64::INFINITY, f64::min)
}
