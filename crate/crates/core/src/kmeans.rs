//! Lloyd's algorithm with D^2-weighted seeding, restarts, and empty-cluster
//! recovery.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// K-means fitting parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Convergence threshold on the maximum centroid shift per iteration.
    pub tol: f64,
    /// Independent restarts; the fit with the lowest inertia wins.
    pub n_restarts: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            k: 5,
            seed: 0,
            max_iter: 300,
            tol: 1e-6,
            n_restarts: 10,
        }
    }
}

/// Result of one k-means fit.
#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub centroids: Vec<Vec<f64>>,
    /// Cluster index per input row (0-based), consistent with the final
    /// centroids: re-assigning any training row returns its recorded label.
    pub labels: Vec<usize>,
    /// Within-cluster sum of squares at the final state.
    pub inertia: f64,
    pub n_iter: usize,
    /// Inertia after each assignment pass of the winning restart;
    /// non-increasing by construction.
    pub inertia_history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid index; ties go to the lowest index.
pub fn nearest_centroid(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn assign_all(rows: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut labels = vec![0usize; rows.len()];
    let mut inertia = 0.0;
    for (i, row) in rows.iter().enumerate() {
        let c = nearest_centroid(row, centroids);
        labels[i] = c;
        inertia += sq_dist(row, &centroids[c]);
    }
    (labels, inertia)
}

/// D^2-weighted seeding: the first centroid is drawn uniformly, each later
/// one with probability proportional to its squared distance from the
/// nearest centroid chosen so far.
fn seed_centroids(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(rows[rng.gen_range(0..n)].clone());
    let mut min_d2: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = min_d2.iter().sum();
        let idx = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in min_d2.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // All remaining mass is zero (duplicate points); pick uniformly.
            rng.gen_range(0..n)
        };
        let c = rows[idx].clone();
        for (i, row) in rows.iter().enumerate() {
            let d = sq_dist(row, &c);
            if d < min_d2[i] {
                min_d2[i] = d;
            }
        }
        centroids.push(c);
    }
    centroids
}

fn lloyd_once(
    rows: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> KMeansFit {
    let dim = rows[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(rows, k, &mut rng);
    let mut history = Vec::new();
    let mut labels = vec![0usize; rows.len()];
    let mut n_iter = 0;

    for iter in 0..max_iter {
        n_iter = iter + 1;
        let (new_labels, inertia) = assign_all(rows, &centroids);
        if let Some(&prev) = history.last() {
            debug_assert!(inertia <= prev + 1e-9, "inertia increased: {prev} -> {inertia}");
        }
        history.push(inertia);
        labels = new_labels;

        // Mean update.
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (row, &l) in rows.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(row) {
                *s += v;
            }
        }
        let mut new_centroids = Vec::with_capacity(k);
        for c in 0..k {
            if counts[c] > 0 {
                new_centroids.push(sums[c].iter().map(|s| s / counts[c] as f64).collect());
            } else {
                new_centroids.push(centroids[c].clone());
            }
        }

        // Re-seed empty clusters at the points currently farthest from their
        // assigned centroid; assignments only improve, so inertia stays
        // monotone.
        let mut taken: Vec<usize> = Vec::new();
        for c in 0..k {
            if counts[c] == 0 {
                let mut far_idx = 0;
                let mut far_d = -1.0;
                for (i, row) in rows.iter().enumerate() {
                    if taken.contains(&i) {
                        continue;
                    }
                    let d = sq_dist(row, &new_centroids[labels[i]]);
                    if d > far_d {
                        far_d = d;
                        far_idx = i;
                    }
                }
                new_centroids[c] = rows[far_idx].clone();
                taken.push(far_idx);
            }
        }

        let shift = centroids
            .iter()
            .zip(&new_centroids)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0f64, f64::max);
        centroids = new_centroids;
        if shift < tol {
            break;
        }
    }

    // Final assignment against the final centroids so recorded labels agree
    // with any later nearest-centroid query.
    let (final_labels, final_inertia) = assign_all(rows, &centroids);
    labels = final_labels;
    if history.last().map_or(true, |&last| final_inertia < last) {
        history.push(final_inertia);
    }

    KMeansFit {
        centroids,
        labels,
        inertia: final_inertia,
        n_iter,
        inertia_history: history,
    }
}

/// Fits k-means with restarts, keeping the lowest-inertia solution.
pub fn kmeans_fit(rows: &[Vec<f64>], cfg: &KMeansConfig) -> Result<KMeansFit> {
    if cfg.k == 0 {
        return Err(Error::TooFewSamples { rows: rows.len(), k: 0 });
    }
    if rows.len() < cfg.k {
        return Err(Error::TooFewSamples {
            rows: rows.len(),
            k: cfg.k,
        });
    }
    let mut seed_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let restarts = cfg.n_restarts.max(1);
    let mut best: Option<KMeansFit> = None;
    for _ in 0..restarts {
        let restart_seed: u64 = seed_rng.gen();
        let fit = lloyd_once(rows, cfg.k, restart_seed, cfg.max_iter.max(1), cfg.tol);
        if best.as_ref().map_or(true, |b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart ran"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn cfg(k: usize, seed: u64) -> KMeansConfig {
        KMeansConfig { k, seed, ..KMeansConfig::default() }
    }

    #[test]
    fn k1_centroid_is_mean_and_inertia_total_variance() {
        let rows = vec![
            vec![1.0, 2.0],
            vec![3.0, 4.0],
            vec![5.0, 0.0],
            vec![-1.0, 2.0],
        ];
        let fit = kmeans_fit(&rows, &cfg(1, 7)).unwrap();
        let n = rows.len() as f64;
        let mean: Vec<f64> = (0..2)
            .map(|d| rows.iter().map(|r| r[d]).sum::<f64>() / n)
            .collect();
        for (c, m) in fit.centroids[0].iter().zip(&mean) {
            assert!((c - m).abs() < 1e-9);
        }
        let total_ss: f64 = rows
            .iter()
            .map(|r| sq_dist(r, &mean))
            .sum();
        assert!((fit.inertia - total_ss).abs() < 1e-9);
    }

    #[test]
    fn k_equals_n_gives_zero_inertia() {
        let rows = vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![2.0, 0.0],
            vec![3.0, 3.0],
        ];
        let fit = kmeans_fit(&rows, &cfg(4, 3)).unwrap();
        assert!(fit.inertia < 1e-18);
    }

    #[test]
    fn too_few_samples() {
        let rows = vec![vec![0.0, 0.0]];
        assert!(matches!(
            kmeans_fit(&rows, &cfg(2, 0)),
            Err(Error::TooFewSamples { .. })
        ));
    }

    /// Exhaustive search over all 2-partitions of a tiny point set.
    fn best_two_partition_inertia(rows: &[Vec<f64>]) -> f64 {
        let n = rows.len();
        let dim = rows[0].len();
        let mut best = f64::INFINITY;
        for mask in 1..(1u32 << n) - 1 {
            let mut groups = vec![Vec::new(), Vec::new()];
            for (i, row) in rows.iter().enumerate() {
                groups[((mask >> i) & 1) as usize].push(row);
            }
            let mut inertia = 0.0;
            for g in &groups {
                let m: Vec<f64> = (0..dim)
                    .map(|d| g.iter().map(|r| r[d]).sum::<f64>() / g.len() as f64)
                    .collect();
                inertia += g.iter().map(|r| sq_dist(r, &m)).sum::<f64>();
            }
            best = best.min(inertia);
        }
        best
    }

    #[test]
    fn two_blob_recovery_matches_exhaustive_partition() {
        let mut hits = 0;
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let noise = Normal::new(0.0, 0.5).unwrap();
            let mut rows = Vec::new();
            for _ in 0..6 {
                rows.push(vec![noise.sample(&mut rng), noise.sample(&mut rng)]);
            }
            for _ in 0..6 {
                rows.push(vec![10.0 + noise.sample(&mut rng), 10.0 + noise.sample(&mut rng)]);
            }
            let fit = kmeans_fit(&rows, &cfg(2, seed)).unwrap();
            let optimal = best_two_partition_inertia(&rows);
            if (fit.inertia - optimal).abs() < 1e-9 {
                hits += 1;
            }
            // Blob means are far apart relative to spread: centroids must sit
            // within 3*sigma/sqrt(n) of the blob means.
            let tol = 3.0 * 0.5 / (6.0f64).sqrt();
            let mut found_low = false;
            let mut found_high = false;
            for c in &fit.centroids {
                if (c[0]).abs() < tol && (c[1]).abs() < tol {
                    found_low = true;
                }
                if (c[0] - 10.0).abs() < tol && (c[1] - 10.0).abs() < tol {
                    found_high = true;
                }
            }
            assert!(found_low && found_high, "seed {seed}: centroids {:?}", fit.centroids);
        }
        assert!(hits >= 19, "exhaustive-partition optimum hit only {hits}/20 times");
    }

    #[test]
    fn inertia_history_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|_| vec![rng.gen::<f64>() * 10.0, rng.gen::<f64>() * 10.0, rng.gen::<f64>()])
            .collect();
        let fit = kmeans_fit(&rows, &cfg(4, 5)).unwrap();
        for pair in fit.inertia_history.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9, "inertia must not increase: {pair:?}");
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let a = kmeans_fit(&rows, &cfg(3, 11)).unwrap();
        let b = kmeans_fit(&rows, &cfg(3, 11)).unwrap();
        assert_eq!(a.centroids, b.centroids);
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.inertia, b.inertia);
    }

    #[test]
    fn labels_match_final_centroid_assignment() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| vec![rng.gen::<f64>() * 4.0, rng.gen::<f64>() * 4.0])
            .collect();
        let fit = kmeans_fit(&rows, &cfg(5, 13)).unwrap();
        for (row, &label) in rows.iter().zip(&fit.labels) {
            assert_eq!(nearest_centroid(row, &fit.centroids), label);
        }
    }

    #[test]
    fn permuted_rows_recover_same_centroid_set() {
        // Well-separated blobs: every restart lands in the same optimum, so a
        // row permutation only relabels clusters.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let noise = Normal::new(0.0, 0.2).unwrap();
        let centers = [[0.0, 0.0], [8.0, 0.0], [0.0, 8.0]];
        let mut rows = Vec::new();
        for c in &centers {
            for _ in 0..10 {
                rows.push(vec![c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)]);
            }
        }
        let fit_a = kmeans_fit(&rows, &cfg(3, 17)).unwrap();
        let mut permuted = rows.clone();
        permuted.reverse();
        permuted.swap(0, 14);
        let fit_b = kmeans_fit(&permuted, &cfg(3, 17)).unwrap();

        // Optimal matching over all 3! centroid permutations.
        let perms: [[usize; 3]; 6] = [
            [0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0],
        ];
        let best_cost = perms
            .iter()
            .map(|perm| {
                fit_a
                    .centroids
                    .iter()
                    .enumerate()
                    .map(|(i, c)| sq_dist(c, &fit_b.centroids[perm[i]]).sqrt())
                    .fold(0.0f64, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        assert!(best_cost < 1e-5, "centroid sets differ beyond tol: {best_cost}");
    }
}
