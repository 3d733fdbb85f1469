//! Lloyd's k-means with distance-weighted (k-means++) seeding.
//!
//! Everything is deterministic given the seed: restart `r` uses
//! `seed + r`, assignment ties go to the lowest centroid index, and among
//! restarts the lowest within-cluster sum of squares wins (earliest restart
//! on ties). Empty clusters are re-seeded at the point currently farthest
//! from its own centroid, so every returned cluster is nonempty.

use alloc::vec;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::Labeling;

/// Outcome of a k-means run.
#[derive(Debug, Clone)]
pub struct KmeansResult {
    /// Cluster index per point, each in `0..k`; every cluster is nonempty.
    pub labels: Labeling,
    /// Cluster centers, one column per cluster.
    pub centroids: Matrix,
    /// Within-cluster sum of squared distances for the returned labeling.
    pub inertia: f64,
}

/// Clusters the columns of `points` into `k` groups.
///
/// Runs `restarts` independent seedings and keeps the labeling with the
/// smallest within-cluster sum of squares.
pub fn kmeans(
    points: &Matrix,
    k: usize,
    seed: u64,
    restarts: usize,
    max_iter: usize,
) -> Result<KmeansResult> {
    let n = points.cols();
    if points.rows() == 0 {
        return Err(Error::InvalidParameter("points must have at least one row".into()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(alloc::format!(
            "cluster count must be in 1..={n}, got {k}"
        )));
    }
    if restarts == 0 || max_iter == 0 {
        return Err(Error::InvalidParameter("restarts and max_iter must be positive".into()));
    }
    points.ensure_finite()?;

    let mut best: Option<KmeansResult> = None;
    for restart in 0..restarts {
        let run = lloyd_once(points, k, seed.wrapping_add(restart as u64), max_iter);
        if best.as_ref().map_or(true, |b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.unwrap())
}

fn lloyd_once(points: &Matrix, k: usize, seed: u64, max_iter: usize) -> KmeansResult {
    let n = points.cols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(points, k, &mut rng);
    let mut labels: Labeling = vec![usize::MAX; n];

    for _ in 0..max_iter {
        let (new_labels, dists) = assign(points, &centroids);
        let new_labels = fill_empty_clusters(new_labels, dists, k);
        if new_labels == labels {
            break;
        }
        labels = new_labels;
        centroids = cluster_means(points, &labels, k);
    }

    centroids = cluster_means(points, &labels, k);
    let mut inertia = 0.0;
    for (j, &label) in labels.iter().enumerate() {
        inertia += squared_distance(points.column(j), centroids.column(label));
    }
    KmeansResult { labels, centroids, inertia }
}

/// k-means++ seeding: first center uniform, the rest weighted by squared
/// distance to the nearest center already chosen.
fn seed_centroids(points: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let n = points.cols();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut weights: Vec<f64> = (0..n)
        .map(|j| squared_distance(points.column(j), points.column(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = weights.iter().sum();
        let next = if total > 0.0 {
            // Weights are finite and non-negative, so this cannot fail.
            WeightedIndex::new(weights.iter().copied()).unwrap().sample(rng)
        } else {
            rng.random_range(0..n)
        };
        chosen.push(next);
        for (j, w) in weights.iter_mut().enumerate() {
            let d = squared_distance(points.column(j), points.column(next));
            if d < *w {
                *w = d;
            }
        }
    }
    let mut centroids = Matrix::zeros(points.rows(), k);
    for (c, &j) in chosen.iter().enumerate() {
        centroids.column_mut(c).copy_from_slice(points.column(j));
    }
    centroids
}

/// Nearest-centroid assignment; ties go to the lower centroid index.
fn assign(points: &Matrix, centroids: &Matrix) -> (Labeling, Vec<f64>) {
    let n = points.cols();
    let mut labels = Vec::with_capacity(n);
    let mut dists = Vec::with_capacity(n);
    for j in 0..n {
        let mut best = 0;
        let mut best_d = squared_distance(points.column(j), centroids.column(0));
        for c in 1..centroids.cols() {
            let d = squared_distance(points.column(j), centroids.column(c));
            if d < best_d {
                best = c;
                best_d = d;
            }
        }
        labels.push(best);
        dists.push(best_d);
    }
    (labels, dists)
}

/// Hands every empty cluster the point farthest from its current centroid
/// (lowest point index on ties), so all `k` clusters come back nonempty.
fn fill_empty_clusters(mut labels: Labeling, mut dists: Vec<f64>, k: usize) -> Labeling {
    let mut sizes = vec![0usize; k];
    for &l in &labels {
        sizes[l] += 1;
    }
    for cluster in 0..k {
        if sizes[cluster] > 0 {
            continue;
        }
        let mut far = 0;
        for (j, &d) in dists.iter().enumerate() {
            if d > dists[far] {
                far = j;
            }
        }
        sizes[labels[far]] -= 1;
        labels[far] = cluster;
        sizes[cluster] = 1;
        dists[far] = 0.0;
    }
    labels
}

fn cluster_means(points: &Matrix, labels: &Labeling, k: usize) -> Matrix {
    let dim = points.rows();
    let mut sums = Matrix::zeros(dim, k);
    let mut counts = vec![0usize; k];
    for (j, &label) in labels.iter().enumerate() {
        counts[label] += 1;
        let col = points.column(j);
        let acc = sums.column_mut(label);
        for i in 0..dim {
            acc[i] += col[i];
        }
    }
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            for x in sums.column_mut(c) {
                *x /= count as f64;
            }
        }
    }
    sums
}

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_blobs() -> Matrix {
        Matrix::from_columns(&[
            vec![0.0, 0.1],
            vec![0.1, 0.0],
            vec![-0.1, -0.1],
            vec![5.0, 5.1],
            vec![5.1, 4.9],
            vec![4.9, 5.0],
        ])
        .unwrap()
    }

    #[test]
    fn separates_two_blobs() {
        let result = kmeans(&two_blobs(), 2, 7, 5, 100).unwrap();
        assert_eq!(result.labels[0], result.labels[1]);
        assert_eq!(result.labels[0], result.labels[2]);
        assert_eq!(result.labels[3], result.labels[4]);
        assert_eq!(result.labels[3], result.labels[5]);
        assert_ne!(result.labels[0], result.labels[3]);
    }

    #[test]
    fn one_cluster_returns_the_mean() {
        let pts = Matrix::from_columns(&[vec![0.0], vec![2.0], vec![4.0]]).unwrap();
        let result = kmeans(&pts, 1, 0, 1, 50).unwrap();
        assert_eq!(result.labels, vec![0, 0, 0]);
        assert!((result.centroids.get(0, 0) - 2.0).abs() < 1e-15);
        assert!((result.inertia - 8.0).abs() < 1e-12);
    }

    #[test]
    fn as_many_clusters_as_points_is_exact() {
        let pts = Matrix::from_columns(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let result = kmeans(&pts, 3, 3, 4, 50).unwrap();
        let mut seen = result.labels.clone();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2]);
        assert!(result.inertia < 1e-30);
    }

    #[test]
    fn duplicate_points_still_fill_every_cluster() {
        let col = vec![1.0, 1.0];
        let pts =
            Matrix::from_columns(&[col.clone(), col.clone(), col.clone(), col]).unwrap();
        let result = kmeans(&pts, 2, 11, 3, 20).unwrap();
        let mut sizes = [0usize; 2];
        for &l in &result.labels {
            sizes[l] += 1;
        }
        assert!(sizes.iter().all(|&s| s > 0));
        assert!(result.inertia < 1e-30);
    }

    #[test]
    fn same_seed_same_labels() {
        let pts = two_blobs();
        let a = kmeans(&pts, 2, 42, 10, 100).unwrap();
        let b = kmeans(&pts, 2, 42, 10, 100).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.inertia, b.inertia);
    }

    #[test]
    fn parameter_errors() {
        let pts = two_blobs();
        assert!(kmeans(&pts, 0, 0, 1, 10).is_err());
        assert!(kmeans(&pts, 7, 0, 1, 10).is_err());
        assert!(kmeans(&pts, 2, 0, 0, 10).is_err());
        assert!(kmeans(&pts, 2, 0, 1, 0).is_err());
        let mut bad = pts.clone();
        bad.set(0, 0, f64::NAN);
        assert!(kmeans(&bad, 2, 0, 1, 10).is_err());
    }
}
