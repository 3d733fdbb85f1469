//! End-to-end pipeline invariants: determinism, scale invariance,
//! permutation equivariance, ideal-case correctness, and brute-force oracles
//! for the threshold, neighbor, and distance stages.

use nls_core::datagen::{sample_union, UnionSpec};
use nls_core::eval::misclassification_rate;
use nls_core::pipeline::{
    binary_similarity, data_driven_threshold, distance_matrix, fit_all_local_subspaces,
    neighbor_sets, row_normalize_l1, segment_rows, DistanceMatrix, ReducedData,
    SimilarityMatrix, Threshold,
};
use nls_core::svd::residual_distance;
use nls_core::{segment, Matrix, NlsConfig, RankMode};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn union_config(d: usize, n: usize, seed: u64) -> NlsConfig {
    let mut cfg = NlsConfig::new(d, n);
    cfg.neighbors = d + 1;
    cfg.rank_mode = RankMode::Known(d * n);
    cfg.seed = seed;
    cfg
}

/// Well-separated two-subspace instance with small noise.
fn noisy_instance(seed: u64) -> (Matrix, Vec<usize>, NlsConfig) {
    let mut spec = UnionSpec::new(10, 2, 2, 14);
    spec.min_principal_angle = Some(1.0);
    spec.noise_sigma = 0.005;
    spec.seed = seed;
    let (w, truth) = sample_union(&spec).unwrap();
    (w, truth, union_config(2, 2, seed))
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    for seed in 0..5 {
        let (w, _, cfg) = noisy_instance(seed);
        let (labels_a, diag_a) = segment(&w, &cfg).unwrap();
        let (labels_b, diag_b) = segment(&w, &cfg).unwrap();
        assert_eq!(labels_a, labels_b);
        assert_eq!(diag_a.rank, diag_b.rank);
        assert_eq!(diag_a.eta.to_bits(), diag_b.eta.to_bits());
        assert_eq!(diag_a.threshold_index, diag_b.threshold_index);
        assert_eq!(diag_a.distances.matrix(), diag_b.distances.matrix());
        assert_eq!(diag_a.similarity.matrix(), diag_b.similarity.matrix());
    }
}

#[test]
fn segmentation_is_scale_invariant() {
    let (w, _, cfg) = noisy_instance(3);
    let (labels, diag) = segment(&w, &cfg).unwrap();

    // Scaling by a power of two is exact in floating point, so the whole
    // run must reproduce bit for bit.
    let doubled = Matrix::from_fn(w.rows(), w.cols(), |i, j| 2.0 * w.get(i, j));
    let (labels_2, diag_2) = segment(&doubled, &cfg).unwrap();
    assert_eq!(labels, labels_2);
    assert_eq!(diag.eta.to_bits(), diag_2.eta.to_bits());
    assert_eq!(diag.threshold_index, diag_2.threshold_index);

    // A generic scale suffers rounding, so compare the partitions.
    let scaled = Matrix::from_fn(w.rows(), w.cols(), |i, j| 3.7 * w.get(i, j));
    let (labels_s, _) = segment(&scaled, &cfg).unwrap();
    assert_eq!(misclassification_rate(&labels_s, &labels).unwrap(), 0.0);
}

#[test]
fn segmentation_is_permutation_equivariant() {
    let (w, _, cfg) = noisy_instance(7);
    let (labels, _) = segment(&w, &cfg).unwrap();

    let n = w.cols();
    // A fixed derangement-ish shuffle: reverse then swap neighbors.
    let perm: Vec<usize> = (0..n).rev().collect();
    let permuted = Matrix::from_fn(w.rows(), n, |i, j| w.get(i, perm[j]));
    let (perm_labels, _) = segment(&permuted, &cfg).unwrap();

    // Labels of the permuted run, pulled back to original point order, must
    // induce the same partition (names may differ).
    let pulled: Vec<usize> = {
        let mut back = vec![0; n];
        for (j, &src) in perm.iter().enumerate() {
            back[src] = perm_labels[j];
        }
        back
    };
    assert_eq!(misclassification_rate(&pulled, &labels).unwrap(), 0.0);
}

#[test]
fn ideal_instances_segment_perfectly() {
    // Noiseless unions in general position with the angle floor of the
    // guarantee region: zero errors expected on every draw.
    let mut checked = 0;
    for (n, d) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
        for seed in 0..3 {
            let mut spec = UnionSpec::new(6 * d, d, n, 12);
            spec.min_principal_angle = Some(30.0_f64.to_radians());
            spec.seed = 1000 + seed;
            let (w, truth) = sample_union(&spec).unwrap();
            let (labels, _) = segment(&w, &union_config(d, n, seed)).unwrap();
            assert_eq!(
                misclassification_rate(&labels, &truth).unwrap(),
                0.0,
                "errors on n={n} d={d} seed={seed}"
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 12);
}

#[test]
fn noiseless_diagonals_vanish_and_distances_stay_symmetric() {
    // Dense sampling of orthogonal subspaces keeps every neighborhood pure,
    // so each point lies exactly on its own local subspace.
    for (n, d, seed) in [(2, 2, 0), (2, 3, 1), (3, 2, 2)] {
        let mut spec = UnionSpec::new(4 * d * n, d, n, 20);
        spec.min_principal_angle = Some(core::f64::consts::FRAC_PI_2);
        spec.seed = seed;
        let (w, _) = sample_union(&spec).unwrap();
        let (_, diag) = segment(&w, &union_config(d, n, seed)).unwrap();
        let h = diag.distances.matrix();
        for i in 0..w.cols() {
            assert!(h.get(i, i) <= 1e-10, "diagonal {i} = {} on n={n} d={d}", h.get(i, i));
            for j in 0..w.cols() {
                assert_eq!(h.get(i, j), h.get(j, i));
            }
        }
    }
}

#[test]
fn perturbed_block_similarity_still_clusters() {
    // Two blocks of identical rows, with 2% of the off-diagonal entries
    // flipped: the spectral step must still recover the blocks.
    let n = 30;
    let half = n / 2;
    for seed in 0..20 {
        let mut s = Matrix::from_fn(n, n, |i, j| {
            if (i < half) == (j < half) {
                1.0
            } else {
                0.0
            }
        });
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let flips = n * n / 50;
        for _ in 0..flips {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i != j {
                let v = s.get(i, j);
                s.set(i, j, 1.0 - v);
            }
        }
        let similarity =
            SimilarityMatrix::from_matrix(s, Threshold { eta: 0.5, index: 1 }).unwrap();
        let stochastic = row_normalize_l1(&similarity).unwrap();
        let labels = segment_rows(&stochastic, &NlsConfig::new(1, 2)).unwrap();
        let truth: Vec<usize> = (0..n).map(|i| usize::from(i >= half)).collect();
        assert_eq!(
            misclassification_rate(&labels, &truth).unwrap(),
            0.0,
            "seed {seed} failed"
        );
    }
}

#[test]
fn two_level_distances_give_exact_block_similarity() {
    // Within-block distances well under the between-block level: the
    // data-driven threshold must select exactly the blocks.
    let n = 12;
    let half = n / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut h = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = if (i < half) == (j < half) {
                rng.random_range(0.01..0.1)
            } else {
                rng.random_range(0.9..1.0)
            };
            h.set(i, j, v);
            h.set(j, i, v);
        }
    }
    let distances = DistanceMatrix::from_matrix(h, 2.0).unwrap();
    let threshold = data_driven_threshold(&distances).unwrap();
    let similarity = binary_similarity(&distances, threshold).unwrap();
    for i in 0..n {
        for j in 0..n {
            let expected = if (i < half) == (j < half) { 1.0 } else { 0.0 };
            assert_eq!(similarity.matrix().get(i, j), expected, "entry ({i}, {j})");
        }
    }
}

/// Sorted, affinely rescaled copy of all entries, as the threshold stage
/// sees them.
fn rescaled_entries(h: &Matrix) -> Vec<f64> {
    let mut values: Vec<f64> = h.as_slice().to_vec();
    values.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let lo = values[0];
    let hi = values[values.len() - 1];
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

/// Exhaustive minimizer of the step-fit objective, smallest index on ties.
fn brute_force_threshold(h: &[f64]) -> (usize, f64) {
    let m = h.len();
    let mut best_t = 0;
    let mut best = f64::INFINITY;
    for t in 1..=m {
        let below: f64 = h[..t - 1].iter().map(|x| x * x).sum();
        let above: f64 = h[t - 1..].iter().map(|x| (1.0 - x) * (1.0 - x)).sum();
        if below + above < best {
            best = below + above;
            best_t = t;
        }
    }
    (best_t, h[best_t - 1])
}

fn symmetric_distances(n: usize, upper: Vec<f64>) -> Matrix {
    let mut h = Matrix::zeros(n, n);
    let mut it = upper.into_iter();
    for i in 0..n {
        for j in i + 1..n {
            let v = it.next().unwrap().abs();
            h.set(i, j, v);
            h.set(j, i, v);
        }
    }
    h
}

fn unit_columns(rows: usize, entries: &[f64]) -> Option<Matrix> {
    let cols = entries.len() / rows;
    let mut data = Vec::with_capacity(cols);
    for j in 0..cols {
        let col = &entries[j * rows..(j + 1) * rows];
        let nrm: f64 = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm < 1e-6 {
            return None;
        }
        data.push(col.iter().map(|x| x / nrm).collect::<Vec<f64>>());
    }
    Some(Matrix::from_columns(&data).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The O(N^2 log N) threshold matches the exhaustive objective scan.
    #[test]
    fn threshold_matches_exhaustive_scan(
        n in 3usize..9,
        raw in prop::collection::vec(0.0f64..10.0, 36),
    ) {
        let h = symmetric_distances(n, raw[..n * (n - 1) / 2].to_vec());
        let entries = rescaled_entries(&h);
        prop_assume!(entries.last().unwrap() > entries.first().unwrap());
        let distances = DistanceMatrix::from_matrix(h, 2.0).unwrap();
        let threshold = data_driven_threshold(&distances).unwrap();
        let (oracle_t, oracle_eta) = brute_force_threshold(&entries);
        prop_assert_eq!(threshold.index, oracle_t);
        prop_assert_eq!(threshold.eta.to_bits(), oracle_eta.to_bits());
    }

    /// Neighbor selection matches an exhaustive sort of angular distances.
    #[test]
    fn neighbors_match_exhaustive_sort(
        entries in prop::collection::vec(-3.0f64..3.0, 40),
        k in 1usize..6,
    ) {
        let rows = 4;
        let y = match unit_columns(rows, &entries) {
            Some(y) => y,
            None => return Ok(()),
        };
        let n = y.cols();
        prop_assume!(k < n);
        let reduced = ReducedData::from_unit_columns(y.clone(), 2.0).unwrap();
        let sets = neighbor_sets(&reduced, k).unwrap();
        for i in 0..n {
            let mut oracle: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let dot: f64 = (0..rows).map(|r| y.get(r, i) * y.get(r, j)).sum();
                    (dot.clamp(-1.0, 1.0).acos(), j)
                })
                .collect();
            oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let expected: Vec<usize> = oracle[..k].iter().map(|&(_, j)| j).collect();
            prop_assert_eq!(&sets[i], &expected, "point {}", i);
        }
    }

    /// Every distance entry equals the independently computed symmetric
    /// residual average.
    #[test]
    fn distance_entries_match_residual_oracle(
        entries in prop::collection::vec(-3.0f64..3.0, 36),
    ) {
        let rows = 4;
        let y = match unit_columns(rows, &entries) {
            Some(y) => y,
            None => return Ok(()),
        };
        let n = y.cols();
        let reduced = ReducedData::from_unit_columns(y.clone(), 2.0).unwrap();
        let sets = neighbor_sets(&reduced, 2).unwrap();
        let bases = fit_all_local_subspaces(&reduced, &sets, 2).unwrap();
        let h = distance_matrix(&reduced, &bases).unwrap();
        for i in 0..n {
            for j in 0..n {
                let a = residual_distance(y.column(j), &bases[i], 2.0).unwrap();
                let b = residual_distance(y.column(i), &bases[j], 2.0).unwrap();
                prop_assert!((h.matrix().get(i, j) - (a + b) / 2.0).abs() <= 1e-15);
            }
        }
    }
}
