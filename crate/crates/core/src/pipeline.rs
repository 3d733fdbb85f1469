//! The segmentation pipeline: from a raw data matrix to cluster labels.
//!
//! Points are columns of a matrix `W`. The stages, exposed individually and
//! composed by [`segment`]:
//!
//! 1. [`reduce_and_normalize`] — SVD-reduce `W` to its top `r` right-singular
//!    rows and scale every column to unit p-norm;
//! 2. [`neighbor_sets`] — nearest neighbors per point (angular distance for
//!    `p = 2`, p-norm difference otherwise);
//! 3. [`fit_all_local_subspaces`] — a best-fit `d`-dimensional subspace per
//!    point from the point and its neighbors;
//! 4. [`distance_matrix`] — symmetrized projection-residual distance between
//!    every point and every local subspace;
//! 5. [`data_driven_threshold`] — a step-function fit over the sorted,
//!    rescaled distances picks the similarity cutoff;
//! 6. [`binary_similarity`] + [`row_normalize_l1`] — 0/1 similarity, rows
//!    scaled to sum to one;
//! 7. [`segment_rows`] — spectral embedding of the row-stochastic similarity,
//!    clustered with k-means.
//!
//! Every stage is deterministic; randomness enters only through the k-means
//! seed carried in [`NlsConfig`].

use alloc::format;
use alloc::vec::Vec;

// f64 transcendentals under no_std; builds that pull std into the crate
// graph (tests, dev-dependency feature unification) shadow the trait with
// the inherent methods and leave the import unused.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::kmeans::kmeans;
use crate::matrix::{dot, Matrix};
use crate::svd::{fit_local_basis, pnorm, residual_distance, svd, OrthonormalBasis};
use crate::Labeling;

/// Tolerance used when validating unit-norm and row-stochastic invariants.
const UNIT_TOL: f64 = 1.0e-10;

/// How the working rank `r` of the data matrix is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum RankMode {
    /// Use this rank as given (e.g. `4 * motions` for rigid-motion data).
    Known(usize),
    /// Pick `r` minimizing `s_{r+1}^2 / (s_1^2 + .. + s_r^2) + kappa * r`
    /// over the singular values `s_i`; smaller `kappa` favors larger ranks.
    Estimate { kappa: f64 },
}

impl RankMode {
    /// The penalty weight used by [`RankMode::Estimate`] when none is given.
    pub const DEFAULT_KAPPA: f64 = 0.1;
}

impl Default for RankMode {
    fn default() -> Self {
        RankMode::Estimate { kappa: RankMode::DEFAULT_KAPPA }
    }
}

/// All pipeline parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NlsConfig {
    /// Dimension `d` of each underlying subspace.
    pub subspace_dim: usize,
    /// Number of subspaces `n` to segment into.
    pub num_clusters: usize,
    /// Neighbors `k` per point when fitting local subspaces; the local point
    /// set has `k + 1` points, so `k >= subspace_dim - 1`.
    pub neighbors: usize,
    /// How to choose the working rank `r`.
    pub rank_mode: RankMode,
    /// Norm order `p >= 1` used for normalization and distances.
    pub norm_p: f64,
    /// Seed for the k-means stage.
    pub seed: u64,
    /// Independent k-means restarts; best inertia wins.
    pub kmeans_restarts: usize,
    /// Iteration cap per k-means restart.
    pub kmeans_max_iter: usize,
    /// Rank of the spectral embedding; defaults to `num_clusters`.
    pub final_rank: Option<usize>,
}

impl NlsConfig {
    /// A configuration with conventional defaults: `k = d - 1` neighbors,
    /// Euclidean norms, estimated rank, 10 k-means restarts.
    pub fn new(subspace_dim: usize, num_clusters: usize) -> Self {
        NlsConfig {
            subspace_dim,
            num_clusters,
            neighbors: subspace_dim.saturating_sub(1),
            rank_mode: RankMode::default(),
            norm_p: 2.0,
            seed: 0,
            kmeans_restarts: 10,
            kmeans_max_iter: 100,
            final_rank: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.subspace_dim == 0 {
            return Err(Error::InvalidParameter("subspace dimension must be positive".into()));
        }
        if self.num_clusters == 0 {
            return Err(Error::InvalidParameter("cluster count must be positive".into()));
        }
        if self.neighbors + 1 < self.subspace_dim {
            return Err(Error::InvalidParameter(format!(
                "{} neighbors give local sets of {} points, too few to fit a \
                 {}-dimensional subspace",
                self.neighbors,
                self.neighbors + 1,
                self.subspace_dim
            )));
        }
        if !self.norm_p.is_finite() || self.norm_p < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "norm order must be a finite value >= 1, got {}",
                self.norm_p
            )));
        }
        if self.kmeans_restarts == 0 || self.kmeans_max_iter == 0 {
            return Err(Error::InvalidParameter(
                "k-means restarts and iteration cap must be positive".into(),
            ));
        }
        if let RankMode::Known(r) = self.rank_mode {
            if r == 0 {
                return Err(Error::InvalidParameter("known rank must be positive".into()));
            }
        }
        if let RankMode::Estimate { kappa } = self.rank_mode {
            if !kappa.is_finite() || kappa < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "rank penalty kappa must be finite and >= 0, got {kappa}"
                )));
            }
        }
        if self.final_rank == Some(0) {
            return Err(Error::InvalidParameter("final rank must be positive".into()));
        }
        Ok(())
    }
}

/// Reduced, column-normalized data: `r x N`, every column of unit p-norm.
#[derive(Debug, Clone)]
pub struct ReducedData {
    matrix: Matrix,
    norm_p: f64,
}

impl ReducedData {
    /// Wraps a matrix whose columns are already unit p-norm (within 1e-10).
    pub fn from_unit_columns(matrix: Matrix, norm_p: f64) -> Result<Self> {
        if !norm_p.is_finite() || norm_p < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "norm order must be a finite value >= 1, got {norm_p}"
            )));
        }
        matrix.ensure_finite()?;
        for j in 0..matrix.cols() {
            let nrm = pnorm(matrix.column(j), norm_p);
            if (nrm - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidParameter(format!(
                    "column {j} has p-norm {nrm}, expected 1"
                )));
            }
        }
        Ok(ReducedData { matrix, norm_p })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn norm_p(&self) -> f64 {
        self.norm_p
    }

    /// Working rank `r` (number of rows).
    pub fn rank(&self) -> usize {
        self.matrix.rows()
    }

    pub fn num_points(&self) -> usize {
        self.matrix.cols()
    }
}

/// Symmetric, non-negative point-to-local-subspace distances.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    matrix: Matrix,
    norm_p: f64,
}

impl DistanceMatrix {
    /// Wraps a square matrix, verifying exact symmetry and non-negativity.
    pub fn from_matrix(matrix: Matrix, norm_p: f64) -> Result<Self> {
        if matrix.rows() != matrix.cols() || matrix.rows() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "distance matrix must be square and nonempty, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        matrix.ensure_finite()?;
        for j in 0..matrix.cols() {
            for i in 0..=j {
                if matrix.get(i, j) < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "negative distance at ({i}, {j})"
                    )));
                }
                if matrix.get(i, j) != matrix.get(j, i) {
                    return Err(Error::InvalidParameter(format!(
                        "distances are not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(DistanceMatrix { matrix, norm_p })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn norm_p(&self) -> f64 {
        self.norm_p
    }

    pub fn num_points(&self) -> usize {
        self.matrix.rows()
    }
}

/// A similarity cutoff on the `[0, 1]`-rescaled distance scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    /// Cutoff value; distances rescale to `[0, 1]` and compare against this.
    pub eta: f64,
    /// One-based position of the cutoff in the sorted distance list.
    pub index: usize,
}

/// 0/1 similarity matrix plus the threshold that produced it.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    matrix: Matrix,
    threshold: Threshold,
}

impl SimilarityMatrix {
    /// Wraps a square 0/1 matrix.
    pub fn from_matrix(matrix: Matrix, threshold: Threshold) -> Result<Self> {
        if matrix.rows() != matrix.cols() || matrix.rows() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "similarity matrix must be square and nonempty, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        for (pos, &x) in matrix.as_slice().iter().enumerate() {
            if x != 0.0 && x != 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "similarity entries must be 0 or 1, found {x} at flat index {pos}"
                )));
            }
        }
        Ok(SimilarityMatrix { matrix, threshold })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn threshold(&self) -> Threshold {
        self.threshold
    }

    pub fn num_points(&self) -> usize {
        self.matrix.rows()
    }
}

/// Similarity matrix with every row scaled to sum to one.
#[derive(Debug, Clone)]
pub struct RowStochasticSimilarity {
    matrix: Matrix,
}

impl RowStochasticSimilarity {
    /// Wraps a square non-negative matrix whose rows sum to one.
    pub fn from_matrix(matrix: Matrix) -> Result<Self> {
        if matrix.rows() != matrix.cols() || matrix.rows() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "row-stochastic matrix must be square and nonempty, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        matrix.ensure_finite()?;
        for i in 0..matrix.rows() {
            let mut sum = 0.0;
            for j in 0..matrix.cols() {
                let x = matrix.get(i, j);
                if x < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "negative entry at ({i}, {j})"
                    )));
                }
                sum += x;
            }
            if (sum - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidParameter(format!("row {i} sums to {sum}, expected 1")));
            }
        }
        Ok(RowStochasticSimilarity { matrix })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn num_points(&self) -> usize {
        self.matrix.rows()
    }
}

/// Per-run byproducts useful for reporting and debugging.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    /// Working rank `r` actually used.
    pub rank: usize,
    /// Similarity cutoff on the rescaled distance scale.
    pub eta: f64,
    /// One-based position of the cutoff in the sorted distance list.
    pub threshold_index: usize,
    /// The point-to-local-subspace distance matrix.
    pub distances: DistanceMatrix,
    /// The thresholded 0/1 similarity.
    pub similarity: SimilarityMatrix,
}

/// Picks a working rank from a non-increasing singular value sequence by
/// minimizing `s_{r+1}^2 / (s_1^2 + .. + s_r^2) + kappa * r`; ties go to the
/// smallest `r`.
pub fn estimate_rank(singular_values: &[f64], kappa: f64) -> Result<usize> {
    if singular_values.len() < 2 {
        return Err(Error::InvalidParameter(
            "rank estimation needs at least two singular values".into(),
        ));
    }
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "rank penalty kappa must be finite and >= 0, got {kappa}"
        )));
    }
    if singular_values[0] <= 0.0 {
        return Err(Error::Degenerate("all singular values are zero".into()));
    }
    let mut best_r = 1;
    let mut best_obj = f64::INFINITY;
    let mut prefix = 0.0;
    for r in 1..singular_values.len() {
        prefix += singular_values[r - 1] * singular_values[r - 1];
        let ratio = singular_values[r] * singular_values[r] / prefix;
        let objective = ratio + kappa * r as f64;
        if objective < best_obj {
            best_obj = objective;
            best_r = r;
        }
    }
    Ok(best_r)
}

/// Projects `w` onto its top `r` right-singular rows and normalizes every
/// column to unit p-norm. The result has one column per original point, now
/// living in dimension `r`.
pub fn reduce_and_normalize(w: &Matrix, rank_mode: &RankMode, norm_p: f64) -> Result<ReducedData> {
    if w.rows() == 0 || w.cols() == 0 {
        return Err(Error::InvalidParameter(format!(
            "data matrix must be nonempty, got {}x{}",
            w.rows(),
            w.cols()
        )));
    }
    if !norm_p.is_finite() || norm_p < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "norm order must be a finite value >= 1, got {norm_p}"
        )));
    }
    w.ensure_finite()?;
    for j in 0..w.cols() {
        if pnorm(w.column(j), norm_p) == 0.0 {
            return Err(Error::ZeroColumn(j));
        }
    }

    let decomp = svd(w)?;
    let full = decomp.singular_values.len();
    let r = match rank_mode {
        RankMode::Known(r) => {
            if *r == 0 || *r > full {
                return Err(Error::InvalidParameter(format!(
                    "known rank {r} outside 1..={full} for a {}x{} matrix",
                    w.rows(),
                    w.cols()
                )));
            }
            *r
        }
        RankMode::Estimate { kappa } => estimate_rank(&decomp.singular_values, *kappa)?,
    };

    // Rows of V^T, i.e. transposed columns of the right factor.
    let mut reduced = Matrix::from_fn(r, w.cols(), |i, j| decomp.right.get(j, i));
    for j in 0..reduced.cols() {
        let nrm = pnorm(reduced.column(j), norm_p);
        if nrm == 0.0 {
            return Err(Error::Degenerate(format!(
                "point {j} vanishes in the rank-{r} reduction"
            )));
        }
        for x in reduced.column_mut(j) {
            *x /= nrm;
        }
    }
    Ok(ReducedData { matrix: reduced, norm_p })
}

/// Distance between reduced points `i` and `j`: the angle
/// `acos(<y_i, y_j>)` for `p = 2`, the p-norm difference otherwise.
fn point_distance(y: &ReducedData, i: usize, j: usize) -> f64 {
    let (a, b) = (y.matrix.column(i), y.matrix.column(j));
    if y.norm_p == 2.0 {
        dot(a, b).clamp(-1.0, 1.0).acos()
    } else {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        pnorm(&diff, y.norm_p)
    }
}

/// The `k` nearest neighbors of every point, closest first; distance ties
/// break toward the lower point index.
pub fn neighbor_sets(y: &ReducedData, k: usize) -> Result<Vec<Vec<usize>>> {
    let n = y.num_points();
    if k + 1 > n {
        return Err(Error::InvalidParameter(format!(
            "cannot take {k} neighbors out of {n} points"
        )));
    }
    let mut sets = Vec::with_capacity(n);
    for i in 0..n {
        let mut order: Vec<(f64, usize)> =
            (0..n).filter(|&j| j != i).map(|j| (point_distance(y, i, j), j)).collect();
        order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        sets.push(order.into_iter().take(k).map(|(_, j)| j).collect());
    }
    Ok(sets)
}

/// Fits one `dim`-dimensional subspace per point from the point and its
/// neighbors (in the order produced by [`neighbor_sets`]).
pub fn fit_all_local_subspaces(
    y: &ReducedData,
    neighbors: &[Vec<usize>],
    dim: usize,
) -> Result<Vec<OrthonormalBasis>> {
    let n = y.num_points();
    if neighbors.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{} neighbor sets for {n} points",
            neighbors.len()
        )));
    }
    let mut bases = Vec::with_capacity(n);
    for (i, set) in neighbors.iter().enumerate() {
        let local = Matrix::from_fn(y.rank(), set.len() + 1, |row, col| {
            let point = if col == 0 { i } else { set[col - 1] };
            y.matrix.get(row, point)
        });
        bases.push(fit_local_basis(&local, dim)?);
    }
    Ok(bases)
}

/// Symmetrized distance of every point to every local subspace:
/// `(|y_j - A_i A_i^T y_j|_p + |y_i - A_j A_j^T y_i|_p) / 2`.
pub fn distance_matrix(y: &ReducedData, bases: &[OrthonormalBasis]) -> Result<DistanceMatrix> {
    let n = y.num_points();
    if bases.len() != n {
        return Err(Error::ShapeMismatch(format!("{} bases for {n} points", bases.len())));
    }
    for (i, basis) in bases.iter().enumerate() {
        if basis.ambient_dim() != y.rank() {
            return Err(Error::ShapeMismatch(format!(
                "basis {i} lives in dimension {}, data in {}",
                basis.ambient_dim(),
                y.rank()
            )));
        }
    }
    let p = y.norm_p;
    let mut h = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let d = if i == j {
                residual_distance(y.matrix.column(i), &bases[i], p)?
            } else {
                let ij = residual_distance(y.matrix.column(j), &bases[i], p)?;
                let ji = residual_distance(y.matrix.column(i), &bases[j], p)?;
                (ij + ji) / 2.0
            };
            h.set(i, j, d);
            h.set(j, i, d);
        }
    }
    Ok(DistanceMatrix { matrix: h, norm_p: p })
}

/// All `N^2` distances sorted ascending and affinely rescaled onto `[0, 1]`.
/// Errors if every distance is identical.
fn sorted_rescaled(h: &DistanceMatrix) -> Result<Vec<f64>> {
    let mut values = h.matrix.as_slice().to_vec();
    values.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let (lo, hi) = (values[0], values[values.len() - 1]);
    if hi == lo {
        return Err(Error::Degenerate(
            "all pairwise distances are equal; no threshold separates them".into(),
        ));
    }
    for x in values.iter_mut() {
        *x = (*x - lo) / (hi - lo);
    }
    Ok(values)
}

/// Fits the best step function 0 -> 1 to the sorted rescaled distances
/// `h_1 <= .. <= h_M`: the jump position `T` minimizes
/// `sum_{i<T} h_i^2 + sum_{i>=T} (1 - h_i)^2` over `1..=M`, ties to the
/// smallest `T`. Returns the cutoff `eta = h_T` with its position.
pub fn data_driven_threshold(h: &DistanceMatrix) -> Result<Threshold> {
    let values = sorted_rescaled(h)?;
    let m = values.len();

    // suffix[t] = sum over i >= t (0-based) of (1 - h_i)^2
    let mut suffix = alloc::vec![0.0; m + 1];
    for t in (0..m).rev() {
        let miss = 1.0 - values[t];
        suffix[t] = suffix[t + 1] + miss * miss;
    }
    let mut best_t = 1;
    let mut best_fit = f64::INFINITY;
    let mut prefix = 0.0;
    for t in 1..=m {
        let fit = prefix + suffix[t - 1];
        if fit < best_fit {
            best_fit = fit;
            best_t = t;
        }
        prefix += values[t - 1] * values[t - 1];
    }
    Ok(Threshold { eta: values[best_t - 1], index: best_t })
}

/// The threshold sitting at a chosen one-based position in the sorted
/// rescaled distance list; used for threshold sweeps.
pub fn threshold_at_index(h: &DistanceMatrix, index: usize) -> Result<Threshold> {
    let values = sorted_rescaled(h)?;
    if index == 0 || index > values.len() {
        return Err(Error::InvalidParameter(format!(
            "threshold index {index} outside 1..={}",
            values.len()
        )));
    }
    Ok(Threshold { eta: values[index - 1], index })
}

/// Thresholds the rescaled distances: `s_ij = 1` iff the rescaled `d_ij` is
/// strictly below `threshold.eta`.
pub fn binary_similarity(h: &DistanceMatrix, threshold: Threshold) -> Result<SimilarityMatrix> {
    let n = h.num_points();
    if threshold.index == 0 || threshold.index > n * n {
        return Err(Error::InvalidParameter(format!(
            "threshold index {} outside 1..={}",
            threshold.index,
            n * n
        )));
    }
    if !(0.0..=1.0).contains(&threshold.eta) {
        return Err(Error::InvalidParameter(format!(
            "threshold eta {} outside [0, 1]",
            threshold.eta
        )));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in h.matrix.as_slice() {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if hi == lo {
        return Err(Error::Degenerate(
            "all pairwise distances are equal; no threshold separates them".into(),
        ));
    }
    let s = Matrix::from_fn(n, n, |i, j| {
        let rescaled = (h.matrix.get(i, j) - lo) / (hi - lo);
        if rescaled < threshold.eta {
            1.0
        } else {
            0.0
        }
    });
    Ok(SimilarityMatrix { matrix: s, threshold })
}

/// Scales every row of the similarity matrix to sum to one. A row of zeros
/// (a point similar to nothing) is reported as degenerate.
pub fn row_normalize_l1(s: &SimilarityMatrix) -> Result<RowStochasticSimilarity> {
    let n = s.num_points();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        let mut sum = 0.0;
        for j in 0..n {
            sum += s.matrix.get(i, j);
        }
        if sum == 0.0 {
            return Err(Error::Degenerate(format!(
                "similarity row {i} is all zeros: point {i} falls under the threshold \
                 with no one, so its row cannot be normalized"
            )));
        }
        for j in 0..n {
            out.set(i, j, s.matrix.get(i, j) / sum);
        }
    }
    Ok(RowStochasticSimilarity { matrix: out })
}

/// Clusters the rows of the row-stochastic similarity: the transpose is
/// decomposed, the top `final_rank` (default `num_clusters`) singular
/// triplets form the embedding `diag(s) V^T`, and its columns are k-means
/// clustered into `num_clusters` groups.
pub fn segment_rows(st: &RowStochasticSimilarity, cfg: &NlsConfig) -> Result<Labeling> {
    cfg.validate()?;
    let n_points = st.num_points();
    let clusters = cfg.num_clusters;
    if clusters > n_points {
        return Err(Error::InvalidParameter(format!(
            "cannot split {n_points} points into {clusters} clusters"
        )));
    }
    let rank = cfg.final_rank.unwrap_or(clusters);
    if rank > n_points {
        return Err(Error::InvalidParameter(format!(
            "embedding rank {rank} exceeds the point count {n_points}"
        )));
    }
    let decomp = svd(&st.matrix.transposed())?;
    let embedding = Matrix::from_fn(rank, n_points, |i, j| {
        decomp.singular_values[i] * decomp.right.get(j, i)
    });
    Ok(kmeans(&embedding, clusters, cfg.seed, cfg.kmeans_restarts, cfg.kmeans_max_iter)?.labels)
}

/// Runs the whole pipeline on a data matrix whose columns are the points.
///
/// Returns one label per column plus the run's [`Diagnostics`].
pub fn segment(w: &Matrix, cfg: &NlsConfig) -> Result<(Labeling, Diagnostics)> {
    run_pipeline(w, cfg, None)
}

/// Like [`segment`], but places the similarity threshold at the given
/// 1-based position in the sorted distance list instead of the data-driven
/// one. Used to probe how sensitive a segmentation is to that choice.
pub fn segment_at_threshold_index(
    w: &Matrix,
    cfg: &NlsConfig,
    index: usize,
) -> Result<(Labeling, Diagnostics)> {
    run_pipeline(w, cfg, Some(index))
}

fn run_pipeline(
    w: &Matrix,
    cfg: &NlsConfig,
    index_override: Option<usize>,
) -> Result<(Labeling, Diagnostics)> {
    cfg.validate()?;
    let reduced = reduce_and_normalize(w, &cfg.rank_mode, cfg.norm_p)?;
    let r = reduced.rank();
    if cfg.subspace_dim >= r {
        return Err(Error::InvalidParameter(format!(
            "subspace dimension {} must be below the working rank {r}; raise the rank \
             or lower the dimension",
            cfg.subspace_dim
        )));
    }
    let neighbors = neighbor_sets(&reduced, cfg.neighbors)?;
    let bases = fit_all_local_subspaces(&reduced, &neighbors, cfg.subspace_dim)?;
    let distances = distance_matrix(&reduced, &bases)?;
    let threshold = match index_override {
        None => data_driven_threshold(&distances)?,
        Some(index) => threshold_at_index(&distances, index)?,
    };
    let similarity = binary_similarity(&distances, threshold)?;
    let stochastic = row_normalize_l1(&similarity)?;
    let labels = segment_rows(&stochastic, cfg)?;
    let diagnostics = Diagnostics {
        rank: r,
        eta: threshold.eta,
        threshold_index: threshold.index,
        distances,
        similarity,
    };
    Ok((labels, diagnostics))
}
