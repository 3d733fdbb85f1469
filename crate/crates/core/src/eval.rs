//! Scoring and comparison: misclassification under optimal label matching,
//! per-group result aggregation, robustness sweeps over the threshold index
//! and the neighbor count, and the chordal-distance baseline affinity.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

// f64 transcendentals under no_std; builds that pull std into the crate
// graph (tests, dev-dependency feature unification) shadow the trait with
// the inherent methods and leave the import unused.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::pipeline::{segment, segment_at_threshold_index, NlsConfig};
use crate::svd::{principal_angles, OrthonormalBasis};
use crate::Labeling;

/// Largest number of distinct labels [`misclassification_rate`] accepts; the
/// optimal matching is found by exhaustive permutation search, which is
/// 10! = 3.6M candidates at this bound and explodes beyond it.
pub const MAX_MATCHED_LABELS: usize = 10;

/// Fraction of points assigned to the wrong cluster, minimized over all
/// ways of matching predicted label names to true ones.
///
/// Cluster labels are arbitrary names, so a segmentation is scored by the
/// best bijection between the two label sets. Distinct label counts above
/// [`MAX_MATCHED_LABELS`] are rejected.
pub fn misclassification_rate(pred: &Labeling, truth: &Labeling) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predicted labels for {} true labels",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::InvalidParameter("cannot score an empty labeling".into()));
    }

    let pred_names = distinct(pred);
    let truth_names = distinct(truth);
    let k = pred_names.len().max(truth_names.len());
    if k > MAX_MATCHED_LABELS {
        return Err(Error::InvalidParameter(format!(
            "{k} distinct labels exceed the exhaustive-matching bound {MAX_MATCHED_LABELS}"
        )));
    }

    // Confusion counts, padded to k x k so the search is over bijections.
    let mut confusion = alloc::vec![0usize; k * k];
    for (&p, &t) in pred.iter().zip(truth) {
        let a = pred_names.binary_search(&p).unwrap();
        let b = truth_names.binary_search(&t).unwrap();
        confusion[a * k + b] += 1;
    }

    let mut used = alloc::vec![false; k];
    let mut best = 0usize;
    best_agreement(&confusion, k, 0, 0, &mut used, &mut best);
    Ok(1.0 - best as f64 / pred.len() as f64)
}

fn distinct(labels: &Labeling) -> Vec<usize> {
    let mut names = labels.to_vec();
    names.sort_unstable();
    names.dedup();
    names
}

fn best_agreement(
    confusion: &[usize],
    k: usize,
    row: usize,
    acc: usize,
    used: &mut [bool],
    best: &mut usize,
) {
    if row == k {
        *best = acc.max(*best);
        return;
    }
    for col in 0..k {
        if !used[col] {
            used[col] = true;
            best_agreement(confusion, k, row + 1, acc + confusion[row * k + col], used, best);
            used[col] = false;
        }
    }
}

/// Squared chordal distances between all pairs of equal-dimensional
/// subspaces: entry (i, j) is the sum of squared sines of the principal
/// angles between bases i and j.
pub fn chordal_affinity(bases: &[OrthonormalBasis]) -> Result<Matrix> {
    if let Some(first) = bases.first() {
        for (i, b) in bases.iter().enumerate() {
            if b.dim() != first.dim() || b.ambient_dim() != first.ambient_dim() {
                return Err(Error::ShapeMismatch(format!(
                    "basis {i} spans {} dims in ambient {}, expected {} in {}",
                    b.dim(),
                    b.ambient_dim(),
                    first.dim(),
                    first.ambient_dim()
                )));
            }
        }
    }
    let n = bases.len();
    let mut affinity = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let value: f64 = principal_angles(&bases[i], &bases[j])?
                .iter()
                .map(|theta| {
                    let s = theta.sin();
                    s * s
                })
                .sum();
            affinity.set(i, j, value);
            affinity.set(j, i, value);
        }
    }
    Ok(affinity)
}

/// Dataset family a sequence belongs to, for grouped reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    Checker,
    Traffic,
    Articulated,
    Synthetic,
}

impl Group {
    pub const ALL: [Group; 4] =
        [Group::Checker, Group::Traffic, Group::Articulated, Group::Synthetic];

    pub fn as_str(&self) -> &'static str {
        match self {
            Group::Checker => "checker",
            Group::Traffic => "traffic",
            Group::Articulated => "articulated",
            Group::Synthetic => "synthetic",
        }
    }

    pub fn parse(name: &str) -> Result<Group> {
        match name {
            "checker" => Ok(Group::Checker),
            "traffic" => Ok(Group::Traffic),
            "articulated" => Ok(Group::Articulated),
            "synthetic" => Ok(Group::Synthetic),
            other => Err(Error::InvalidParameter(format!("unknown sequence group '{other}'"))),
        }
    }
}

/// Scored outcome of segmenting one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceResult {
    pub name: String,
    pub group: Group,
    pub num_motions: usize,
    /// Misclassification rate in [0, 1].
    pub error_rate: f64,
}

impl SequenceResult {
    pub fn new(name: String, group: Group, num_motions: usize, error_rate: f64) -> Result<Self> {
        if !error_rate.is_finite() || !(0.0..=1.0).contains(&error_rate) {
            return Err(Error::InvalidParameter(format!(
                "error rate must lie in [0, 1], got {error_rate} for '{name}'"
            )));
        }
        Ok(SequenceResult { name, group, num_motions, error_rate })
    }
}

/// Mean and median error over some slice of results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
}

/// Per-group and overall error statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub overall: ErrorStats,
    /// Stats for each group that appears in the input, in [`Group::ALL`] order.
    pub groups: Vec<(Group, ErrorStats)>,
}

fn stats(rates: &[f64]) -> ErrorStats {
    let mut sorted = rates.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        // Midpoint of the two middle values.
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    ErrorStats { count: n, mean: sorted.iter().sum::<f64>() / n as f64, median }
}

/// Mean and median error rates per group and overall.
pub fn aggregate(results: &[SequenceResult]) -> Result<AggregateReport> {
    if results.is_empty() {
        return Err(Error::InvalidParameter("cannot aggregate zero results".into()));
    }
    for r in results {
        if !r.error_rate.is_finite() || !(0.0..=1.0).contains(&r.error_rate) {
            return Err(Error::InvalidParameter(format!(
                "error rate must lie in [0, 1], got {} for '{}'",
                r.error_rate, r.name
            )));
        }
    }
    let all: Vec<f64> = results.iter().map(|r| r.error_rate).collect();
    let mut groups = Vec::new();
    for group in Group::ALL {
        let rates: Vec<f64> = results
            .iter()
            .filter(|r| r.group == group)
            .map(|r| r.error_rate)
            .collect();
        if !rates.is_empty() {
            groups.push((group, stats(&rates)));
        }
    }
    Ok(AggregateReport { overall: stats(&all), groups })
}

/// Renders a rate in [0, 1] as a percentage with two decimals, e.g. "1.00%".
pub fn format_percent(rate: f64) -> String {
    format!("{:.2}%", rate * 100.0)
}

/// One point of a threshold-robustness sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSweepPoint {
    pub factor: f64,
    /// The 1-based threshold position actually used, `round(factor * T_d)`
    /// clamped to the valid range.
    pub index: usize,
    pub eta: f64,
    pub error_rate: f64,
}

/// Reruns the segmentation with the similarity threshold moved to
/// `round(factor * T_d)` for each factor, scoring each run against `truth`.
/// A factor of exactly 1.0 reproduces the baseline run.
pub fn sweep_threshold(
    w: &Matrix,
    cfg: &NlsConfig,
    truth: &Labeling,
    factors: &[f64],
) -> Result<Vec<ThresholdSweepPoint>> {
    for &f in factors {
        if !f.is_finite() || f <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "threshold factors must be finite and positive, got {f}"
            )));
        }
    }
    if truth.len() != w.cols() {
        return Err(Error::ShapeMismatch(format!(
            "{} true labels for {} points",
            truth.len(),
            w.cols()
        )));
    }
    let (_, baseline) = segment(w, cfg)?;
    let total = w.cols() * w.cols();
    let mut points = Vec::with_capacity(factors.len());
    for &factor in factors {
        let index = (factor * baseline.threshold_index as f64)
            .round()
            .clamp(1.0, total as f64) as usize;
        let (labels, diag) = segment_at_threshold_index(w, cfg, index)?;
        points.push(ThresholdSweepPoint {
            factor,
            index,
            eta: diag.eta,
            error_rate: misclassification_rate(&labels, truth)?,
        });
    }
    Ok(points)
}

/// One point of a neighbor-count sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSweepPoint {
    pub k: usize,
    pub error_rate: f64,
}

/// Reruns the segmentation for each neighbor count in `ks`, scoring each run
/// against `truth`. Infeasible counts (k < d - 1, or k + 1 > N) surface as
/// errors; k = N - 1 fits every local subspace to all points, which is
/// degenerate but permitted.
pub fn sweep_neighbors(
    w: &Matrix,
    cfg: &NlsConfig,
    truth: &Labeling,
    ks: &[usize],
) -> Result<Vec<NeighborSweepPoint>> {
    if truth.len() != w.cols() {
        return Err(Error::ShapeMismatch(format!(
            "{} true labels for {} points",
            truth.len(),
            w.cols()
        )));
    }
    let mut points = Vec::with_capacity(ks.len());
    for &k in ks {
        let mut run_cfg = cfg.clone();
        run_cfg.neighbors = k;
        let (labels, _) = segment(w, &run_cfg)?;
        points.push(NeighborSweepPoint { k, error_rate: misclassification_rate(&labels, truth)? });
    }
    Ok(points)
}
