//! Singular value decomposition and the subspace geometry built on it.
//!
//! The decomposition is a one-sided Jacobi (Hestenes) iteration: column pairs
//! are rotated until all columns are mutually orthogonal, at which point the
//! column norms are the singular values. Jacobi is slower than
//! bidiagonalization-based methods but is accurate for small singular values
//! and, with a fixed sweep order, bitwise deterministic — the same input
//! always produces the same factorization, down to the signs.

use alloc::vec;
use alloc::vec::Vec;

// f64 transcendentals under no_std; builds that pull std into the crate
// graph (tests, dev-dependency feature unification) shadow the trait with
// the inherent methods and leave the import unused.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::{dot, norm2, Matrix};

/// Relative threshold under which a column pair counts as orthogonal.
const ORTHO_TOL: f64 = 1.0e-14;
/// Columns whose norm falls below this fraction of the input's Frobenius
/// norm are frozen and reported as zero singular values. Without the floor,
/// rounding-shadow columns of exactly rank-deficient inputs keep rotating
/// against real columns indefinitely.
const ZERO_COL_TOL: f64 = 1.0e-13;
/// Sweep budget; Jacobi on the matrices handled here settles well under this.
const MAX_SWEEPS: usize = 64;
/// Acceptable deviation of a basis gram matrix from the identity.
const BASIS_TOL: f64 = 1.0e-10;

/// Thin singular value decomposition `M = U diag(s) V^T`.
///
/// For an `m x n` input and `l = min(m, n)`: [`left`](Self::left) is `m x l`
/// with orthonormal columns, [`singular_values`](Self::singular_values) holds
/// `l` non-negative values in non-increasing order, and
/// [`right`](Self::right) is `n x l` with orthonormal columns.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub left: Matrix,
    pub singular_values: Vec<f64>,
    pub right: Matrix,
}

/// Computes the thin SVD of `m`.
///
/// Signs are pinned so the factorization is unique for matrices with
/// distinct singular values: the largest-magnitude entry of each right
/// singular vector is made non-negative (ties broken by lowest index), and
/// the paired left vector is flipped along with it. Columns of `left`
/// belonging to zero singular values are completed to an orthonormal set
/// deterministically.
pub fn svd(m: &Matrix) -> Result<SvdResult> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::InvalidParameter(alloc::format!(
            "svd needs a nonempty matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    m.ensure_finite()?;
    let mut out = if m.rows() >= m.cols() {
        jacobi_tall(m)?
    } else {
        let t = jacobi_tall(&m.transposed())?;
        SvdResult { left: t.right, singular_values: t.singular_values, right: t.left }
    };
    fix_signs(&mut out);
    Ok(out)
}

/// One-sided Jacobi on a tall (or square) matrix, `rows >= cols`.
fn jacobi_tall(a: &Matrix) -> Result<SvdResult> {
    let m = a.rows();
    let n = a.cols();
    let mut b = a.clone();
    let mut v = Matrix::identity(n);
    let floor = ZERO_COL_TOL * a.frobenius_norm();
    let floor2 = floor * floor;

    if n >= 2 {
        let mut sweeps = 0;
        loop {
            let mut rotated = false;
            for p in 0..n - 1 {
                for q in p + 1..n {
                    rotated |= rotate_pair(&mut b, &mut v, p, q, floor2);
                }
            }
            if !rotated {
                break;
            }
            sweeps += 1;
            if sweeps >= MAX_SWEEPS {
                return Err(Error::NoConvergence(alloc::format!(
                    "svd did not settle within {MAX_SWEEPS} Jacobi sweeps"
                )));
            }
        }
    }

    // Columns of b are now mutually orthogonal; their norms are the singular
    // values. Sort descending, ties keeping the sweep-order position. Frozen
    // sub-floor columns carry no reliable direction, so they are snapped to
    // zero and rebuilt by completion below.
    let norms: Vec<f64> =
        (0..n).map(|j| norm2(b.column(j))).map(|s| if s <= floor { 0.0 } else { s }).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());

    let mut left = Matrix::zeros(m, n);
    let mut right = Matrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        let sigma = norms[j];
        values.push(sigma);
        right.column_mut(slot).copy_from_slice(v.column(j));
        if sigma > 0.0 {
            let (src, dst) = (b.column(j), left.column_mut(slot));
            for i in 0..m {
                dst[i] = src[i] / sigma;
            }
        } else {
            missing.push(slot);
        }
    }
    if !missing.is_empty() {
        complete_left(&mut left, &values, &missing);
    }
    Ok(SvdResult { left, singular_values: values, right })
}

/// Orthogonalizes columns `p < q` of `b` if needed, mirroring the rotation
/// onto `v`. Returns whether a rotation was applied.
fn rotate_pair(b: &mut Matrix, v: &mut Matrix, p: usize, q: usize, floor2: f64) -> bool {
    let alpha = dot(b.column(p), b.column(p));
    let beta = dot(b.column(q), b.column(q));
    if alpha <= floor2 || beta <= floor2 {
        return false;
    }
    let gamma = dot(b.column(p), b.column(q));
    if gamma == 0.0 || gamma.abs() <= ORTHO_TOL * (alpha * beta).sqrt() {
        return false;
    }
    let zeta = (beta - alpha) / (2.0 * gamma);
    let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
    let t = sign / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = c * t;
    apply_rotation(b, p, q, c, s);
    apply_rotation(v, p, q, c, s);
    true
}

fn apply_rotation(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let (col_p, col_q) = m.two_columns_mut(p, q);
    for (x, y) in col_p.iter_mut().zip(col_q.iter_mut()) {
        let rx = c * *x - s * *y;
        let ry = s * *x + c * *y;
        *x = rx;
        *y = ry;
    }
}

/// Fills the `missing` (zero-singular-value) columns of `left` with vectors
/// orthonormal to the already-filled ones. Deterministic: standard basis
/// vectors are tried in index order and accepted when their orthogonalized
/// residual stays large; any slots still open afterwards take the candidate
/// with the largest residual instead.
fn complete_left(left: &mut Matrix, values: &[f64], missing: &[usize]) {
    let m = left.rows();
    let mut filled: Vec<usize> = (0..values.len()).filter(|&s| values[s] > 0.0).collect();
    let mut open: Vec<usize> = missing.to_vec();

    // Cheap pass: accept any standard basis vector whose residual stays large.
    let mut candidate = 0;
    while !open.is_empty() && candidate < m {
        let (nrm, r) = orthogonalized_candidate(left, &filled, candidate);
        if nrm > 0.5 {
            let slot = open.remove(0);
            store_unit(left, slot, &r, nrm);
            filled.push(slot);
        }
        candidate += 1;
    }
    // Rare fallback: scan all candidates and take the largest residual.
    while !open.is_empty() {
        let slot = open.remove(0);
        let mut best_norm = 0.0_f64;
        let mut best_r = Vec::new();
        for cand in 0..m {
            let (nrm, r) = orthogonalized_candidate(left, &filled, cand);
            if nrm > best_norm {
                best_norm = nrm;
                best_r = r;
            }
        }
        store_unit(left, slot, &best_r, best_norm);
        filled.push(slot);
    }
}

fn orthogonalized_candidate(left: &Matrix, filled: &[usize], candidate: usize) -> (f64, Vec<f64>) {
    let m = left.rows();
    let mut r = vec![0.0; m];
    r[candidate] = 1.0;
    for _ in 0..2 {
        for &f in filled {
            let col = left.column(f);
            let coef = dot(&r, col);
            for i in 0..m {
                r[i] -= coef * col[i];
            }
        }
    }
    (norm2(&r), r)
}

fn store_unit(left: &mut Matrix, slot: usize, r: &[f64], nrm: f64) {
    let dst = left.column_mut(slot);
    for (d, x) in dst.iter_mut().zip(r) {
        *d = x / nrm;
    }
}

/// Applies the sign convention: per singular triplet, the largest-magnitude
/// entry of the right vector is non-negative, ties broken by lowest index.
fn fix_signs(out: &mut SvdResult) {
    for j in 0..out.singular_values.len() {
        let col = out.right.column(j);
        let mut best = 0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            for x in out.right.column_mut(j) {
                *x = -*x;
            }
            for x in out.left.column_mut(j) {
                *x = -*x;
            }
        }
    }
}

/// Matrix whose columns form an orthonormal basis of a linear subspace.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    matrix: Matrix,
}

impl OrthonormalBasis {
    /// Wraps `matrix`, verifying `B^T B = I` to within `1e-10` per entry.
    pub fn new(matrix: Matrix) -> Result<Self> {
        if matrix.cols() == 0 || matrix.cols() > matrix.rows() {
            return Err(Error::InvalidParameter(alloc::format!(
                "basis must have 1..=rows columns, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        matrix.ensure_finite()?;
        for a in 0..matrix.cols() {
            for b in a..matrix.cols() {
                let g = dot(matrix.column(a), matrix.column(b));
                let target = if a == b { 1.0 } else { 0.0 };
                if (g - target).abs() > BASIS_TOL {
                    return Err(Error::InvalidParameter(alloc::format!(
                        "columns {a} and {b} are not orthonormal (gram entry {g})"
                    )));
                }
            }
        }
        Ok(OrthonormalBasis { matrix })
    }

    /// Wraps a matrix already known to have orthonormal columns.
    pub(crate) fn new_unchecked(matrix: Matrix) -> Self {
        OrthonormalBasis { matrix }
    }

    /// Dimension of the surrounding space.
    pub fn ambient_dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Dimension of the spanned subspace.
    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Residual of `x` against the subspace: `x - B B^T x`.
    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ambient_dim() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "point has {} coordinates, basis lives in dimension {}",
                x.len(),
                self.ambient_dim()
            )));
        }
        let mut r = x.to_vec();
        for j in 0..self.dim() {
            let col = self.matrix.column(j);
            let coef = dot(x, col);
            for i in 0..r.len() {
                r[i] -= coef * col[i];
            }
        }
        Ok(r)
    }
}

/// Fits a `dim`-dimensional subspace to the columns of `points` by taking
/// the first `dim` left singular vectors — the best fit in the least-squares
/// sense.
pub fn fit_local_basis(points: &Matrix, dim: usize) -> Result<OrthonormalBasis> {
    if dim == 0 || dim > points.rows().min(points.cols()) {
        return Err(Error::InvalidParameter(alloc::format!(
            "cannot fit a {dim}-dimensional subspace to a {}x{} point set",
            points.rows(),
            points.cols()
        )));
    }
    let decomp = svd(points)?;
    let basis = Matrix::from_fn(points.rows(), dim, |i, j| decomp.left.get(i, j));
    Ok(OrthonormalBasis::new_unchecked(basis))
}

/// Distance from `x` to the subspace spanned by `basis`, measured as the
/// p-norm of the projection residual `x - B B^T x`.
pub fn residual_distance(x: &[f64], basis: &OrthonormalBasis, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!("norm order must be >= 1, got {p}")));
    }
    Ok(pnorm(&basis.residual(x)?, p))
}

/// Principal angles between two subspaces of the same ambient space, in
/// radians, ascending; `min(dim_a, dim_b)` of them. The cosines are the
/// singular values of `A^T B`, clamped into `[0, 1]` before `acos`.
pub fn principal_angles(a: &OrthonormalBasis, b: &OrthonormalBasis) -> Result<Vec<f64>> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "bases live in dimensions {} and {}",
            a.ambient_dim(),
            b.ambient_dim()
        )));
    }
    let gram = a.matrix().transposed().multiply(b.matrix())?;
    let decomp = svd(&gram)?;
    Ok(decomp.singular_values.iter().map(|&c| c.min(1.0).acos()).collect())
}

/// Number of singular values exceeding `rel_tol` times the largest one.
pub fn numerical_rank(m: &Matrix, rel_tol: f64) -> Result<usize> {
    let values = svd(m)?.singular_values;
    let top = values[0];
    if top == 0.0 {
        return Ok(0);
    }
    Ok(values.iter().filter(|&&s| s > rel_tol * top).count())
}

/// The vector p-norm `(Σ |v_i|^p)^(1/p)` for finite `p >= 1`.
pub fn pnorm(v: &[f64], p: f64) -> f64 {
    debug_assert!(p >= 1.0 && p.is_finite());
    if p == 2.0 {
        norm2(v)
    } else if p == 1.0 {
        v.iter().map(|x| x.abs()).sum()
    } else {
        let sum: f64 = v.iter().map(|x| x.abs().powf(p)).sum();
        sum.powf(1.0 / p)
    }
}
