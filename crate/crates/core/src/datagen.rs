//! Synthetic ground-truthed data: unions of random subspaces with noise, and
//! affine-camera rigid-motion trajectories.
//!
//! Everything here is a pure function of its spec and seed; identical calls
//! produce identical bytes. Noise variates are drawn whether or not
//! `noise_sigma` is zero, so runs that differ only in the noise level share
//! their underlying geometry.

use alloc::vec;
use alloc::vec::Vec;

// f64 transcendentals under no_std; builds that pull std into the crate
// graph (tests, dev-dependency feature unification) shadow the trait with
// the inherent methods and leave the import unused.
#[allow(unused_imports)]
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::{norm2, Matrix};
use crate::svd::{principal_angles, svd, OrthonormalBasis};
use crate::Labeling;

/// Total rejection-sampling budget when an angle floor is demanded.
const MAX_ANGLE_ATTEMPTS: usize = 10_000;
/// Angle floors this close to a right angle are served by an exactly
/// orthogonal construction; rejection sampling cannot hit pi/2.
const ORTHOGONAL_DEMAND_TOL: f64 = 1.0e-9;

/// Recipe for a union of random subspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct UnionSpec {
    /// Ambient dimension `m`.
    pub ambient_dim: usize,
    /// Dimension `d` of every subspace.
    pub subspace_dim: usize,
    /// Number of subspaces `n`.
    pub num_subspaces: usize,
    /// Points drawn from each subspace; length `n`, entries >= 1.
    pub points_per_subspace: Vec<usize>,
    /// Standard deviation of additive Gaussian noise per coordinate.
    pub noise_sigma: f64,
    /// Optional floor (radians) on the smallest principal angle between any
    /// two subspaces. Values within 1e-9 of pi/2 request exact orthogonality,
    /// which needs `n * d <= m`.
    pub min_principal_angle: Option<f64>,
    pub seed: u64,
}

impl UnionSpec {
    /// A spec with `count` points in each of `n` subspaces and no constraints.
    pub fn new(ambient_dim: usize, subspace_dim: usize, num_subspaces: usize, count: usize) -> Self {
        UnionSpec {
            ambient_dim,
            subspace_dim,
            num_subspaces,
            points_per_subspace: vec![count; num_subspaces],
            noise_sigma: 0.0,
            min_principal_angle: None,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.ambient_dim == 0 || self.subspace_dim == 0 || self.num_subspaces == 0 {
            return Err(Error::InvalidParameter(
                "ambient dimension, subspace dimension and subspace count must be positive".into(),
            ));
        }
        if self.subspace_dim > self.ambient_dim {
            return Err(Error::InvalidParameter(alloc::format!(
                "subspace dimension {} exceeds ambient dimension {}",
                self.subspace_dim,
                self.ambient_dim
            )));
        }
        if self.points_per_subspace.len() != self.num_subspaces {
            return Err(Error::InvalidParameter(alloc::format!(
                "{} point counts for {} subspaces",
                self.points_per_subspace.len(),
                self.num_subspaces
            )));
        }
        if self.points_per_subspace.iter().any(|&c| c == 0) {
            return Err(Error::InvalidParameter("every subspace needs at least one point".into()));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(Error::InvalidParameter(alloc::format!(
                "noise sigma must be finite and >= 0, got {}",
                self.noise_sigma
            )));
        }
        if let Some(angle) = self.min_principal_angle {
            if !angle.is_finite()
                || angle < 0.0
                || angle > core::f64::consts::FRAC_PI_2 + ORTHOGONAL_DEMAND_TOL
            {
                return Err(Error::InvalidParameter(alloc::format!(
                    "principal angle floor must lie in [0, pi/2], got {angle}"
                )));
            }
            if self.num_subspaces >= 2 {
                if angle > 0.0 && 2 * self.subspace_dim > self.ambient_dim {
                    return Err(Error::Infeasible(alloc::format!(
                        "two {}-dimensional subspaces of a {}-dimensional space always \
                         intersect, so no positive angle floor is achievable",
                        self.subspace_dim,
                        self.ambient_dim
                    )));
                }
                if orthogonality_demanded(angle)
                    && self.num_subspaces * self.subspace_dim > self.ambient_dim
                {
                    return Err(Error::Infeasible(alloc::format!(
                        "{} pairwise orthogonal {}-dimensional subspaces need ambient \
                         dimension >= {}, got {}",
                        self.num_subspaces,
                        self.subspace_dim,
                        self.num_subspaces * self.subspace_dim,
                        self.ambient_dim
                    )));
                }
            }
        }
        Ok(())
    }
}

fn orthogonality_demanded(angle: f64) -> bool {
    angle >= core::f64::consts::FRAC_PI_2 - ORTHOGONAL_DEMAND_TOL
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Orthonormal basis of the column space of a Gaussian draw; redraws in the
/// measure-zero event of a rank drop.
fn random_orthonormal(ambient: usize, dim: usize, rng: &mut ChaCha8Rng) -> Result<OrthonormalBasis> {
    loop {
        let g = gaussian_matrix(ambient, dim, rng);
        let decomp = svd(&g)?;
        if decomp.singular_values[dim - 1] > 0.0 {
            let cols = Matrix::from_fn(ambient, dim, |i, j| decomp.left.get(i, j));
            return Ok(OrthonormalBasis::new_unchecked(cols));
        }
    }
}

/// A unit vector uniform on the sphere in `dim` dimensions.
fn unit_sphere(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let nrm = norm2(&v);
        if nrm > 0.0 {
            for x in v.iter_mut() {
                *x /= nrm;
            }
            return v;
        }
    }
}

/// Draws the subspace bases for a union spec.
fn draw_bases(spec: &UnionSpec, rng: &mut ChaCha8Rng) -> Result<Vec<OrthonormalBasis>> {
    let (m, d, n) = (spec.ambient_dim, spec.subspace_dim, spec.num_subspaces);
    if n >= 2 && spec.min_principal_angle.is_some_and(orthogonality_demanded) {
        // One joint orthonormalization: d-column groups of an orthonormal
        // m x (n*d) frame are exactly pairwise orthogonal.
        loop {
            let g = gaussian_matrix(m, n * d, rng);
            let decomp = svd(&g)?;
            if decomp.singular_values[n * d - 1] > 0.0 {
                return Ok((0..n)
                    .map(|s| {
                        let cols =
                            Matrix::from_fn(m, d, |i, j| decomp.left.get(i, s * d + j));
                        OrthonormalBasis::new_unchecked(cols)
                    })
                    .collect());
            }
        }
    }

    let floor = spec.min_principal_angle;
    let mut bases: Vec<OrthonormalBasis> = Vec::with_capacity(n);
    let mut attempts = 0;
    while bases.len() < n {
        attempts += 1;
        if attempts > MAX_ANGLE_ATTEMPTS {
            return Err(Error::Infeasible(alloc::format!(
                "gave up after {MAX_ANGLE_ATTEMPTS} attempts to draw {n} subspaces with \
                 pairwise principal angles >= {:.4} rad",
                floor.unwrap_or(0.0)
            )));
        }
        let candidate = random_orthonormal(m, d, rng)?;
        let admissible = match floor {
            None => true,
            Some(f) => bases.iter().try_fold(true, |ok, b| -> Result<bool> {
                Ok(ok && principal_angles(&candidate, b)?[0] >= f)
            })?,
        };
        if admissible {
            bases.push(candidate);
        }
    }
    Ok(bases)
}

/// Samples a union of random subspaces.
///
/// Each point is a uniform draw from the unit sphere of its subspace plus
/// `noise_sigma` times a standard Gaussian per ambient coordinate. Returns
/// the points as matrix columns, in subspace order, with true labels.
pub fn sample_union(spec: &UnionSpec) -> Result<(Matrix, Labeling)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let bases = draw_bases(spec, &mut rng)?;

    let total: usize = spec.points_per_subspace.iter().sum();
    let m = spec.ambient_dim;
    let mut w = Matrix::zeros(m, total);
    let mut labels: Labeling = Vec::with_capacity(total);
    let mut col = 0;
    for (idx, (basis, &count)) in bases.iter().zip(&spec.points_per_subspace).enumerate() {
        for _ in 0..count {
            let coeff = unit_sphere(spec.subspace_dim, &mut rng);
            let dst = w.column_mut(col);
            for (j, &c) in coeff.iter().enumerate() {
                let bcol = basis.matrix().column(j);
                for i in 0..m {
                    dst[i] += c * bcol[i];
                }
            }
            // Drawn unconditionally so the geometry is seed-stable across
            // noise levels.
            for x in dst.iter_mut() {
                let e: f64 = StandardNormal.sample(&mut rng);
                *x += spec.noise_sigma * e;
            }
            labels.push(idx);
            col += 1;
        }
    }
    Ok((w, labels))
}

/// Feature tracks across frames with ground truth, the motion-segmentation
/// input format.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    pub num_frames: usize,
    /// Per tracked point, its `(x, y)` image position in every frame.
    pub tracks: Vec<Vec<(f64, f64)>>,
    /// True object index per track, when known.
    pub labels: Option<Labeling>,
}

impl TrajectorySet {
    pub fn num_tracks(&self) -> usize {
        self.tracks.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_frames < 2 {
            return Err(Error::InvalidParameter(alloc::format!(
                "need at least 2 frames, got {}",
                self.num_frames
            )));
        }
        for (j, track) in self.tracks.iter().enumerate() {
            if track.len() != self.num_frames {
                return Err(Error::ShapeMismatch(alloc::format!(
                    "track {j} has {} samples, expected {}",
                    track.len(),
                    self.num_frames
                )));
            }
            if track.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                return Err(Error::InvalidParameter(alloc::format!(
                    "track {j} contains non-finite coordinates"
                )));
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.tracks.len() {
                return Err(Error::ShapeMismatch(alloc::format!(
                    "{} labels for {} tracks",
                    labels.len(),
                    self.tracks.len()
                )));
            }
        }
        Ok(())
    }
}

/// A rigid 3-D point set with its per-frame pose.
#[derive(Debug, Clone)]
pub struct RigidObject {
    /// Body-frame points, one per column (3 x P, P >= 4).
    pub points: Matrix,
    /// World rotation per frame, 3x3 each.
    pub rotations: Vec<Matrix>,
    /// World translation per frame.
    pub translations: Vec<[f64; 3]>,
}

/// A per-frame 2x4 affine projection.
#[derive(Debug, Clone)]
pub struct AffineCamera {
    pub frames: Vec<Matrix>,
}

/// Projects rigidly moving 3-D objects through an affine camera.
///
/// The track of point `p` of an object at frame `f` is
/// `M_f * [R_f p + t_f; 1]` plus per-coordinate Gaussian noise. With zero
/// noise every object's trajectory block has rank at most 4.
pub fn synth_affine_motion(
    frames: usize,
    objects: &[RigidObject],
    camera: &AffineCamera,
    noise_sigma: f64,
    seed: u64,
) -> Result<TrajectorySet> {
    if frames < 2 {
        return Err(Error::InvalidParameter(alloc::format!(
            "need at least 2 frames, got {frames}"
        )));
    }
    if objects.is_empty() {
        return Err(Error::InvalidParameter("need at least one object".into()));
    }
    if !noise_sigma.is_finite() || noise_sigma < 0.0 {
        return Err(Error::InvalidParameter(alloc::format!(
            "noise sigma must be finite and >= 0, got {noise_sigma}"
        )));
    }
    if camera.frames.len() != frames {
        return Err(Error::ShapeMismatch(alloc::format!(
            "camera has {} frames, expected {frames}",
            camera.frames.len()
        )));
    }
    for (f, proj) in camera.frames.iter().enumerate() {
        if proj.rows() != 2 || proj.cols() != 4 {
            return Err(Error::ShapeMismatch(alloc::format!(
                "camera frame {f} is {}x{}, expected 2x4",
                proj.rows(),
                proj.cols()
            )));
        }
        proj.ensure_finite()?;
        if proj.as_slice().iter().all(|&x| x == 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "camera frame {f} is the zero matrix"
            )));
        }
    }
    for (o, obj) in objects.iter().enumerate() {
        if obj.points.rows() != 3 || obj.points.cols() < 4 {
            return Err(Error::InvalidParameter(alloc::format!(
                "object {o} must be 3 x P with P >= 4 points, got {}x{}",
                obj.points.rows(),
                obj.points.cols()
            )));
        }
        obj.points.ensure_finite()?;
        if obj.rotations.len() != frames || obj.translations.len() != frames {
            return Err(Error::ShapeMismatch(alloc::format!(
                "object {o} has {} rotations and {} translations for {frames} frames",
                obj.rotations.len(),
                obj.translations.len()
            )));
        }
        for (f, rot) in obj.rotations.iter().enumerate() {
            if rot.rows() != 3 || rot.cols() != 3 {
                return Err(Error::ShapeMismatch(alloc::format!(
                    "object {o} rotation {f} is {}x{}, expected 3x3",
                    rot.rows(),
                    rot.cols()
                )));
            }
            rot.ensure_finite()?;
        }
        if obj.translations.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!(
                "object {o} has non-finite translations"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tracks = Vec::new();
    let mut labels: Labeling = Vec::new();
    for (o, obj) in objects.iter().enumerate() {
        for p in 0..obj.points.cols() {
            let body = obj.points.column(p);
            let mut track = Vec::with_capacity(frames);
            for f in 0..frames {
                let rot = &obj.rotations[f];
                let t = &obj.translations[f];
                let mut world = [t[0], t[1], t[2], 1.0];
                for i in 0..3 {
                    for j in 0..3 {
                        world[i] += rot.get(i, j) * body[j];
                    }
                }
                let proj = &camera.frames[f];
                let mut xy = [0.0_f64; 2];
                for (i, coord) in xy.iter_mut().enumerate() {
                    for (j, &w) in world.iter().enumerate() {
                        *coord += proj.get(i, j) * w;
                    }
                    let e: f64 = StandardNormal.sample(&mut rng);
                    *coord += noise_sigma * e;
                }
                track.push((xy[0], xy[1]));
            }
            tracks.push(track);
            labels.push(o);
        }
    }
    Ok(TrajectorySet { num_frames: frames, tracks, labels: Some(labels) })
}

/// Stacks a track set into the `2F x N` measurement matrix whose column `j`
/// interleaves track `j` as `(x_1, y_1, x_2, y_2, ..., x_F, y_F)`.
pub fn trajectory_matrix(ts: &TrajectorySet) -> Result<Matrix> {
    ts.validate()?;
    let f = ts.num_frames;
    let n = ts.num_tracks();
    let mut w = Matrix::zeros(2 * f, n);
    for (j, track) in ts.tracks.iter().enumerate() {
        let col = w.column_mut(j);
        for (frame, &(x, y)) in track.iter().enumerate() {
            col[2 * frame] = x;
            col[2 * frame + 1] = y;
        }
    }
    Ok(w)
}

/// Rotation by `angle` radians about a (not necessarily unit) axis.
pub fn rotation_about_axis(axis: [f64; 3], angle: f64) -> Result<Matrix> {
    let nrm = norm2(&axis);
    if nrm == 0.0 || !nrm.is_finite() || !angle.is_finite() {
        return Err(Error::InvalidParameter("rotation axis must be nonzero and finite".into()));
    }
    let k = [axis[0] / nrm, axis[1] / nrm, axis[2] / nrm];
    let (c, s) = (angle.cos(), angle.sin());
    let mut r = Matrix::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            let cross = match (i, j) {
                (0, 1) => -k[2],
                (0, 2) => k[1],
                (1, 0) => k[2],
                (1, 2) => -k[0],
                (2, 0) => -k[1],
                (2, 1) => k[0],
                _ => 0.0,
            };
            let id = if i == j { 1.0 } else { 0.0 };
            r.set(i, j, c * id + s * cross + (1.0 - c) * k[i] * k[j]);
        }
    }
    Ok(r)
}

/// Recipe for a randomized multi-object rigid-motion scene.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSceneSpec {
    pub frames: usize,
    pub num_objects: usize,
    pub points_per_object: usize,
    pub seed: u64,
}

/// Draws independently moving rigid objects and a slowly moving affine
/// camera, ready for [`synth_affine_motion`].
pub fn random_motion_scene(spec: &MotionSceneSpec) -> Result<(Vec<RigidObject>, AffineCamera)> {
    if spec.frames < 2 {
        return Err(Error::InvalidParameter(alloc::format!(
            "need at least 2 frames, got {}",
            spec.frames
        )));
    }
    if spec.num_objects == 0 || spec.points_per_object < 4 {
        return Err(Error::InvalidParameter(
            "need at least one object and four points per object".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut objects = Vec::with_capacity(spec.num_objects);
    for o in 0..spec.num_objects {
        // Each body sits at its own offset and spins about its own axis while
        // drifting, so different objects trace independent motions.
        let offset = [4.0 * o as f64, -2.0 * o as f64, 6.0 + o as f64];
        let points = Matrix::from_fn(3, spec.points_per_object, |i, _| {
            let e: f64 = StandardNormal.sample(&mut rng);
            offset[i] + e
        });
        let axis = unit_sphere(3, &mut rng);
        let axis = [axis[0], axis[1], axis[2]];
        let rate = rng.random_range(0.03..0.1);
        // Linear drift plus a per-axis oscillation with its own frequency and
        // phase: purely linear paths through a slow camera leave all objects'
        // translation tracks in one shared ramp direction, collapsing the
        // combined trajectory rank below 4 per object.
        let velocity = [
            rng.random_range(-0.06..0.06),
            rng.random_range(-0.06..0.06),
            rng.random_range(-0.06..0.06),
        ];
        let amplitude = [
            rng.random_range(0.3..1.0),
            rng.random_range(0.3..1.0),
            rng.random_range(0.3..1.0),
        ];
        let frequency = [
            rng.random_range(0.15..0.45),
            rng.random_range(0.15..0.45),
            rng.random_range(0.15..0.45),
        ];
        let phase = [
            rng.random_range(0.0..core::f64::consts::TAU),
            rng.random_range(0.0..core::f64::consts::TAU),
            rng.random_range(0.0..core::f64::consts::TAU),
        ];
        let mut rotations = Vec::with_capacity(spec.frames);
        let mut translations = Vec::with_capacity(spec.frames);
        for f in 0..spec.frames {
            let t = f as f64;
            rotations.push(rotation_about_axis(axis, rate * t)?);
            let mut shift = [0.0; 3];
            for i in 0..3 {
                shift[i] = velocity[i] * t
                    + amplitude[i] * ((frequency[i] * t + phase[i]).sin() - phase[i].sin());
            }
            translations.push(shift);
        }
        objects.push(RigidObject { points, rotations, translations });
    }

    let cam_axis = unit_sphere(3, &mut rng);
    let cam_axis = [cam_axis[0], cam_axis[1], cam_axis[2]];
    let cam_rate = rng.random_range(0.005..0.02);
    let base: Vec<f64> = (0..6).map(|_| StandardNormal.sample(&mut rng)).collect();
    let drift = [rng.random_range(-0.03..0.03), rng.random_range(-0.03..0.03)];
    let mut frames = Vec::with_capacity(spec.frames);
    for f in 0..spec.frames {
        let rot = rotation_about_axis(cam_axis, cam_rate * f as f64)?;
        let mut proj = Matrix::zeros(2, 4);
        for i in 0..2 {
            for j in 0..3 {
                let mut v = 0.0;
                for l in 0..3 {
                    v += base[i * 3 + l] * rot.get(l, j);
                }
                proj.set(i, j, v);
            }
            proj.set(i, 3, drift[i] * f as f64);
        }
        frames.push(proj);
    }
    Ok((objects, AffineCamera { frames }))
}
