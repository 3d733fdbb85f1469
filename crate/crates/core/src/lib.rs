//! Subspace segmentation by nearness to local subspaces.
//!
//! Given a data matrix whose columns are drawn from a union of `n`
//! equal-dimensional linear subspaces, the pipeline in [`pipeline`] recovers
//! which column belongs to which subspace:
//!
//! 1. reduce to the top-`r` right-singular rows and normalize columns,
//! 2. fit a local subspace to each point and its nearest neighbors,
//! 3. measure every point's distance to every local subspace,
//! 4. binarize the distances with a data-driven threshold,
//! 5. spectrally cluster the resulting similarity matrix.
//!
//! The supporting pieces are split out: [`matrix`], [`svd`] and [`kmeans`]
//! hold the dense numerics, [`datagen`] draws synthetic unions of subspaces
//! and rigid-motion track sets, and [`eval`] scores segmentations against
//! ground truth.
//!
//! The crate is `no_std` (with `alloc`) and fully deterministic: every
//! randomized routine takes an explicit seed, and equal inputs produce
//! bitwise-equal outputs.

#![no_std]

extern crate alloc;

pub mod datagen;
pub mod error;
pub mod eval;
pub mod kmeans;
pub mod matrix;
pub mod pipeline;
pub mod svd;

pub use error::Error;
pub use matrix::Matrix;
pub use pipeline::{segment, Diagnostics, NlsConfig, RankMode};

/// Cluster assignment, one entry per data point; labels are `0..n`.
pub type Labeling = alloc::vec::Vec<usize>;
