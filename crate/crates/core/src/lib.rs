//! Core library for turning organized depth captures into three-channel
//! pseudo-images (depth / height above floor / signed angle), augmenting
//! them together with their 2D boxes, scoring detections with a
//! multi-threshold average-precision protocol, and reproducing backbone
//! shape, receptive-field, and FLOPs arithmetic.
//!
//! The crate is organized by pipeline stage:
//!
//! * [`ingest`]: depth PNG decoding, pinhole back-projection, gravity
//!   alignment, dataset manifests.
//! * [`encode`]: the three channels, per-image normalization, pseudo-image
//!   PNG round-trips.
//! * [`augment`]: seeded flip / keep-ratio resize / crop geometry applied
//!   to images and boxes in lockstep.
//! * [`eval`]: IoU, greedy matching, interpolated AP, area ranges, and
//!   category-subgroup summaries.
//! * [`analysis`]: backbone stage shapes, receptive fields, convolution
//!   FLOPs, and feature-map histogram / montage / sparsity diagnostics.
//! * [`synthetic`]: deterministic scene and point-cloud generators used by
//!   tests, benches, and the CLI smoke path.
//!
//! Heavy loops go through [`parallel`], which switches between rayon and
//! plain iterators via the `parallel` cargo feature (enabled by default).

pub mod analysis;
pub mod augment;
pub mod encode;
pub mod eval;
pub mod ingest;
pub mod parallel;
pub mod synthetic;

pub use eval::boxes::{iou, BoxXYWH};
