//! Backbone arithmetic and feature-map diagnostics: stage output
//! shapes, receptive fields, convolution FLOPs, and histogram /
//! montage / sparsity summaries of dumped feature tensors.

mod backbone;
mod flops;
mod histogram;
mod montage;
mod receptive;
mod tensor;

pub use backbone::{load_backbone_spec, presets, BackboneSpec, BlockKind, BlockSpec, BlockSummary};
pub use flops::conv_flops;
pub use histogram::{feature_histogram, FeatureHistogram};
pub use montage::{default_grid, feature_montage};
pub use receptive::{cumulative_receptive_field, LayerSpec};
pub use tensor::{read_feature_tensor, sparsity, write_feature_tensor, FeatureTensor, TensorDType};

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("backbone spec: {0}")]
    BadSpec(String),
    #[error("feature tensor: {0}")]
    BadTensor(String),
    #[error("histogram: {0}")]
    BadHistogram(String),
    #[error("montage grid {rows}x{cols} cannot hold {channels} channels")]
    GridTooSmall {
        rows: usize,
        cols: usize,
        channels: usize,
    },
    #[error("epsilon must be finite and non-negative, got {0}")]
    BadEpsilon(f64),
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {source}")]
    SpecParse {
        path: PathBuf,
        source: serde_json::Error,
    },
}
