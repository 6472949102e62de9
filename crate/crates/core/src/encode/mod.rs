//! Three-channel pseudo-image encoding.
//!
//! A gravity-aligned organized cloud becomes an RGB-like image whose
//! channels are depth, height above a per-image floor reference, and the
//! signed angle between consecutive scanline steps and the up axis. Each
//! channel is min-max normalized per image over the cells valid in all
//! three channels; everything else is stored as exactly 0.

mod channels;
mod io;
mod pseudo;

pub use channels::{depth_channel, height_channel, percentile, signed_angle_channel, ChannelImage};
pub use io::{read_meta_json, read_pseudo_png, write_meta_json, write_pseudo_png, PngBitDepth};
pub use pseudo::{assemble_dhs, combine_channels, EncodeMeta, PseudoImage};

use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("channel has no valid cells")]
    EmptyChannel,
    #[error("no cell is valid in all three channels")]
    EmptyImage,
    #[error("channel dimensions disagree: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("percentile must lie in [0, 100], got {0}")]
    BadPercentile(f64),
    #[error("cloud must be at least 1x1, got {width}x{height}")]
    EmptyCloud { width: usize, height: usize },
    #[error("channel {channel} cell {index} holds {value}, outside [0, 1]")]
    OutOfRange {
        channel: usize,
        index: usize,
        value: f64,
    },
    #[error("missing cell {index} holds a nonzero value in channel {channel}")]
    NonzeroMissing { channel: usize, index: usize },
    #[error("png: {0}")]
    Png(#[from] image::ImageError),
    #[error("{path}: expected an RGB png with 8- or 16-bit channels, got {found}")]
    NotRgb { path: PathBuf, found: String },
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {source}")]
    MetaParse {
        path: PathBuf,
        source: serde_json::Error,
    },
}

/// How the depth channel reads a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthMode {
    /// Euclidean distance from the sensor origin.
    #[default]
    Range,
    /// The point's third coordinate. Meaningful on a sensor-frame cloud,
    /// where it is the distance along the optical axis.
    OpticalAxis,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EncodeOptions {
    pub depth_mode: DepthMode,
    /// Percentile of the up coordinate used as the floor reference.
    pub height_percentile: f64,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions {
            depth_mode: DepthMode::Range,
            height_percentile: 1.0,
        }
    }
}
