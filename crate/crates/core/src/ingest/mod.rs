//! Depth capture ingestion: 16-bit PNG decoding, pinhole back-projection
//! into organized point clouds, gravity alignment, and dataset manifests.

mod cloud;
mod depth;
mod manifest;

pub use cloud::{back_project, gravity_align, OrganizedPointCloud};
pub use depth::{decode_depth_png, encode_depth_png, DepthImage};
pub use manifest::{load_manifest, save_manifest, FrameRecord, Manifest, SensorProfile};

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use thiserror::Error;

/// Deviation from `R^T R = I` (and from `det R = 1`) tolerated when
/// accepting a rotation matrix.
pub const ROTATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("png decode failed: {0}")]
    Png(#[from] image::ImageError),
    #[error("expected a 16-bit grayscale png, got {found}")]
    NotSixteenBit { found: String },
    #[error("depth scale must be a positive finite number, got {0}")]
    BadScale(f64),
    #[error("depth at ({u}, {v}) must be finite and non-negative, got {value}")]
    InvalidDepth { u: usize, v: usize, value: f64 },
    #[error("depth {value} m at ({u}, {v}) does not fit in 16 bits at scale {scale}")]
    DepthOutOfRange {
        u: usize,
        v: usize,
        value: f64,
        scale: f64,
    },
    #[error("intrinsics must be finite with fx > 0 and fy > 0: fx={fx} fy={fy} cx={cx} cy={cy}")]
    BadIntrinsics { fx: f64, fy: f64, cx: f64, cy: f64 },
    #[error("matrix is not a rotation: deviation {deviation:.3e} exceeds {tolerance:.0e}")]
    NotARotation { deviation: f64, tolerance: f64 },
    #[error("{what} holds {got} values, expected {expected} for {width}x{height}")]
    SizeMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
        width: usize,
        height: usize,
    },
    #[error("image dimensions must be nonzero, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },
    #[error("frame {frame:?} references unknown sensor {sensor:?}")]
    UnknownSensor { frame: String, sensor: String },
    #[error("duplicate frame id {0:?}")]
    DuplicateFrame(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {source}")]
    ManifestParse {
        path: PathBuf,
        source: serde_json::Error,
    },
}

/// Pinhole camera model: focal lengths and principal point in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self, IngestError> {
        let k = CameraIntrinsics { fx, fy, cx, cy };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        let finite = [self.fx, self.fy, self.cx, self.cy]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(IngestError::BadIntrinsics {
                fx: self.fx,
                fy: self.fy,
                cx: self.cx,
                cy: self.cy,
            });
        }
        Ok(())
    }
}

/// Rotation taking sensor-frame points into a gravity-aligned frame
/// whose z axis points up. Construction verifies orthonormality and a
/// positive determinant, so a held value is always a proper rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct GravityAlignment {
    matrix: Matrix3<f64>,
}

impl GravityAlignment {
    pub fn new(matrix: Matrix3<f64>) -> Result<Self, IngestError> {
        let gram = matrix.transpose() * matrix;
        let mut deviation: f64 = 0.0;
        for r in 0..3 {
            for c in 0..3 {
                let target = if r == c { 1.0 } else { 0.0 };
                deviation = deviation.max((gram[(r, c)] - target).abs());
            }
        }
        deviation = deviation.max((matrix.determinant() - 1.0).abs());
        if !deviation.is_finite() || deviation > ROTATION_TOLERANCE {
            return Err(IngestError::NotARotation {
                deviation,
                tolerance: ROTATION_TOLERANCE,
            });
        }
        Ok(GravityAlignment { matrix })
    }

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Result<Self, IngestError> {
        Self::new(Matrix3::from_row_slice(&[
            rows[0][0], rows[0][1], rows[0][2], // row 0
            rows[1][0], rows[1][1], rows[1][2], // row 1
            rows[2][0], rows[2][1], rows[2][2], // row 2
        ]))
    }

    pub fn identity() -> Self {
        GravityAlignment {
            matrix: Matrix3::identity(),
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }
}
