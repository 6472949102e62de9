//! Assembly of the three channels into one normalized pseudo-image.

use serde::{Deserialize, Serialize};

use super::channels::{depth_channel, height_channel, signed_angle_channel, ChannelImage};
use super::{EncodeError, EncodeOptions};
use crate::ingest::OrganizedPointCloud;

/// Normalized three-channel image. Channel order is depth, height,
/// signed angle. Stored values lie in [0, 1]; cells missing in any
/// channel are flagged and hold exactly 0 everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoImage {
    width: usize,
    height: usize,
    channels: [Vec<f64>; 3],
    missing: Vec<bool>,
}

impl PseudoImage {
    /// Builds a pseudo-image from already normalized channels, checking
    /// the invariants: every value in [0, 1] and missing cells exactly 0.
    pub fn new(
        width: usize,
        height: usize,
        channels: [Vec<f64>; 3],
        missing: Vec<bool>,
    ) -> Result<Self, EncodeError> {
        if width == 0 || height == 0 {
            return Err(EncodeError::EmptyCloud { width, height });
        }
        for (c, ch) in channels.iter().enumerate() {
            if ch.len() != width * height {
                return Err(EncodeError::DimensionMismatch(width, height, ch.len(), 1));
            }
            for (i, &v) in ch.iter().enumerate() {
                if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                    return Err(EncodeError::OutOfRange {
                        channel: c,
                        index: i,
                        value: v,
                    });
                }
                if missing.get(i).copied().unwrap_or(false) && v != 0.0 {
                    return Err(EncodeError::NonzeroMissing {
                        channel: c,
                        index: i,
                    });
                }
            }
        }
        if missing.len() != width * height {
            return Err(EncodeError::DimensionMismatch(
                width,
                height,
                missing.len(),
                1,
            ));
        }
        Ok(PseudoImage::from_parts(width, height, channels, missing))
    }

    pub(crate) fn from_parts(
        width: usize,
        height: usize,
        channels: [Vec<f64>; 3],
        missing: Vec<bool>,
    ) -> Self {
        for c in &channels {
            assert_eq!(c.len(), width * height, "channel grid size");
        }
        assert_eq!(missing.len(), width * height, "missing mask size");
        PseudoImage {
            width,
            height,
            channels,
            missing,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.channels[c]
    }

    pub fn value_at(&self, c: usize, u: usize, v: usize) -> f64 {
        self.channels[c][v * self.width + u]
    }

    pub fn is_missing(&self, u: usize, v: usize) -> bool {
        self.missing[v * self.width + u]
    }

    pub fn missing_mask(&self) -> &[bool] {
        &self.missing
    }

    pub fn valid_fraction(&self) -> f64 {
        let valid = self.missing.iter().filter(|m| !**m).count();
        valid as f64 / self.missing.len() as f64
    }
}

/// Normalization bookkeeping recorded next to each converted image.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncodeMeta {
    pub width: usize,
    pub height: usize,
    /// Raw channel minima (depth, height, angle) before normalization.
    pub channel_min: [f64; 3],
    pub channel_max: [f64; 3],
    pub valid_fraction: f64,
}

/// Fuses raw depth/height/angle channels: cells valid in all three form
/// the joint mask, each channel is min-max normalized over that mask,
/// and masked cells are zeroed in every channel.
pub fn combine_channels(
    depth: &ChannelImage,
    height: &ChannelImage,
    angle: &ChannelImage,
) -> Result<(PseudoImage, EncodeMeta), EncodeError> {
    let (w, h) = (depth.width(), depth.height());
    for other in [height, angle] {
        if other.width() != w || other.height() != h {
            return Err(EncodeError::DimensionMismatch(
                w,
                h,
                other.width(),
                other.height(),
            ));
        }
    }
    let n = w * h;
    let joint: Vec<bool> = depth
        .validity()
        .iter()
        .zip(height.validity())
        .zip(angle.validity())
        .map(|((&d, &h), &a)| d && h && a)
        .collect();

    let mut channels: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut channel_min = [0.0; 3];
    let mut channel_max = [0.0; 3];
    for (c, raw) in [depth, height, angle].into_iter().enumerate() {
        let (lo, hi) = raw.min_max_over(&joint).ok_or(EncodeError::EmptyImage)?;
        let range = hi - lo;
        if range == 0.0 {
            log::warn!("channel {c} is constant over the joint mask; normalizing to zeros");
        }
        channel_min[c] = lo;
        channel_max[c] = hi;
        channels[c] = (0..n)
            .map(|i| {
                if !joint[i] || range == 0.0 {
                    0.0
                } else {
                    (raw.values()[i] - lo) / range
                }
            })
            .collect();
    }

    let missing: Vec<bool> = joint.iter().map(|ok| !ok).collect();
    let image = PseudoImage::from_parts(w, h, channels, missing);
    let meta = EncodeMeta {
        width: w,
        height: h,
        channel_min,
        channel_max,
        valid_fraction: image.valid_fraction(),
    };
    Ok((image, meta))
}

/// Full encoding of a gravity-aligned cloud. The depth mode applies to
/// this cloud; callers that want optical-axis depth from the sensor
/// frame can build that channel themselves and use [`combine_channels`].
pub fn assemble_dhs(
    cloud: &OrganizedPointCloud,
    options: &EncodeOptions,
) -> Result<(PseudoImage, EncodeMeta), EncodeError> {
    if cloud.width() == 0 || cloud.height() == 0 {
        return Err(EncodeError::EmptyCloud {
            width: cloud.width(),
            height: cloud.height(),
        });
    }
    let d = depth_channel(cloud, options.depth_mode);
    let h = height_channel(cloud, options.height_percentile)?;
    let s = signed_angle_channel(cloud);
    combine_channels(&d, &h, &s)
}
