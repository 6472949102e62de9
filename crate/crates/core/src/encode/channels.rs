//! The three raw channels and their shared scalar-grid type.

use nalgebra::Vector3;

use super::{DepthMode, EncodeError};
use crate::ingest::OrganizedPointCloud;
use crate::parallel;

/// One scalar per grid cell with a validity mask. Raw channel values are
/// unnormalized; [`ChannelImage::normalized`] maps the valid cells to
/// [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl ChannelImage {
    pub fn new(width: usize, height: usize, values: Vec<f64>, valid: Vec<bool>) -> Self {
        assert_eq!(values.len(), width * height, "channel value grid size");
        assert_eq!(valid.len(), width * height, "channel mask grid size");
        ChannelImage {
            width,
            height,
            values,
            valid,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn value_at(&self, u: usize, v: usize) -> f64 {
        self.values[v * self.width + u]
    }

    pub fn is_valid(&self, u: usize, v: usize) -> bool {
        self.valid[v * self.width + u]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn validity(&self) -> &[bool] {
        &self.valid
    }

    /// Minimum and maximum over the cells marked valid by `mask`.
    pub(crate) fn min_max_over(&self, mask: &[bool]) -> Option<(f64, f64)> {
        let mut out: Option<(f64, f64)> = None;
        for (i, &m) in mask.iter().enumerate() {
            if m {
                let v = self.values[i];
                out = Some(match out {
                    None => (v, v),
                    Some((lo, hi)) => (lo.min(v), hi.max(v)),
                });
            }
        }
        out
    }

    pub fn min_max(&self) -> Option<(f64, f64)> {
        self.min_max_over(&self.valid)
    }

    /// Min-max normalizes valid cells to [0, 1]; masked cells become 0.
    /// A constant channel collapses to all zeros with a warning.
    pub fn normalized(&self) -> Result<ChannelImage, EncodeError> {
        let (lo, hi) = self.min_max().ok_or(EncodeError::EmptyChannel)?;
        let range = hi - lo;
        if range == 0.0 {
            log::warn!("constant channel (value {lo}); normalizing to zeros");
        }
        let values = self
            .values
            .iter()
            .zip(&self.valid)
            .map(|(&v, &ok)| {
                if !ok || range == 0.0 {
                    0.0
                } else {
                    (v - lo) / range
                }
            })
            .collect();
        Ok(ChannelImage {
            width: self.width,
            height: self.height,
            values,
            valid: self.valid.clone(),
        })
    }
}

/// Linear-interpolation percentile of already sorted, finite values.
/// `q` ranges over [0, 100].
pub fn percentile(sorted: &[f64], q: f64) -> Result<f64, EncodeError> {
    if !(0.0..=100.0).contains(&q) || q.is_nan() {
        return Err(EncodeError::BadPercentile(q));
    }
    if sorted.is_empty() {
        return Err(EncodeError::EmptyChannel);
    }
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        return Ok(sorted[lo]);
    }
    let t = pos - lo as f64;
    Ok(sorted[lo] * (1.0 - t) + sorted[hi] * t)
}

/// Distance of each valid point from the sensor, either the Euclidean
/// range or the third coordinate of the given cloud.
pub fn depth_channel(cloud: &OrganizedPointCloud, mode: DepthMode) -> ChannelImage {
    let points = cloud.points();
    let values = parallel::map_indexed(points.len(), |i| {
        if !cloud.validity()[i] {
            return 0.0;
        }
        match mode {
            DepthMode::Range => points[i].norm(),
            DepthMode::OpticalAxis => points[i].z,
        }
    });
    ChannelImage::new(
        cloud.width(),
        cloud.height(),
        values,
        cloud.validity().to_vec(),
    )
}

/// Height of each valid point above the floor reference: the q-th
/// percentile of the up (third) coordinate across all valid points.
/// Expects a gravity-aligned cloud.
pub fn height_channel(cloud: &OrganizedPointCloud, q: f64) -> Result<ChannelImage, EncodeError> {
    let mut ups: Vec<f64> = cloud
        .points()
        .iter()
        .zip(cloud.validity())
        .filter(|(_, &ok)| ok)
        .map(|(p, _)| p.z)
        .collect();
    if ups.is_empty() {
        return Err(EncodeError::EmptyChannel);
    }
    ups.sort_unstable_by(|a, b| a.total_cmp(b));
    let floor = percentile(&ups, q)?;
    let values = parallel::map_indexed(cloud.points().len(), |i| {
        if cloud.validity()[i] {
            cloud.points()[i].z - floor
        } else {
            0.0
        }
    });
    Ok(ChannelImage::new(
        cloud.width(),
        cloud.height(),
        values,
        cloud.validity().to_vec(),
    ))
}

/// Angle in degrees between `d` and the +z axis, in [0, 180]. Steps along
/// the axis itself come out exactly 0 or 180, and steps orthogonal to it
/// exactly 90.
fn angle_to_up(d: &Vector3<f64>) -> f64 {
    let horiz = d.x.hypot(d.y);
    if horiz == 0.0 {
        return if d.z >= 0.0 { 0.0 } else { 180.0 };
    }
    if d.z == 0.0 {
        return 90.0;
    }
    horiz.atan2(d.z).to_degrees()
}

/// Signed scanline angle. For cell k of a row, with forward differences
/// D_k = X_{k+1} - X_k, the value is the angle of D_k to the up axis,
/// negated when D_k and D_{k-1} point against each other
/// (sign of a zero dot product counts as positive). Cells missing a
/// neighbor, flanking an invalid cell, or adjacent to a zero-length step
/// are masked. Expects a gravity-aligned cloud.
pub fn signed_angle_channel(cloud: &OrganizedPointCloud) -> ChannelImage {
    let w = cloud.width();
    let rows = parallel::map_indexed(cloud.height(), |v| {
        let mut values = vec![0.0; w];
        let mut valid = vec![false; w];
        for k in 1..w.saturating_sub(1) {
            if !(cloud.is_valid(k - 1, v) && cloud.is_valid(k, v) && cloud.is_valid(k + 1, v)) {
                continue;
            }
            let cur = cloud.point_at(k + 1, v) - cloud.point_at(k, v);
            let prev = cloud.point_at(k, v) - cloud.point_at(k - 1, v);
            if cur.norm_squared() == 0.0 || prev.norm_squared() == 0.0 {
                continue;
            }
            let angle = angle_to_up(&cur);
            let sign = if cur.dot(&prev) < 0.0 { -1.0 } else { 1.0 };
            values[k] = sign * angle;
            valid[k] = true;
        }
        (values, valid)
    });
    let mut values = Vec::with_capacity(w * cloud.height());
    let mut valid = Vec::with_capacity(w * cloud.height());
    for (val, ok) in rows {
        values.extend(val);
        valid.extend(ok);
    }
    ChannelImage::new(w, cloud.height(), values, valid)
}
