//! Pinhole back-projection and gravity alignment of organized clouds.

use nalgebra::Vector3;

use super::{CameraIntrinsics, DepthImage, GravityAlignment};
use crate::parallel;

/// Point cloud on the pixel grid of the depth image it came from.
/// Invalid cells keep a zero point and a cleared flag.
#[derive(Debug, Clone, PartialEq)]
pub struct OrganizedPointCloud {
    width: usize,
    height: usize,
    points: Vec<Vector3<f64>>,
    valid: Vec<bool>,
}

impl OrganizedPointCloud {
    /// Assembles a cloud from parallel point/validity arrays.
    ///
    /// Used by generators and tests; `back_project` is the usual source.
    pub fn from_parts(
        width: usize,
        height: usize,
        points: Vec<Vector3<f64>>,
        valid: Vec<bool>,
    ) -> Self {
        assert_eq!(points.len(), width * height, "point grid size");
        assert_eq!(valid.len(), width * height, "validity grid size");
        OrganizedPointCloud {
            width,
            height,
            points,
            valid,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn point_at(&self, u: usize, v: usize) -> Vector3<f64> {
        self.points[v * self.width + u]
    }

    pub fn is_valid(&self, u: usize, v: usize) -> bool {
        self.valid[v * self.width + u]
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn validity(&self) -> &[bool] {
        &self.valid
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }
}

/// Lifts each measured pixel into the sensor frame:
/// x = (u - cx) z / fx, y = (v - cy) z / fy. Missing depths produce
/// invalid cells.
pub fn back_project(depth: &DepthImage, k: &CameraIntrinsics) -> OrganizedPointCloud {
    let (w, h) = (depth.width(), depth.height());
    let rows = parallel::map_indexed(h, |v| {
        let mut points = Vec::with_capacity(w);
        let mut valid = Vec::with_capacity(w);
        for u in 0..w {
            let z = depth.depth_at(u, v);
            if z == 0.0 {
                points.push(Vector3::zeros());
                valid.push(false);
            } else {
                let x = (u as f64 - k.cx) * z / k.fx;
                let y = (v as f64 - k.cy) * z / k.fy;
                points.push(Vector3::new(x, y, z));
                valid.push(true);
            }
        }
        (points, valid)
    });
    let mut points = Vec::with_capacity(w * h);
    let mut valid = Vec::with_capacity(w * h);
    for (p, m) in rows {
        points.extend(p);
        valid.extend(m);
    }
    OrganizedPointCloud {
        width: w,
        height: h,
        points,
        valid,
    }
}

/// Rotates every valid point into the gravity-aligned frame. Validity
/// flags carry over unchanged; pairwise distances are preserved up to
/// floating-point rounding.
pub fn gravity_align(
    cloud: &OrganizedPointCloud,
    alignment: &GravityAlignment,
) -> OrganizedPointCloud {
    let r = alignment.matrix();
    let points = parallel::map_indexed(cloud.points.len(), |i| {
        if cloud.valid[i] {
            r * cloud.points[i]
        } else {
            cloud.points[i]
        }
    });
    OrganizedPointCloud {
        width: cloud.width,
        height: cloud.height,
        points,
        valid: cloud.valid.clone(),
    }
}
