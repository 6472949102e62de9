//! Axis-aligned boxes in (x, y, width, height) form and their overlap.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxXYWH {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoxXYWH {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        BoxXYWH { x, y, w, h }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        BoxXYWH::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x, self.y, self.w, self.h]
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn x2(&self) -> f64 {
        self.x + self.w
    }

    pub fn y2(&self) -> f64 {
        self.y + self.h
    }

    /// Finite coordinates and non-negative extents.
    pub fn is_well_formed(&self) -> bool {
        [self.x, self.y, self.w, self.h]
            .iter()
            .all(|v| v.is_finite())
            && self.w >= 0.0
            && self.h >= 0.0
    }
}

/// Intersection over union. Boxes with zero or negative overlap, and
/// pairs whose union has no area, score 0.
pub fn iou(a: &BoxXYWH, b: &BoxXYWH) -> f64 {
    let iw = (a.x2().min(b.x2()) - a.x.max(b.x)).max(0.0);
    let ih = (a.y2().min(b.y2()) - a.y.max(b.y)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    inter / union
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identical_boxes_score_one() {
        let b = BoxXYWH::new(3.0, 4.0, 10.0, 5.0);
        assert_eq!(iou(&b, &b), 1.0);
    }

    #[test]
    fn disjoint_boxes_score_zero() {
        let a = BoxXYWH::new(0.0, 0.0, 2.0, 2.0);
        let b = BoxXYWH::new(5.0, 5.0, 2.0, 2.0);
        assert_eq!(iou(&a, &b), 0.0);
        // Touching edges count as no overlap.
        let c = BoxXYWH::new(2.0, 0.0, 2.0, 2.0);
        assert_eq!(iou(&a, &c), 0.0);
    }

    #[test]
    fn half_overlap_scores_one_third() {
        let a = BoxXYWH::new(0.0, 0.0, 2.0, 2.0);
        let b = BoxXYWH::new(1.0, 0.0, 2.0, 2.0);
        assert_relative_eq!(iou(&a, &b), 1.0 / 3.0);
    }

    #[test]
    fn quarter_offset_scores_one_seventh() {
        let a = BoxXYWH::new(0.0, 0.0, 2.0, 2.0);
        let b = BoxXYWH::new(1.0, 1.0, 2.0, 2.0);
        assert_relative_eq!(iou(&a, &b), 1.0 / 7.0);
    }

    #[test]
    fn degenerate_boxes_score_zero() {
        let a = BoxXYWH::new(0.0, 0.0, 0.0, 5.0);
        let b = BoxXYWH::new(0.0, 0.0, 3.0, 3.0);
        assert_eq!(iou(&a, &b), 0.0);
        assert_eq!(iou(&a, &a), 0.0);
    }

    #[test]
    fn well_formedness_checks_extents() {
        assert!(BoxXYWH::new(0.0, 0.0, 1.0, 1.0).is_well_formed());
        assert!(BoxXYWH::new(0.0, 0.0, 0.0, 0.0).is_well_formed());
        assert!(!BoxXYWH::new(0.0, 0.0, -1.0, 1.0).is_well_formed());
        assert!(!BoxXYWH::new(f64::NAN, 0.0, 1.0, 1.0).is_well_formed());
    }
}
