//! Interpolated average precision from scored hit/miss outcomes.

use serde::{Deserialize, Serialize};

/// Precision sampling rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// 101 recall points 0.00, 0.01, ..., 1.00.
    #[default]
    Coco101,
    /// 11 recall points 0.0, 0.1, ..., 1.0.
    Pascal11,
}

impl Interpolation {
    fn grid(self) -> Vec<f64> {
        match self {
            Interpolation::Coco101 => (0..=100).map(|i| f64::from(i) / 100.0).collect(),
            Interpolation::Pascal11 => (0..=10).map(|i| f64::from(i) / 10.0).collect(),
        }
    }
}

/// Average precision over `(score, is_true_positive)` pairs against
/// `gt_count` ground-truth boxes.
///
/// Pairs are sorted by descending score (stable, so callers' input order
/// breaks ties), cumulative precision/recall points are computed, the
/// precision curve is replaced by its running maximum from the right,
/// and the result is the mean of that envelope sampled at the recall
/// grid (0 beyond the attained recall). Returns None when there is no
/// ground truth to recall.
pub fn average_precision(
    hits: &[(f64, bool)],
    gt_count: usize,
    interpolation: Interpolation,
) -> Option<f64> {
    if gt_count == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..hits.len()).collect();
    order.sort_by(|&a, &b| hits[b].0.total_cmp(&hits[a].0).then(a.cmp(&b)));

    let mut recalls = Vec::with_capacity(hits.len());
    let mut precisions = Vec::with_capacity(hits.len());
    let mut tp = 0usize;
    for (seen, &idx) in order.iter().enumerate() {
        if hits[idx].1 {
            tp += 1;
        }
        recalls.push(tp as f64 / gt_count as f64);
        precisions.push(tp as f64 / (seen + 1) as f64);
    }

    // Envelope: best precision at this recall or beyond.
    for i in (0..precisions.len().saturating_sub(1)).rev() {
        if precisions[i + 1] > precisions[i] {
            precisions[i] = precisions[i + 1];
        }
    }

    let grid = interpolation.grid();
    let mut total = 0.0;
    for &r in &grid {
        // First curve point reaching recall r.
        let at = recalls.partition_point(|&rec| rec < r);
        if at < precisions.len() {
            total += precisions[at];
        }
    }
    Some(total / grid.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn perfect_detections_score_one() {
        let hits = [(0.9, true), (0.8, true), (0.7, true)];
        assert_eq!(
            average_precision(&hits, 3, Interpolation::Coco101),
            Some(1.0)
        );
        assert_eq!(
            average_precision(&hits, 3, Interpolation::Pascal11),
            Some(1.0)
        );
    }

    #[test]
    fn no_ground_truth_yields_none() {
        assert_eq!(
            average_precision(&[(0.5, false)], 0, Interpolation::Coco101),
            None
        );
    }

    #[test]
    fn no_detections_score_zero() {
        assert_eq!(average_precision(&[], 4, Interpolation::Coco101), Some(0.0));
    }

    #[test]
    fn one_hit_one_miss_of_two_samples_the_grid() {
        // TP at rank 1, FP at rank 2, two ground truths: the envelope is
        // 1.0 up to recall 0.5 and 0 afterwards. 51 of the 101 grid
        // points lie at or below recall 0.5.
        let hits = [(0.9, true), (0.8, false)];
        let ap = average_precision(&hits, 2, Interpolation::Coco101).unwrap();
        assert_relative_eq!(ap, 51.0 / 101.0, epsilon = 1e-15);

        // With the 11-point rule, 6 of 11 points qualify.
        let ap11 = average_precision(&hits, 2, Interpolation::Pascal11).unwrap();
        assert_relative_eq!(ap11, 6.0 / 11.0, epsilon = 1e-15);
    }

    #[test]
    fn envelope_looks_forward() {
        // FP then TP: raw precision is 0 then 0.5, so the envelope lifts
        // the start of the curve to 0.5.
        let hits = [(0.9, false), (0.8, true)];
        let ap = average_precision(&hits, 1, Interpolation::Coco101).unwrap();
        assert_relative_eq!(ap, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn score_ties_preserve_input_order() {
        // Same scores; the TP listed first is processed first.
        let tp_first = [(0.5, true), (0.5, false)];
        let fp_first = [(0.5, false), (0.5, true)];
        let ap_tp = average_precision(&tp_first, 1, Interpolation::Coco101).unwrap();
        let ap_fp = average_precision(&fp_first, 1, Interpolation::Coco101).unwrap();
        assert_eq!(ap_tp, 1.0);
        assert_relative_eq!(ap_fp, 0.5, epsilon = 1e-15);
    }
}
