//! Greedy detection-to-ground-truth assignment at one IoU threshold.

use super::boxes::{iou, BoxXYWH};

/// Outcome for one detection after matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetOutcome {
    /// Matched a counted ground-truth box: a true positive.
    True(usize),
    /// Matched an ignored ground-truth box, or left unmatched while its
    /// own area falls outside the range under evaluation. Dropped from
    /// the precision-recall curve.
    Ignored,
    /// A false positive.
    False,
}

/// Greedy single-use assignment for one image and category.
///
/// `dets` must already be sorted by descending score (ties broken by
/// input order). Each detection takes the unmatched ground truth with
/// the highest IoU at or above `threshold`, preferring counted ground
/// truth over ignored; equal IoUs resolve to the lowest index. Matched
/// ground truth is consumed either way. An unmatched detection is a
/// false positive unless `det_ignorable` marks it.
pub fn match_greedy(
    dets: &[BoxXYWH],
    gts: &[BoxXYWH],
    gt_ignored: &[bool],
    det_ignorable: &[bool],
    threshold: f64,
) -> Vec<DetOutcome> {
    assert_eq!(gts.len(), gt_ignored.len(), "ground-truth flag length");
    assert_eq!(dets.len(), det_ignorable.len(), "detection flag length");
    let mut gt_taken = vec![false; gts.len()];
    let mut out = Vec::with_capacity(dets.len());
    for (d_idx, det) in dets.iter().enumerate() {
        let mut best: Option<(usize, f64, bool)> = None;
        for (g_idx, gt) in gts.iter().enumerate() {
            if gt_taken[g_idx] {
                continue;
            }
            let overlap = iou(det, gt);
            if overlap < threshold {
                continue;
            }
            let candidate = (g_idx, overlap, gt_ignored[g_idx]);
            best = Some(match best {
                None => candidate,
                Some(cur @ (_, cur_iou, cur_ign)) => {
                    let (_, new_iou, new_ign) = candidate;
                    if (!new_ign && cur_ign) || (new_ign == cur_ign && new_iou > cur_iou) {
                        candidate
                    } else {
                        cur
                    }
                }
            });
        }
        match best {
            Some((g_idx, _, ignored)) => {
                gt_taken[g_idx] = true;
                out.push(if ignored {
                    DetOutcome::Ignored
                } else {
                    DetOutcome::True(g_idx)
                });
            }
            None => out.push(if det_ignorable[d_idx] {
                DetOutcome::Ignored
            } else {
                DetOutcome::False
            }),
        }
    }
    out
}

/// True-positive flags in input order for scored detections against
/// plain ground truth, at one threshold. Sorting by descending score
/// (stable, so input order breaks ties) happens internally.
pub fn match_detections(dets: &[(BoxXYWH, f64)], gts: &[BoxXYWH], threshold: f64) -> Vec<bool> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].1.total_cmp(&dets[a].1).then(a.cmp(&b)));
    let sorted: Vec<BoxXYWH> = order.iter().map(|&i| dets[i].0).collect();
    let outcomes = match_greedy(
        &sorted,
        gts,
        &vec![false; gts.len()],
        &vec![false; dets.len()],
        threshold,
    );
    let mut flags = vec![false; dets.len()];
    for (rank, outcome) in outcomes.iter().enumerate() {
        if matches!(outcome, DetOutcome::True(_)) {
            flags[order[rank]] = true;
        }
    }
    flags
}
