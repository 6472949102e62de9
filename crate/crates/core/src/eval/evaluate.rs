//! Multi-threshold, multi-area evaluation across categories.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ap::{average_precision, Interpolation};
use super::matching::{match_greedy, DetOutcome};
use super::records::{Detection, GroundTruth};
use super::report::{CategoryEval, EvalReport, Summary};
use super::EvalError;
use crate::parallel;

/// Box-area band, inclusive below and exclusive above. An unbounded
/// band stores `hi = f64::INFINITY`, written to JSON as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaRange {
    pub name: String,
    pub lo: f64,
    #[serde(with = "unbounded_hi")]
    pub hi: f64,
}

mod unbounded_hi {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl AreaRange {
    pub fn new(name: &str, lo: f64, hi: f64) -> Self {
        AreaRange {
            name: name.to_string(),
            lo,
            hi,
        }
    }

    pub fn contains(&self, area: f64) -> bool {
        area >= self.lo && area < self.hi
    }

    /// The unrestricted range plus the three conventional bands split at
    /// 32^2 and 96^2 pixels. An area of exactly 96^2 counts as medium,
    /// hence the boundary nudged one ulp up.
    pub fn default_set() -> Vec<AreaRange> {
        let medium_hi = (96.0f64 * 96.0).next_up();
        vec![
            AreaRange::new("all", 0.0, f64::INFINITY),
            AreaRange::new("small", 0.0, 32.0 * 32.0),
            AreaRange::new("medium", 32.0 * 32.0, medium_hi),
            AreaRange::new("large", medium_hi, f64::INFINITY),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalOptions {
    /// IoU thresholds, one AP column each.
    pub thresholds: Vec<f64>,
    /// Area bands; the first is the primary one used for summaries.
    pub area_ranges: Vec<AreaRange>,
    pub interpolation: Interpolation,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            thresholds: (10..=19).map(|i| f64::from(i) / 20.0).collect(),
            area_ranges: AreaRange::default_set(),
            interpolation: Interpolation::Coco101,
        }
    }
}

impl EvalOptions {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.thresholds.is_empty() {
            return Err(EvalError::BadOptions("no IoU thresholds".into()));
        }
        for &t in &self.thresholds {
            if !t.is_finite() || t <= 0.0 || t > 1.0 {
                return Err(EvalError::BadOptions(format!(
                    "IoU threshold {t} must lie in (0, 1]"
                )));
            }
        }
        if self.area_ranges.is_empty() {
            return Err(EvalError::BadOptions("no area ranges".into()));
        }
        let mut names = BTreeSet::new();
        for r in &self.area_ranges {
            if !names.insert(r.name.as_str()) {
                return Err(EvalError::BadOptions(format!(
                    "duplicate area range name {:?}",
                    r.name
                )));
            }
            if r.lo < 0.0 || r.hi < r.lo || r.lo.is_nan() || r.hi.is_nan() {
                return Err(EvalError::BadOptions(format!(
                    "area range {:?} has invalid bounds [{}, {})",
                    r.name, r.lo, r.hi
                )));
            }
        }
        Ok(())
    }

    /// Index of the threshold equal to `t` (within 1e-9), if present.
    pub fn threshold_index(&self, t: f64) -> Option<usize> {
        self.thresholds.iter().position(|&x| (x - t).abs() < 1e-9)
    }
}

struct ImageWork<'a> {
    /// (input sequence number, detection), sorted by descending score
    /// with the sequence number breaking ties.
    dets: Vec<(usize, &'a Detection)>,
    gts: Vec<&'a GroundTruth>,
}

struct CategoryWork<'a> {
    name: &'a str,
    images: Vec<ImageWork<'a>>,
    gt_total: usize,
}

fn check_inputs(dets: &[Detection], gts: &[GroundTruth]) -> Result<(), EvalError> {
    for d in dets {
        if !d.bbox.is_well_formed() || !d.score.is_finite() {
            return Err(EvalError::BadInput(format!(
                "detection for image {:?} category {:?} is malformed",
                d.image_id, d.category
            )));
        }
    }
    for g in gts {
        if !g.bbox.is_well_formed() {
            return Err(EvalError::BadInput(format!(
                "ground truth for image {:?} category {:?} is malformed",
                g.image_id, g.category
            )));
        }
    }
    Ok(())
}

/// Per category, per image: detections tagged with their input position,
/// and the ground truths.
type GroupedBoxes<'a> =
    BTreeMap<&'a str, BTreeMap<&'a str, (Vec<(usize, &'a Detection)>, Vec<&'a GroundTruth>)>>;

fn build_work<'a>(dets: &'a [Detection], gts: &'a [GroundTruth]) -> Vec<CategoryWork<'a>> {
    let mut categories: BTreeSet<&str> = BTreeSet::new();
    for g in gts {
        categories.insert(&g.category);
    }
    for d in dets {
        categories.insert(&d.category);
    }

    let mut by_cat: GroupedBoxes<'a> = categories.iter().map(|&c| (c, BTreeMap::new())).collect();
    for g in gts {
        by_cat
            .get_mut(g.category.as_str())
            .unwrap()
            .entry(g.image_id.as_str())
            .or_default()
            .1
            .push(g);
    }
    for (seq, d) in dets.iter().enumerate() {
        by_cat
            .get_mut(d.category.as_str())
            .unwrap()
            .entry(d.image_id.as_str())
            .or_default()
            .0
            .push((seq, d));
    }

    by_cat
        .into_iter()
        .map(|(name, images)| {
            let mut gt_total = 0;
            let images = images
                .into_values()
                .map(|(mut dets, gts)| {
                    dets.sort_by(|a, b| b.1.score.total_cmp(&a.1.score).then(a.0.cmp(&b.0)));
                    gt_total += gts.len();
                    ImageWork { dets, gts }
                })
                .collect();
            CategoryWork {
                name,
                images,
                gt_total,
            }
        })
        .collect()
}

fn eval_category(work: &CategoryWork<'_>, options: &EvalOptions) -> CategoryEval {
    let n_thr = options.thresholds.len();
    let n_area = options.area_ranges.len();
    let mut ap = vec![vec![None; n_area]; n_thr];

    for (a_idx, area) in options.area_ranges.iter().enumerate() {
        let mut gt_counted = 0usize;
        // Per image ignore flags for this area band.
        let per_image: Vec<(Vec<bool>, Vec<bool>)> = work
            .images
            .iter()
            .map(|img| {
                let gt_ignored: Vec<bool> = img
                    .gts
                    .iter()
                    .map(|g| !area.contains(g.bbox.area()))
                    .collect();
                gt_counted += gt_ignored.iter().filter(|i| !**i).count();
                let det_ignorable: Vec<bool> = img
                    .dets
                    .iter()
                    .map(|(_, d)| !area.contains(d.bbox.area()))
                    .collect();
                (gt_ignored, det_ignorable)
            })
            .collect();

        for (t_idx, &threshold) in options.thresholds.iter().enumerate() {
            // (score, sequence, is_tp) for non-ignored detections.
            let mut hits: Vec<(f64, usize, bool)> = Vec::new();
            for (img, (gt_ignored, det_ignorable)) in work.images.iter().zip(&per_image) {
                let det_boxes: Vec<_> = img.dets.iter().map(|(_, d)| d.bbox).collect();
                let gt_boxes: Vec<_> = img.gts.iter().map(|g| g.bbox).collect();
                let outcomes =
                    match_greedy(&det_boxes, &gt_boxes, gt_ignored, det_ignorable, threshold);
                for (rank, outcome) in outcomes.into_iter().enumerate() {
                    let (seq, det) = img.dets[rank];
                    match outcome {
                        DetOutcome::True(_) => hits.push((det.score, seq, true)),
                        DetOutcome::False => hits.push((det.score, seq, false)),
                        DetOutcome::Ignored => {}
                    }
                }
            }
            hits.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            let scored: Vec<(f64, bool)> = hits.iter().map(|&(s, _, tp)| (s, tp)).collect();
            ap[t_idx][a_idx] = average_precision(&scored, gt_counted, options.interpolation);
        }
    }

    let primary = 0;
    let mean_over_thresholds = {
        let cells: Vec<f64> = (0..n_thr).filter_map(|t| ap[t][primary]).collect();
        if cells.is_empty() {
            None
        } else {
            Some(cells.iter().sum::<f64>() / cells.len() as f64)
        }
    };
    let at = |thr: f64| options.threshold_index(thr).and_then(|t| ap[t][primary]);

    CategoryEval {
        name: work.name.to_string(),
        gt_count: work.gt_total,
        ap50: at(0.5),
        ap75: at(0.75),
        ap_mean: mean_over_thresholds,
        ap,
    }
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let present: Vec<f64> = values.flatten().collect();
    if present.is_empty() {
        None
    } else {
        Some(present.iter().sum::<f64>() / present.len() as f64)
    }
}

fn summarize(categories: &[CategoryEval], options: &EvalOptions) -> Summary {
    let n_thr = options.thresholds.len();
    let area_named = |name: &str| options.area_ranges.iter().position(|r| r.name == name);
    let mean_at_area = |a_idx: Option<usize>| {
        a_idx.and_then(|a| {
            mean_of(
                categories
                    .iter()
                    .flat_map(|c| (0..n_thr).map(move |t| c.ap[t][a])),
            )
        })
    };
    Summary {
        ap: mean_at_area(Some(0)),
        ap50: mean_of(categories.iter().map(|c| c.ap50)),
        ap75: mean_of(categories.iter().map(|c| c.ap75)),
        ap_small: mean_at_area(area_named("small")),
        ap_medium: mean_at_area(area_named("medium")),
        ap_large: mean_at_area(area_named("large")),
    }
}

/// Scores detections against ground truth: greedy matching per image and
/// category, interpolated AP per (threshold, area range) cell, and
/// cross-category summary means.
pub fn evaluate(
    dets: &[Detection],
    gts: &[GroundTruth],
    options: &EvalOptions,
) -> Result<EvalReport, EvalError> {
    options.validate()?;
    check_inputs(dets, gts)?;

    let work = build_work(dets, gts);
    let categories = parallel::map_slice(&work, |w| eval_category(w, options));
    let summary = summarize(&categories, options);

    let mut images: HashMap<&str, ()> = HashMap::new();
    for g in gts {
        images.insert(&g.image_id, ());
    }
    for d in dets {
        images.insert(&d.image_id, ());
    }

    Ok(EvalReport {
        thresholds: options.thresholds.clone(),
        area_ranges: options.area_ranges.clone(),
        interpolation: options.interpolation,
        image_count: images.len(),
        gt_count: gts.len(),
        det_count: dets.len(),
        categories,
        summary,
        subgroups: Vec::new(),
    })
}
