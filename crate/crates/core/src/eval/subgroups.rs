//! Category-subgroup summaries: mean AP over a named list of
//! categories, optionally folding every remaining category into one
//! bucket that is re-evaluated as a single pseudo-category.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::evaluate::{evaluate, EvalOptions};
use super::records::{Detection, GroundTruth};
use super::report::{EvalReport, OthersBucket, SubgroupEval};
use super::EvalError;

/// A named list of categories to average over. When `others` is set,
/// all categories outside the list are relabeled to that bucket name
/// and scored as one extra member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubgroupSpec {
    pub name: String,
    pub categories: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub others: Option<String>,
}

impl SubgroupSpec {
    pub fn validate(&self) -> Result<(), EvalError> {
        let err = |msg: String| EvalError::Subgroup {
            name: self.name.clone(),
            msg,
        };
        if self.name.is_empty() {
            return Err(err("name must be nonempty".into()));
        }
        if self.categories.is_empty() {
            return Err(err("category list must be nonempty".into()));
        }
        let mut seen = BTreeSet::new();
        for c in &self.categories {
            if !seen.insert(c.as_str()) {
                return Err(err(format!("duplicate category {c:?}")));
            }
        }
        if let Some(label) = &self.others {
            if seen.contains(label.as_str()) {
                return Err(err(format!(
                    "others bucket {label:?} collides with a listed category"
                )));
            }
        }
        Ok(())
    }
}

/// Reads one spec or an array of specs from a JSON file.
pub fn load_subgroups(path: &Path) -> Result<Vec<SubgroupSpec>, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let specs: Vec<SubgroupSpec> = if text.trim_start().starts_with('[') {
        serde_json::from_str(&text)
    } else {
        serde_json::from_str::<SubgroupSpec>(&text).map(|s| vec![s])
    }
    .map_err(|e| EvalError::Document {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    for s in &specs {
        s.validate()?;
    }
    Ok(specs)
}

/// Mean of the per-category values over the subgroup's members,
/// skipping members absent from the map (returned separately). Any
/// `others` bucket is not computable from precomputed values and is
/// ignored here.
pub fn subgroup_mean(
    per_category: &BTreeMap<String, f64>,
    spec: &SubgroupSpec,
) -> (Option<f64>, Vec<String>) {
    let mut present = Vec::new();
    let mut missing = Vec::new();
    for c in &spec.categories {
        match per_category.get(c) {
            Some(&v) => present.push(v),
            None => missing.push(c.clone()),
        }
    }
    let mean = if present.is_empty() {
        None
    } else {
        Some(present.iter().sum::<f64>() / present.len() as f64)
    };
    (mean, missing)
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

fn eval_others_bucket(
    dets: &[Detection],
    gts: &[GroundTruth],
    options: &EvalOptions,
    members: &BTreeSet<&str>,
    label: &str,
) -> Result<Option<OthersBucket>, EvalError> {
    let bucket_gts: Vec<GroundTruth> = gts
        .iter()
        .filter(|g| !members.contains(g.category.as_str()))
        .map(|g| GroundTruth {
            category: label.to_string(),
            ..g.clone()
        })
        .collect();
    let bucket_dets: Vec<Detection> = dets
        .iter()
        .filter(|d| !members.contains(d.category.as_str()))
        .map(|d| Detection {
            category: label.to_string(),
            ..d.clone()
        })
        .collect();
    if bucket_gts.is_empty() {
        return Ok(None);
    }
    let report = evaluate(&bucket_dets, &bucket_gts, options)?;
    let cat = report
        .categories
        .into_iter()
        .find(|c| c.name == label)
        .expect("bucket category present");
    Ok(Some(OthersBucket {
        label: label.to_string(),
        gt_count: cat.gt_count,
        ap: cat.ap_mean,
        ap50: cat.ap50,
        ap75: cat.ap75,
    }))
}

/// Full evaluation plus one summary row per subgroup. Subgroup means
/// run over members that have ground truth, with the optional others
/// bucket contributing as one more member.
pub fn evaluate_with_subgroups(
    dets: &[Detection],
    gts: &[GroundTruth],
    options: &EvalOptions,
    subgroups: &[SubgroupSpec],
) -> Result<EvalReport, EvalError> {
    let mut report = evaluate(dets, gts, options)?;
    for spec in subgroups {
        spec.validate()?;
        let members: BTreeSet<&str> = spec.categories.iter().map(String::as_str).collect();

        let mut ap = Vec::new();
        let mut ap50 = Vec::new();
        let mut ap75 = Vec::new();
        let mut present = Vec::new();
        let mut missing = Vec::new();
        for name in &spec.categories {
            let cell = report.categories.iter().find(|c| &c.name == name);
            match cell.and_then(|c| c.ap_mean.map(|m| (c, m))) {
                Some((c, m)) => {
                    ap.push(m);
                    if let Some(v) = c.ap50 {
                        ap50.push(v);
                    }
                    if let Some(v) = c.ap75 {
                        ap75.push(v);
                    }
                    present.push(name.clone());
                }
                None => missing.push(name.clone()),
            }
        }

        let others = match &spec.others {
            Some(label) => eval_others_bucket(dets, gts, options, &members, label)?,
            None => None,
        };
        if let Some(bucket) = &others {
            if let Some(v) = bucket.ap {
                ap.push(v);
            }
            if let Some(v) = bucket.ap50 {
                ap50.push(v);
            }
            if let Some(v) = bucket.ap75 {
                ap75.push(v);
            }
        }

        report.subgroups.push(SubgroupEval {
            name: spec.name.clone(),
            ap: mean(&ap),
            ap50: mean(&ap50),
            ap75: mean(&ap75),
            present,
            missing,
            others,
        });
    }
    Ok(report)
}
