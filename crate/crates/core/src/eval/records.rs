//! Detection and ground-truth records with their two file formats:
//! one JSON object per line, or a single COCO-style document.

use serde::Deserialize;
use std::collections::HashSet;
use std::path::Path;

use super::boxes::BoxXYWH;
use super::EvalError;

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub image_id: String,
    pub category: String,
    pub bbox: BoxXYWH,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub image_id: String,
    pub category: String,
    pub bbox: BoxXYWH,
}

/// String-or-integer ids, normalized to strings.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Id {
    Text(String),
    Number(i64),
}

impl Id {
    fn into_string(self) -> String {
        match self {
            Id::Text(s) => s,
            Id::Number(n) => n.to_string(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetLine {
    image_id: Id,
    category: String,
    bbox: [f64; 4],
    score: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GtLine {
    image_id: Id,
    category: String,
    bbox: [f64; 4],
    #[serde(default)]
    id: Option<Id>,
}

#[derive(Debug, Deserialize)]
struct CocoDoc {
    annotations: Vec<CocoAnnotation>,
    #[serde(default)]
    categories: Vec<CocoCategory>,
}

#[derive(Debug, Deserialize)]
struct CocoAnnotation {
    id: Option<i64>,
    image_id: Id,
    category_id: i64,
    bbox: [f64; 4],
    #[serde(default)]
    iscrowd: Option<i64>,
}

#[derive(Debug, Deserialize)]
struct CocoCategory {
    id: i64,
    #[allow(dead_code)]
    name: Option<String>,
}

#[derive(Debug, Deserialize)]
struct CocoResult {
    image_id: Id,
    category_id: i64,
    bbox: [f64; 4],
    score: f64,
}

fn check_bbox(bbox: [f64; 4]) -> Result<BoxXYWH, String> {
    let b = BoxXYWH::from_array(bbox);
    if !b.is_well_formed() {
        return Err(format!(
            "bbox [{}, {}, {}, {}] must be finite with non-negative width and height",
            bbox[0], bbox[1], bbox[2], bbox[3]
        ));
    }
    Ok(b)
}

fn record_err(path: &Path, line: usize, msg: impl Into<String>) -> EvalError {
    EvalError::Record {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn doc_err(path: &Path, msg: impl Into<String>) -> EvalError {
    EvalError::Document {
        path: path.display().to_string(),
        msg: msg.into(),
    }
}

fn read(path: &Path) -> Result<String, EvalError> {
    std::fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// True when the whole file parses as one COCO-style JSON document.
fn as_coco_doc(text: &str) -> Option<serde_json::Value> {
    let value: serde_json::Value = serde_json::from_str(text).ok()?;
    match &value {
        serde_json::Value::Object(map) if map.contains_key("annotations") => Some(value),
        serde_json::Value::Array(_) => Some(value),
        _ => None,
    }
}

/// Loads ground truth from a JSONL file
/// (`{"image_id", "category", "bbox": [x,y,w,h], "id"?}` per line) or a
/// COCO-style document with an `annotations` array. COCO categories are
/// keyed by their numeric id rendered as a string.
pub fn load_ground_truth(path: &Path) -> Result<Vec<GroundTruth>, EvalError> {
    let text = read(path)?;
    if let Some(value) = as_coco_doc(&text) {
        if value.is_array() {
            return Err(doc_err(
                path,
                "top-level array is a detection results file, not ground truth",
            ));
        }
        let doc: CocoDoc =
            serde_json::from_value(value).map_err(|e| doc_err(path, e.to_string()))?;
        let known: HashSet<i64> = doc.categories.iter().map(|c| c.id).collect();
        let mut seen_ids = HashSet::new();
        let mut out = Vec::with_capacity(doc.annotations.len());
        for ann in doc.annotations {
            if ann.iscrowd.unwrap_or(0) != 0 {
                return Err(doc_err(
                    path,
                    format!(
                        "annotation {:?} has iscrowd set; crowd regions are not supported",
                        ann.id
                    ),
                ));
            }
            if let Some(id) = ann.id {
                if !seen_ids.insert(id) {
                    return Err(doc_err(path, format!("duplicate annotation id {id}")));
                }
            }
            if !doc.categories.is_empty() && !known.contains(&ann.category_id) {
                return Err(doc_err(
                    path,
                    format!(
                        "annotation references unknown category id {}",
                        ann.category_id
                    ),
                ));
            }
            let bbox = check_bbox(ann.bbox).map_err(|m| doc_err(path, m))?;
            out.push(GroundTruth {
                image_id: ann.image_id.into_string(),
                category: ann.category_id.to_string(),
                bbox,
            });
        }
        return Ok(out);
    }

    let mut out = Vec::new();
    let mut seen_ids = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: GtLine =
            serde_json::from_str(line).map_err(|e| record_err(path, lineno, e.to_string()))?;
        let bbox = check_bbox(rec.bbox).map_err(|m| record_err(path, lineno, m))?;
        let image_id = rec.image_id.into_string();
        if let Some(id) = rec.id {
            let key = (image_id.clone(), id.into_string());
            if !seen_ids.insert(key.clone()) {
                return Err(record_err(
                    path,
                    lineno,
                    format!("duplicate annotation id {:?} for image {:?}", key.1, key.0),
                ));
            }
        }
        out.push(GroundTruth {
            image_id,
            category: rec.category,
            bbox,
        });
    }
    Ok(out)
}

/// Loads detections from a JSONL file
/// (`{"image_id", "category", "bbox", "score"}` per line) or a
/// COCO-style results array. Input order is preserved; it breaks score
/// ties during matching.
pub fn load_detections(path: &Path) -> Result<Vec<Detection>, EvalError> {
    let text = read(path)?;
    if let Some(value) = as_coco_doc(&text) {
        if value.is_object() {
            return Err(doc_err(
                path,
                "document with annotations is a ground-truth file, not detections",
            ));
        }
        let results: Vec<CocoResult> =
            serde_json::from_value(value).map_err(|e| doc_err(path, e.to_string()))?;
        let mut out = Vec::with_capacity(results.len());
        for r in results {
            let bbox = check_bbox(r.bbox).map_err(|m| doc_err(path, m))?;
            if !r.score.is_finite() {
                return Err(doc_err(path, format!("score {} is not finite", r.score)));
            }
            out.push(Detection {
                image_id: r.image_id.into_string(),
                category: r.category_id.to_string(),
                bbox,
                score: r.score,
            });
        }
        return Ok(out);
    }

    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DetLine =
            serde_json::from_str(line).map_err(|e| record_err(path, lineno, e.to_string()))?;
        let bbox = check_bbox(rec.bbox).map_err(|m| record_err(path, lineno, m))?;
        if !rec.score.is_finite() {
            return Err(record_err(
                path,
                lineno,
                format!("score {} is not finite", rec.score),
            ));
        }
        out.push(Detection {
            image_id: rec.image_id.into_string(),
            category: rec.category,
            bbox,
            score: rec.score,
        });
    }
    Ok(out)
}
