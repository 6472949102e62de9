//! Evaluation results: serializable structures, console rendering, and
//! CSV export.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use super::ap::Interpolation;
use super::evaluate::AreaRange;
use super::EvalError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoryEval {
    pub name: String,
    pub gt_count: usize,
    /// `ap[threshold_index][area_index]`; None where no ground truth
    /// falls in the band.
    pub ap: Vec<Vec<Option<f64>>>,
    /// Mean over thresholds at the primary (first) area range.
    pub ap_mean: Option<f64>,
    pub ap50: Option<f64>,
    pub ap75: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub ap: Option<f64>,
    pub ap50: Option<f64>,
    pub ap75: Option<f64>,
    pub ap_small: Option<f64>,
    pub ap_medium: Option<f64>,
    pub ap_large: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OthersBucket {
    pub label: String,
    pub gt_count: usize,
    pub ap: Option<f64>,
    pub ap50: Option<f64>,
    pub ap75: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubgroupEval {
    pub name: String,
    pub ap: Option<f64>,
    pub ap50: Option<f64>,
    pub ap75: Option<f64>,
    /// Members with ground truth, contributing to the means.
    pub present: Vec<String>,
    /// Members without any ground truth.
    pub missing: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub others: Option<OthersBucket>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub thresholds: Vec<f64>,
    pub area_ranges: Vec<AreaRange>,
    pub interpolation: Interpolation,
    pub image_count: usize,
    pub gt_count: usize,
    pub det_count: usize,
    pub categories: Vec<CategoryEval>,
    pub summary: Summary,
    pub subgroups: Vec<SubgroupEval>,
}

fn pct(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{:6.1}", v * 100.0),
        None => "     -".to_string(),
    }
}

impl EvalReport {
    /// Plain-text table with AP values in percent.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} images, {} ground-truth boxes, {} detections",
            self.image_count, self.gt_count, self.det_count
        );
        let _ = writeln!(
            out,
            "{:<24} {:>6} {:>6} {:>6} {:>6}",
            "category", "gt", "AP", "AP50", "AP75"
        );
        for c in &self.categories {
            let _ = writeln!(
                out,
                "{:<24} {:>6} {} {} {}",
                c.name,
                c.gt_count,
                pct(c.ap_mean),
                pct(c.ap50),
                pct(c.ap75)
            );
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "mAP {} | mAP50 {} | mAP75 {} | small {} | medium {} | large {}",
            pct(s.ap).trim(),
            pct(s.ap50).trim(),
            pct(s.ap75).trim(),
            pct(s.ap_small).trim(),
            pct(s.ap_medium).trim(),
            pct(s.ap_large).trim()
        );
        for g in &self.subgroups {
            let mut line = format!(
                "subgroup {:<16} mAP {} | mAP50 {} | mAP75 {} ({} members",
                g.name,
                pct(g.ap).trim(),
                pct(g.ap50).trim(),
                pct(g.ap75).trim(),
                g.present.len(),
            );
            if let Some(b) = &g.others {
                let _ = write!(line, " + {:?} bucket of {} boxes", b.label, b.gt_count);
            }
            if !g.missing.is_empty() {
                let _ = write!(line, ", missing: {}", g.missing.join(", "));
            }
            line.push(')');
            let _ = writeln!(out, "{line}");
        }
        out
    }

    /// Per-category table as CSV, AP values in [0, 1] with full
    /// precision; empty fields where no ground truth exists.
    pub fn to_csv(&self) -> String {
        let field = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from("category,gt_count,ap,ap50,ap75\n");
        for c in &self.categories {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                c.name,
                c.gt_count,
                field(c.ap_mean),
                field(c.ap50),
                field(c.ap75)
            );
        }
        out
    }

    pub fn write_json(&self, path: &Path) -> Result<(), EvalError> {
        let text = serde_json::to_string_pretty(self).expect("report serializes");
        std::fs::write(path, text).map_err(|source| EvalError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read_json(path: &Path) -> Result<Self, EvalError> {
        let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| EvalError::Document {
            path: path.display().to_string(),
            msg: e.to_string(),
        })
    }
}
