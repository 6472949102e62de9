//! Detection evaluation: IoU, greedy matching, interpolated average
//! precision over IoU-threshold and box-area grids, and category
//! subgroup summaries.

pub mod boxes;

mod ap;
mod evaluate;
mod matching;
mod records;
mod report;
mod subgroups;

pub use ap::{average_precision, Interpolation};
pub use evaluate::{evaluate, AreaRange, EvalOptions};
pub use matching::{match_detections, match_greedy, DetOutcome};
pub use records::{load_detections, load_ground_truth, Detection, GroundTruth};
pub use report::{CategoryEval, EvalReport, OthersBucket, SubgroupEval, Summary};
pub use subgroups::{evaluate_with_subgroups, load_subgroups, subgroup_mean, SubgroupSpec};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}:{line}: {msg}")]
    Record {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{path}: {msg}")]
    Document { path: String, msg: String },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("evaluation options: {0}")]
    BadOptions(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("subgroup {name:?}: {msg}")]
    Subgroup { name: String, msg: String },
}
