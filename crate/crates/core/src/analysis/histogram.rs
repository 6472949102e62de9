//! Activation histograms over globally normalized values, with an
//! optional zoom window for peaks that a full-range view flattens.

use serde::Serialize;

use super::tensor::FeatureTensor;
use super::AnalysisError;
use crate::parallel;

#[derive(Debug, Clone, Serialize)]
pub struct FeatureHistogram {
    /// Bin boundaries, `counts.len() + 1` of them.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Raw extrema the unit-interval normalization mapped to 0 and 1.
    pub global_min: f64,
    pub global_max: f64,
    /// Window in normalized units the histogram covers, when zoomed.
    pub zoom: Option<(f64, f64)>,
    /// Samples inside the window (all of them when not zoomed).
    pub total: u64,
    /// A constant tensor cannot be normalized; it collapses to one bin.
    pub degenerate: bool,
}

/// Histograms a tensor in two stages: values are min-max normalized to
/// [0, 1] over the whole tensor, then binned uniformly either across
/// [0, 1] or across the `zoom` sub-window (bounds in normalized units,
/// both ends inclusive).
pub fn feature_histogram(
    tensor: &FeatureTensor,
    bins: usize,
    zoom: Option<(f64, f64)>,
) -> Result<FeatureHistogram, AnalysisError> {
    if bins == 0 {
        return Err(AnalysisError::BadHistogram(
            "bin count must be nonzero".into(),
        ));
    }
    if let Some((lo, hi)) = zoom {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi || lo.is_nan() {
            return Err(AnalysisError::BadHistogram(format!(
                "zoom window [{lo}, {hi}] must satisfy 0 <= lo < hi <= 1"
            )));
        }
    }

    let (global_min, global_max) = tensor.min_max();
    let n = tensor.values().len() as u64;
    if global_min == global_max {
        log::warn!("constant tensor (value {global_min}); emitting a single-bin histogram");
        return Ok(FeatureHistogram {
            edges: vec![0.0, 1.0],
            counts: vec![n],
            global_min,
            global_max,
            zoom: None,
            total: n,
            degenerate: true,
        });
    }

    let (lo, hi) = zoom.unwrap_or((0.0, 1.0));
    let width = hi - lo;
    let range = global_max - global_min;

    let chunks: Vec<&[f64]> = tensor.values().chunks(1 << 16).collect();
    let partials = parallel::map_slice(&chunks, |chunk| {
        let mut counts = vec![0u64; bins];
        for &raw in *chunk {
            let v = (raw - global_min) / range;
            if v < lo || v > hi {
                continue;
            }
            let idx = (((v - lo) / width) * bins as f64) as usize;
            counts[idx.min(bins - 1)] += 1;
        }
        counts
    });
    let mut counts = vec![0u64; bins];
    for partial in partials {
        for (c, p) in counts.iter_mut().zip(partial) {
            *c += p;
        }
    }

    let edges = (0..=bins)
        .map(|i| lo + width * i as f64 / bins as f64)
        .collect();
    let total = counts.iter().sum();
    Ok(FeatureHistogram {
        edges,
        counts,
        global_min,
        global_max,
        zoom,
        total,
        degenerate: false,
    })
}
