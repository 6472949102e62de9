//! Cumulative receptive-field growth through a stack of sliding-window
//! layers.

use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// One sliding-window layer: square kernel, square stride.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kernel: u32,
    pub stride: u32,
}

/// Receptive-field edge and input-jump after each layer, from the
/// recursion r' = r + (k - 1) * j, j' = j * s starting at r = j = 1.
pub fn cumulative_receptive_field(layers: &[LayerSpec]) -> Result<Vec<(u64, u64)>, AnalysisError> {
    let mut out = Vec::with_capacity(layers.len());
    let mut rf: u64 = 1;
    let mut jump: u64 = 1;
    for (i, layer) in layers.iter().enumerate() {
        if layer.kernel == 0 || layer.stride == 0 {
            return Err(AnalysisError::BadSpec(format!(
                "layer {i}: kernel and stride must be nonzero"
            )));
        }
        rf = rf
            .checked_add(
                u64::from(layer.kernel - 1)
                    .checked_mul(jump)
                    .ok_or_else(|| {
                        AnalysisError::BadSpec(format!("layer {i}: receptive field overflows"))
                    })?,
            )
            .ok_or_else(|| {
                AnalysisError::BadSpec(format!("layer {i}: receptive field overflows"))
            })?;
        jump = jump
            .checked_mul(u64::from(layer.stride))
            .ok_or_else(|| AnalysisError::BadSpec(format!("layer {i}: jump overflows")))?;
        out.push((rf, jump));
    }
    Ok(out)
}
