//! Backbone stage descriptions and the arithmetic over them: output
//! shapes by cumulative stride, local receptive fields, and
//! attention-head times channel products.

use serde::{Deserialize, Serialize};
use std::path::Path;

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Conv,
    WindowedAttention,
}

/// One backbone stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub name: String,
    pub kind: BlockKind,
    /// Cumulative stride from the input image.
    pub stride: u32,
    pub channels: u32,
    /// Attention heads; 1 for conv stages.
    #[serde(default = "one")]
    pub heads: u32,
    /// Conv kernel edge, or attention window edge in tokens.
    pub kernel: u32,
    /// Pixels per token edge, for attention stages whose window spans
    /// raw pixels rather than already-downsampled tokens.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<u32>,
}

fn one() -> u32 {
    1
}

impl BlockSpec {
    /// Edge length of the square local receptive field: the conv kernel,
    /// or the attention window scaled by its patch size when present.
    pub fn local_receptive_field(&self) -> u32 {
        match (self.kind, self.patch) {
            (BlockKind::Conv, _) => self.kernel,
            (BlockKind::WindowedAttention, Some(p)) => self.kernel * p,
            (BlockKind::WindowedAttention, None) => self.kernel,
        }
    }

    /// heads x channels, the attention width the stage computes over.
    pub fn head_dim_product(&self) -> u64 {
        u64::from(self.heads) * u64::from(self.channels)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackboneSpec {
    pub name: String,
    /// Nominal input (height, width) for the arithmetic.
    pub input: (usize, usize),
    /// Capture size before resizing, when worth recording.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub original: Option<(usize, usize)>,
    pub blocks: Vec<BlockSpec>,
}

/// Per-stage arithmetic results for one input size.
#[derive(Debug, Clone, Serialize)]
pub struct BlockSummary {
    pub name: String,
    /// Output (height, width, channels).
    pub shape: (usize, usize, u32),
    pub local_rf: u32,
    pub heads: u32,
    pub head_dim_product: u64,
}

fn ceil_div(a: usize, b: u32) -> usize {
    a.div_ceil(b as usize)
}

impl BackboneSpec {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.blocks.is_empty() {
            return Err(AnalysisError::BadSpec("no blocks".into()));
        }
        if self.input.0 == 0 || self.input.1 == 0 {
            return Err(AnalysisError::BadSpec(format!(
                "input {}x{} must be nonzero",
                self.input.0, self.input.1
            )));
        }
        let mut prev_stride = 0;
        for b in &self.blocks {
            if b.stride <= prev_stride {
                return Err(AnalysisError::BadSpec(format!(
                    "block {:?}: stride {} must exceed the previous stride {}",
                    b.name, b.stride, prev_stride
                )));
            }
            prev_stride = b.stride;
            if b.channels == 0 || b.kernel == 0 || b.heads == 0 {
                return Err(AnalysisError::BadSpec(format!(
                    "block {:?}: channels, kernel, and heads must be nonzero",
                    b.name
                )));
            }
            if b.kind == BlockKind::Conv && b.heads != 1 {
                return Err(AnalysisError::BadSpec(format!(
                    "block {:?}: conv stages have exactly one head",
                    b.name
                )));
            }
            if b.kind == BlockKind::Conv && b.patch.is_some() {
                return Err(AnalysisError::BadSpec(format!(
                    "block {:?}: patch only applies to windowed attention",
                    b.name
                )));
            }
            if b.patch == Some(0) {
                return Err(AnalysisError::BadSpec(format!(
                    "block {:?}: patch must be nonzero",
                    b.name
                )));
            }
        }
        Ok(())
    }

    /// Output (height, width, channels) per stage for the given input,
    /// each spatial dim divided by the cumulative stride, rounded up.
    pub fn block_shapes(&self, input: (usize, usize)) -> Vec<(usize, usize, u32)> {
        self.blocks
            .iter()
            .map(|b| {
                (
                    ceil_div(input.0, b.stride),
                    ceil_div(input.1, b.stride),
                    b.channels,
                )
            })
            .collect()
    }

    /// Shape, receptive-field, and head-product table for one input.
    pub fn summarize(&self, input: (usize, usize)) -> Vec<BlockSummary> {
        self.blocks
            .iter()
            .zip(self.block_shapes(input))
            .map(|(b, shape)| BlockSummary {
                name: b.name.clone(),
                shape,
                local_rf: b.local_receptive_field(),
                heads: b.heads,
                head_dim_product: b.head_dim_product(),
            })
            .collect()
    }
}

/// Built-in stage tables for the two reference backbones.
pub mod presets {
    use super::*;

    /// Four residual stages: strides 4 to 32, 3x3 working kernels,
    /// channels 256 to 2048.
    pub fn resnet50() -> BackboneSpec {
        let channels = [256u32, 512, 1024, 2048];
        BackboneSpec {
            name: "resnet50".into(),
            input: (800, 1120),
            original: Some((530, 730)),
            blocks: channels
                .iter()
                .enumerate()
                .map(|(i, &c)| BlockSpec {
                    name: format!("block{}", i + 1),
                    kind: BlockKind::Conv,
                    stride: 4 << i,
                    channels: c,
                    heads: 1,
                    kernel: 3,
                    patch: None,
                })
                .collect(),
        }
    }

    /// Four windowed-attention stages: 7-token windows over 4x4-pixel
    /// patches (so the first stage sees 28x28 raw pixels), channels 96
    /// to 768, heads 3 to 24.
    pub fn swin_t() -> BackboneSpec {
        let stages = [(96u32, 3u32), (192, 6), (384, 12), (768, 24)];
        BackboneSpec {
            name: "swin_t".into(),
            input: (800, 1120),
            original: Some((530, 730)),
            blocks: stages
                .iter()
                .enumerate()
                .map(|(i, &(c, heads))| BlockSpec {
                    name: format!("block{}", i + 1),
                    kind: BlockKind::WindowedAttention,
                    stride: 4 << i,
                    channels: c,
                    heads,
                    kernel: 7,
                    patch: if i == 0 { Some(4) } else { None },
                })
                .collect(),
        }
    }

    /// Preset by name, if one exists.
    pub fn by_name(name: &str) -> Option<BackboneSpec> {
        match name {
            "resnet50" => Some(resnet50()),
            "swin_t" | "swin-t" => Some(swin_t()),
            _ => None,
        }
    }
}

/// Reads and validates a backbone spec from JSON.
pub fn load_backbone_spec(path: &Path) -> Result<BackboneSpec, AnalysisError> {
    let text = std::fs::read_to_string(path).map_err(|source| AnalysisError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let spec: BackboneSpec =
        serde_json::from_str(&text).map_err(|source| AnalysisError::SpecParse {
            path: path.to_path_buf(),
            source,
        })?;
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        presets::resnet50().validate().unwrap();
        presets::swin_t().validate().unwrap();
        assert!(presets::by_name("swin-t").is_some());
        assert!(presets::by_name("vgg").is_none());
    }

    #[test]
    fn shapes_divide_by_cumulative_stride_rounding_up() {
        let spec = presets::resnet50();
        let shapes = spec.block_shapes((800, 1120));
        assert_eq!(
            shapes,
            vec![
                (200, 280, 256),
                (100, 140, 512),
                (50, 70, 1024),
                (25, 35, 2048)
            ]
        );
        // Odd input sizes round up.
        let shapes = spec.block_shapes((799, 1117));
        assert_eq!(shapes[0], (200, 280, 256));
        assert_eq!(shapes[3], (25, 35, 2048));
    }

    #[test]
    fn local_fields_cover_both_kinds() {
        let resnet = presets::resnet50();
        assert!(resnet.blocks.iter().all(|b| b.local_receptive_field() == 3));
        let swin = presets::swin_t();
        let fields: Vec<u32> = swin
            .blocks
            .iter()
            .map(|b| b.local_receptive_field())
            .collect();
        assert_eq!(fields, vec![28, 7, 7, 7]);
    }

    #[test]
    fn head_products_scale_with_depth() {
        let swin = presets::swin_t();
        let products: Vec<u64> = swin.blocks.iter().map(|b| b.head_dim_product()).collect();
        assert_eq!(products, vec![288, 1152, 4608, 18432]);
    }

    #[test]
    fn validation_rejects_inconsistent_specs() {
        let mut spec = presets::resnet50();
        spec.blocks[2].stride = 4;
        assert!(spec.validate().is_err());

        let mut spec = presets::resnet50();
        spec.blocks[0].heads = 2;
        assert!(spec.validate().is_err());

        let mut spec = presets::swin_t();
        spec.blocks[1].patch = Some(0);
        assert!(spec.validate().is_err());

        let mut spec = presets::resnet50();
        spec.blocks.clear();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spec.json");
        let spec = presets::swin_t();
        std::fs::write(&path, serde_json::to_string_pretty(&spec).unwrap()).unwrap();
        let back = load_backbone_spec(&path).unwrap();
        assert_eq!(back.name, "swin_t");
        assert_eq!(back.blocks.len(), 4);
        assert_eq!(back.blocks[0].patch, Some(4));
    }
}
