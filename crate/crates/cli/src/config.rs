//! TOML pipeline configuration. Every section is optional; command-line
//! flags override whatever a section provides.

use anyhow::{Context, Result};
use serde::Deserialize;
use std::path::{Path, PathBuf};

use dhs_core::augment::AugmentPolicy;
use dhs_core::encode::DepthMode;
use dhs_core::eval::Interpolation;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSection {
    pub manifest: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EncodeSection {
    pub depth_mode: DepthMode,
    pub height_percentile: f64,
    /// PNG quantization: 8 or 16 bits per channel.
    pub bit_depth: u8,
}

impl Default for EncodeSection {
    fn default() -> Self {
        EncodeSection {
            depth_mode: DepthMode::default(),
            height_percentile: 1.0,
            bit_depth: 16,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub interpolation: Interpolation,
    /// Subgroup spec files applied to every evaluation.
    pub subgroups: Vec<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub dataset: DatasetSection,
    pub encode: EncodeSection,
    pub augment: AugmentPolicy,
    pub eval: EvalSection,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: PipelineConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        config
            .augment
            .validate()
            .with_context(|| format!("config {}: [augment]", path.display()))?;
        if config.encode.bit_depth != 8 && config.encode.bit_depth != 16 {
            anyhow::bail!(
                "config {}: [encode] bit_depth must be 8 or 16, got {}",
                path.display(),
                config.encode.bit_depth
            );
        }
        Ok(config)
    }
}

/// Output root fallback: explicit flag, then config, then the
/// `DHS_CACHE_DIR` environment variable, then `./dhs-out`.
pub fn resolve_output_dir(flag: Option<&Path>, config: &PipelineConfig) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Some(dir) = &config.dataset.output_dir {
        return dir.clone();
    }
    if let Ok(dir) = std::env::var("DHS_CACHE_DIR") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from("dhs-out")
}
