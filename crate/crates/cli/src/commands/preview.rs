//! `dhs augment-preview`: one seeded training-augmentation draw per
//! frame, saved next to the converted images for visual inspection.

use anyhow::{Context, Result};
use serde::Serialize;
use std::path::Path;

use dhs_core::augment::{rng_for_frame, train_transform, LabeledBox, LabeledImage, TransformLog};
use dhs_core::encode::{read_pseudo_png, write_pseudo_png, PngBitDepth};
use dhs_core::eval::load_ground_truth;
use dhs_core::ingest::load_manifest;

use crate::config::{resolve_output_dir, PipelineConfig};
use crate::PreviewArgs;

#[derive(Serialize)]
struct PreviewSidecar<'a> {
    log: &'a TransformLog,
    boxes: &'a [LabeledBox],
}

pub fn run(config: &PipelineConfig, args: PreviewArgs) -> Result<()> {
    let manifest_path = args
        .manifest
        .as_deref()
        .or(config.dataset.manifest.as_deref())
        .context("no manifest: pass --manifest or set [dataset].manifest")?;
    let manifest = load_manifest(manifest_path)
        .with_context(|| format!("loading manifest {}", manifest_path.display()))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let out_dir = resolve_output_dir(args.out.as_deref(), config);

    let mut previewed = 0usize;
    for (index, frame) in manifest.frames.iter().enumerate() {
        if let Some(only) = &args.frame {
            if &frame.id != only {
                continue;
            }
        }
        let Some(gt_rel) = &frame.gt else {
            if args.frame.is_some() {
                anyhow::bail!("frame {} has no ground-truth file to preview", frame.id);
            }
            continue;
        };

        let image_path = out_dir.join(format!("{}.png", frame.id));
        let image = read_pseudo_png(&image_path).with_context(|| {
            format!(
                "reading converted frame {} (run `dhs convert` first)",
                image_path.display()
            )
        })?;

        let gt_path = base.join(gt_rel);
        let boxes: Vec<LabeledBox> = load_ground_truth(&gt_path)
            .with_context(|| format!("loading ground truth {}", gt_path.display()))?
            .into_iter()
            .filter(|g| g.image_id == frame.id)
            .map(|g| LabeledBox {
                bbox: g.bbox,
                category: g.category,
            })
            .collect();

        let labeled = LabeledImage { image, boxes };
        let mut rng = rng_for_frame(config.augment.seed, index as u64);
        let (out, log) = train_transform(&labeled, &config.augment, &mut rng)?;

        let png_path = out_dir.join(format!("{}.aug.png", frame.id));
        write_pseudo_png(&out.image, &png_path, PngBitDepth::Sixteen)?;
        let sidecar = PreviewSidecar {
            log: &log,
            boxes: &out.boxes,
        };
        let json_path = out_dir.join(format!("{}.aug.json", frame.id));
        std::fs::write(&json_path, serde_json::to_string_pretty(&sidecar)?)
            .with_context(|| format!("writing {}", json_path.display()))?;
        log::debug!(
            "frame {}: flip={} crop={:?} target={:?}",
            frame.id,
            log.flipped,
            log.crop_offset,
            log.resize_target
        );
        previewed += 1;
    }

    if let Some(only) = &args.frame {
        anyhow::ensure!(previewed > 0, "frame {only:?} not found in the manifest");
    }
    println!("previewed {previewed} frames into {}", out_dir.display());
    Ok(())
}
