//! `dhs convert`: depth PNGs to pseudo-image PNGs with meta sidecars.

use anyhow::{Context, Result};
use std::path::Path;

use dhs_core::encode::{
    combine_channels, depth_channel, height_channel, signed_angle_channel, write_meta_json,
    write_pseudo_png, DepthMode, PngBitDepth,
};
use dhs_core::ingest::{
    back_project, decode_depth_png, gravity_align, load_manifest, FrameRecord, GravityAlignment,
    Manifest,
};

use crate::config::{resolve_output_dir, PipelineConfig};
use crate::{ConvertArgs, DepthModeArg};

pub fn run(config: &PipelineConfig, args: ConvertArgs) -> Result<()> {
    let manifest_path = args
        .manifest
        .as_deref()
        .or(config.dataset.manifest.as_deref())
        .context("no manifest: pass --manifest or set [dataset].manifest")?;
    let manifest = load_manifest(manifest_path)
        .with_context(|| format!("loading manifest {}", manifest_path.display()))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));

    let out_dir = resolve_output_dir(args.out.as_deref(), config);
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;

    let depth_mode = match args.depth_mode {
        Some(DepthModeArg::Range) => DepthMode::Range,
        Some(DepthModeArg::OpticalAxis) => DepthMode::OpticalAxis,
        None => config.encode.depth_mode,
    };
    let percentile = args
        .height_percentile
        .unwrap_or(config.encode.height_percentile);
    let bit_depth = match args.bit_depth.unwrap_or(config.encode.bit_depth) {
        8 => PngBitDepth::Eight,
        16 => PngBitDepth::Sixteen,
        other => anyhow::bail!("--bit-depth must be 8 or 16, got {other}"),
    };

    let mut failed = 0usize;
    for frame in &manifest.frames {
        match convert_frame(
            &manifest, frame, base, &out_dir, depth_mode, percentile, bit_depth,
        ) {
            Ok(()) => log::debug!("converted frame {}", frame.id),
            Err(err) => {
                failed += 1;
                log::error!("frame {}: {err:#}", frame.id);
            }
        }
    }

    let total = manifest.frames.len();
    println!(
        "converted {} of {total} frames into {}",
        total - failed,
        out_dir.display()
    );
    anyhow::ensure!(failed == 0, "{failed} of {total} frames failed");
    Ok(())
}

/// One frame, isolated so a bad file cannot take down the batch. The
/// depth channel is read from the sensor-frame cloud (where the optical
/// axis is meaningful); height and signed angle from the aligned cloud.
fn convert_frame(
    manifest: &Manifest,
    frame: &FrameRecord,
    base: &Path,
    out_dir: &Path,
    depth_mode: DepthMode,
    percentile: f64,
    bit_depth: PngBitDepth,
) -> Result<()> {
    let sensor = manifest.sensor_for(frame);
    let depth_path = base.join(&frame.depth);
    let bytes = std::fs::read(&depth_path)
        .with_context(|| format!("reading depth {}", depth_path.display()))?;
    let depth = decode_depth_png(&bytes, sensor.depth_scale, sensor.bitshift)
        .with_context(|| format!("decoding depth {}", depth_path.display()))?;

    let sensor_cloud = back_project(&depth, &sensor.intrinsics);
    let rotation = match frame.rotation {
        Some(rows) => GravityAlignment::from_rows(rows).context("frame rotation")?,
        None => GravityAlignment::identity(),
    };
    let aligned = gravity_align(&sensor_cloud, &rotation);

    let d = depth_channel(&sensor_cloud, depth_mode);
    let h = height_channel(&aligned, percentile)?;
    let s = signed_angle_channel(&aligned);
    let (image, meta) = combine_channels(&d, &h, &s)?;

    write_pseudo_png(
        &image,
        &out_dir.join(format!("{}.png", frame.id)),
        bit_depth,
    )?;
    write_meta_json(&meta, &out_dir.join(format!("{}.meta.json", frame.id)))?;
    Ok(())
}
