//! `dhs analyze`: backbone arithmetic tables, a convolution FLOPs
//! calculator, and feature-tensor diagnostics.

use anyhow::{Context, Result};

use dhs_core::analysis::{
    conv_flops, cumulative_receptive_field, default_grid, feature_histogram, feature_montage,
    load_backbone_spec, presets, read_feature_tensor, sparsity, BackboneSpec, LayerSpec,
};

use crate::{parse_pair, AnalyzeArgs};

pub fn run(args: AnalyzeArgs) -> Result<()> {
    let mut any_output = false;

    if let Some(text) = &args.flops {
        print_flops(text)?;
        any_output = true;
    }

    if let Some(spec) = load_spec(&args)? {
        print_backbone(&spec, &args)?;
        any_output = true;
    }

    if let Some(path) = &args.tensor {
        let tensor = read_feature_tensor(path)
            .with_context(|| format!("reading feature tensor {}", path.display()))?;
        println!(
            "tensor {}: {}x{}x{} values",
            path.display(),
            tensor.height(),
            tensor.width(),
            tensor.channels()
        );
        let frac = sparsity(&tensor, args.eps)?;
        println!("sparsity(|v| <= {:e}): {:.4}", args.eps, frac);

        if let Some(out) = &args.histogram {
            let zoom = args.zoom.as_deref().map(parse_zoom).transpose()?;
            let hist = feature_histogram(&tensor, args.bins, zoom)?;
            std::fs::write(out, serde_json::to_string_pretty(&hist)?)
                .with_context(|| format!("writing {}", out.display()))?;
            println!(
                "histogram: {} bins over raw range [{}, {}] -> {}",
                hist.counts.len(),
                hist.global_min,
                hist.global_max,
                out.display()
            );
        }

        if let Some(out) = &args.montage {
            let (rows, cols) = match &args.grid {
                Some(text) => parse_pair(text, "--grid")?,
                None => default_grid(tensor.channels()),
            };
            let image = feature_montage(&tensor, rows, cols)?;
            image
                .save(out)
                .with_context(|| format!("writing {}", out.display()))?;
            println!(
                "montage: {rows}x{cols} grid of {}x{} tiles -> {}",
                tensor.height(),
                tensor.width(),
                out.display()
            );
        }
        any_output = true;
    }

    anyhow::ensure!(
        any_output,
        "nothing to do: pass --preset/--spec, --flops, or --tensor"
    );
    Ok(())
}

fn load_spec(args: &AnalyzeArgs) -> Result<Option<BackboneSpec>> {
    if let Some(name) = &args.preset {
        let spec = presets::by_name(name)
            .with_context(|| format!("unknown preset {name:?}; try resnet50 or swin_t"))?;
        return Ok(Some(spec));
    }
    if let Some(path) = &args.spec {
        let spec = load_backbone_spec(path)
            .with_context(|| format!("loading backbone spec {}", path.display()))?;
        return Ok(Some(spec));
    }
    Ok(None)
}

fn print_backbone(spec: &BackboneSpec, args: &AnalyzeArgs) -> Result<()> {
    let input = match &args.input {
        Some(text) => parse_pair(text, "--input")?,
        None => spec.input,
    };
    println!("backbone {} at input {}x{}", spec.name, input.0, input.1);
    println!(
        "{:<10} {:>14} {:>9} {:>6} {:>10}",
        "stage", "shape", "local_rf", "heads", "heads*dim"
    );
    for row in spec.summarize(input) {
        println!(
            "{:<10} {:>14} {:>9} {:>6} {:>10}",
            row.name,
            format!("{}x{}x{}", row.shape.0, row.shape.1, row.shape.2),
            format!("{0}x{0}", row.local_rf),
            row.heads,
            row.head_dim_product
        );
    }

    if args.rf {
        // Collapse each stage to one sliding window: its local field as
        // the kernel, its stride relative to the previous stage.
        let mut prev = 1u32;
        let layers: Vec<LayerSpec> = spec
            .blocks
            .iter()
            .map(|b| {
                let layer = LayerSpec {
                    kernel: b.local_receptive_field(),
                    stride: b.stride / prev.max(1),
                };
                prev = b.stride;
                layer
            })
            .collect();
        println!("cumulative receptive field (one window per stage):");
        for (block, (rf, jump)) in spec.blocks.iter().zip(cumulative_receptive_field(&layers)?) {
            println!("{:<10} rf {rf:>6}  jump {jump:>5}", block.name);
        }
    }
    Ok(())
}

fn print_flops(text: &str) -> Result<()> {
    let parts: Vec<u64> = text
        .split(',')
        .map(|s| s.trim().parse::<u64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("--flops expects H,W,CIN,K,COUT, got {text:?}"))?;
    anyhow::ensure!(
        parts.len() == 5,
        "--flops expects exactly five integers, got {}",
        parts.len()
    );
    let (h, w, c_in, k, c_out) = (parts[0], parts[1], parts[2], parts[3], parts[4]);
    match conv_flops(h, w, c_in, k, c_out) {
        Some(flops) => {
            println!("conv {h}x{w} out, {c_in} in, {k}x{k} kernel, {c_out} filters: {flops} FLOPs")
        }
        None => anyhow::bail!("FLOP count overflows"),
    }
    Ok(())
}

fn parse_zoom(text: &str) -> Result<(f64, f64)> {
    let (lo, hi) = text
        .split_once(',')
        .with_context(|| format!("--zoom expects LO,HI, got {text:?}"))?;
    Ok((lo.trim().parse()?, hi.trim().parse()?))
}
