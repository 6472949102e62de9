//! `dhs eval`: detection scoring, either from raw box files or from
//! precomputed per-category values that only need subgroup averaging.

use anyhow::{Context, Result};
use std::collections::BTreeMap;
use std::path::PathBuf;

use dhs_core::eval::{
    evaluate_with_subgroups, load_detections, load_ground_truth, load_subgroups, subgroup_mean,
    EvalOptions, Interpolation, SubgroupSpec,
};

use crate::config::PipelineConfig;
use crate::{EvalArgs, InterpolationArg};

pub fn run(config: &PipelineConfig, args: EvalArgs) -> Result<()> {
    let mut subgroup_paths: Vec<PathBuf> = config.eval.subgroups.clone();
    subgroup_paths.extend(args.subgroups.iter().cloned());
    let mut subgroups: Vec<SubgroupSpec> = Vec::new();
    for path in &subgroup_paths {
        subgroups.extend(
            load_subgroups(path)
                .with_context(|| format!("loading subgroups {}", path.display()))?,
        );
    }

    if let Some(path) = &args.precomputed {
        anyhow::ensure!(
            !subgroups.is_empty(),
            "--precomputed needs at least one subgroup spec to average over"
        );
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let values: BTreeMap<String, f64> = serde_json::from_str(&text)
            .with_context(|| format!("parsing {} as a category-to-value object", path.display()))?;
        for spec in &subgroups {
            let (mean, missing) = subgroup_mean(&values, spec);
            match mean {
                Some(m) => {
                    let n = spec.categories.len() - missing.len();
                    print!("subgroup {:<16} mean {m:.4} over {n} categories", spec.name);
                    if missing.is_empty() {
                        println!();
                    } else {
                        println!(" (missing: {})", missing.join(", "));
                    }
                }
                None => println!("subgroup {:<16} has no values to average", spec.name),
            }
        }
        return Ok(());
    }

    let (gt_path, det_path) = match (&args.gt, &args.det) {
        (Some(g), Some(d)) => (g, d),
        _ => anyhow::bail!("pass either --gt and --det, or --precomputed"),
    };
    let gts = load_ground_truth(gt_path)
        .with_context(|| format!("loading ground truth {}", gt_path.display()))?;
    let dets = load_detections(det_path)
        .with_context(|| format!("loading detections {}", det_path.display()))?;

    let options = EvalOptions {
        interpolation: match args.interpolation {
            Some(InterpolationArg::Coco101) => Interpolation::Coco101,
            Some(InterpolationArg::Pascal11) => Interpolation::Pascal11,
            None => config.eval.interpolation,
        },
        ..EvalOptions::default()
    };

    let report = evaluate_with_subgroups(&dets, &gts, &options, &subgroups)?;
    print!("{}", report.render_text());

    if let Some(path) = &args.json {
        report.write_json(path)?;
        log::debug!("wrote report JSON to {}", path.display());
    }
    if let Some(path) = &args.csv {
        std::fs::write(path, report.to_csv())
            .with_context(|| format!("writing {}", path.display()))?;
        log::debug!("wrote report CSV to {}", path.display());
    }
    Ok(())
}
