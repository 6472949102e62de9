//! Generates a small self-contained demo dataset: depth PNGs with a
//! manifest, exact ground truth, and deliberately imperfect detections
//! (jittered boxes, a few misses, duplicates, and label mixups) so the
//! evaluator has something non-trivial to score.
//!
//! Usage: cargo run -p dhs-core --example make_demo [-- <dir> [frames]]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dhs_core::ingest::{encode_depth_png, save_manifest, FrameRecord, Manifest, SensorProfile};
use dhs_core::synthetic::random_scene;

fn main() {
    let mut args = std::env::args().skip(1);
    let root = PathBuf::from(args.next().unwrap_or_else(|| "demo_data".into()));
    let n_frames: u64 = args
        .next()
        .map(|s| s.parse().expect("frame count must be an integer"))
        .unwrap_or(12);

    std::fs::create_dir_all(&root).expect("create output dir");
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    let mut sensors = BTreeMap::new();
    let mut frames = Vec::new();
    let mut gt_lines = Vec::new();
    let mut det_lines = Vec::new();
    for i in 0..n_frames {
        let id = format!("frame{i:03}");
        let scene = random_scene(320, 240, 4, 100 + i);
        let png = encode_depth_png(&scene.depth, 1000.0, false).expect("encode depth");
        std::fs::write(root.join(format!("{id}.png")), png).expect("write depth png");
        sensors
            .entry("demo_cam".to_string())
            .or_insert(SensorProfile {
                intrinsics: scene.intrinsics,
                depth_scale: 1000.0,
                bitshift: false,
            });
        frames.push(FrameRecord {
            id: id.clone(),
            depth: format!("{id}.png").into(),
            sensor: "demo_cam".into(),
            rotation: Some(scene.rotation),
            gt: Some("gt.jsonl".into()),
        });

        for obj in &scene.objects {
            let r = &obj.rect;
            gt_lines.push(
                serde_json::json!({
                    "image_id": id, "category": obj.category,
                    "bbox": [r.x, r.y, r.w, r.h],
                })
                .to_string(),
            );

            // Detections: usually a jittered copy of the truth, sometimes
            // missing, duplicated, or relabeled.
            if rng.gen::<f64>() < 0.12 {
                continue;
            }
            let copies = if rng.gen::<f64>() < 0.15 { 2 } else { 1 };
            for copy in 0..copies {
                let jitter = 2.0 + 6.0 * copy as f64;
                let category = if rng.gen::<f64>() < 0.08 {
                    ["chair", "bed", "table"][rng.gen_range(0..3)]
                } else {
                    obj.category.as_str()
                };
                det_lines.push(
                    serde_json::json!({
                        "image_id": id, "category": category,
                        "bbox": [
                            r.x + rng.gen_range(-jitter..=jitter),
                            r.y + rng.gen_range(-jitter..=jitter),
                            (r.w + rng.gen_range(-jitter..=jitter)).max(4.0),
                            (r.h + rng.gen_range(-jitter..=jitter)).max(4.0),
                        ],
                        "score": rng.gen_range(0.3..0.99),
                    })
                    .to_string(),
                );
            }
        }
    }

    save_manifest(&Manifest { sensors, frames }, &root.join("manifest.json"))
        .expect("write manifest");
    std::fs::write(root.join("gt.jsonl"), gt_lines.join("\n")).expect("write gt");
    std::fs::write(root.join("det.jsonl"), det_lines.join("\n")).expect("write det");
    std::fs::write(
        root.join("pipeline.toml"),
        "[dataset]\n\
         manifest = \"manifest.json\"\n\
         output_dir = \"out\"\n\n\
         [augment]\n\
         resize_width = 400\n\
         resize_heights = [200, 240, 280]\n\
         crop_height = 160\n\
         crop_width = 220\n\
         seed = 11\n",
    )
    .expect("write config");

    let dir = root.display();
    println!("wrote {n_frames} frames into {dir}/");
    println!();
    println!("try it out:");
    println!("  cd {dir}");
    println!("  dhs convert --manifest manifest.json --out out");
    println!("  dhs --config pipeline.toml augment-preview --manifest manifest.json --out out");
    println!("  dhs eval --gt gt.jsonl --det det.jsonl --json report.json");
    println!("  dhs report --input report.json --csv per_category.csv");
}
