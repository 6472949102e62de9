//! Geometric training augmentations applied to a pseudo-image and its
//! boxes in lockstep: horizontal flip, keep-ratio resize, random crop,
//! and the seeded pipeline combining them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encode::PseudoImage;
use crate::eval::boxes::BoxXYWH;
use crate::parallel;

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("augment policy: {0}")]
    BadPolicy(String),
    #[error("resize target must be nonzero, got {0}x{1}")]
    BadTarget(u32, u32),
}

/// A box with its category label, in pixel units of the image it
/// belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledBox {
    pub bbox: BoxXYWH,
    pub category: String,
}

/// A pseudo-image together with its annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    pub image: PseudoImage,
    pub boxes: Vec<LabeledBox>,
}

fn default_flip_prob() -> f64 {
    0.5
}
fn default_resize_width() -> u32 {
    1333
}
fn default_resize_heights() -> Vec<u32> {
    (480..=800).step_by(32).collect()
}
fn default_crop_prob() -> f64 {
    0.5
}
fn default_crop_height() -> u32 {
    384
}
fn default_crop_width() -> u32 {
    600
}

/// Training-time augmentation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AugmentPolicy {
    pub flip_prob: f64,
    /// Width bound of the keep-ratio resize target.
    pub resize_width: u32,
    /// Candidate height bounds; one is drawn per frame.
    pub resize_heights: Vec<u32>,
    /// Probability of the crop-then-resize branch.
    pub crop_prob: f64,
    pub crop_height: u32,
    pub crop_width: u32,
    pub seed: u64,
}

impl Default for AugmentPolicy {
    fn default() -> Self {
        AugmentPolicy {
            flip_prob: default_flip_prob(),
            resize_width: default_resize_width(),
            resize_heights: default_resize_heights(),
            crop_prob: default_crop_prob(),
            crop_height: default_crop_height(),
            crop_width: default_crop_width(),
            seed: 0,
        }
    }
}

impl AugmentPolicy {
    pub fn validate(&self) -> Result<(), AugmentError> {
        for (name, p) in [("flip_prob", self.flip_prob), ("crop_prob", self.crop_prob)] {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(AugmentError::BadPolicy(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        if self.resize_width == 0 {
            return Err(AugmentError::BadPolicy(
                "resize_width must be nonzero".into(),
            ));
        }
        if self.resize_heights.is_empty() || self.resize_heights.contains(&0) {
            return Err(AugmentError::BadPolicy(
                "resize_heights must be a nonempty list of nonzero heights".into(),
            ));
        }
        if self.crop_height == 0 || self.crop_width == 0 {
            return Err(AugmentError::BadPolicy("crop size must be nonzero".into()));
        }
        Ok(())
    }
}

/// Per-frame RNG derived from the policy seed and the frame index via a
/// splitmix64-style mix, so frames get decorrelated streams and any
/// frame can be re-augmented without replaying the whole dataset.
pub fn rng_for_frame(seed: u64, frame_index: u64) -> ChaCha8Rng {
    let mut s = seed.wrapping_add(frame_index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    s ^= s >> 30;
    s = s.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    s ^= s >> 27;
    s = s.wrapping_mul(0x94D0_49BB_1331_11EB);
    s ^= s >> 31;
    ChaCha8Rng::seed_from_u64(s)
}

/// Mirrors image and boxes about the vertical center line:
/// pixel column u maps to W-1-u, box x maps to W - x - w.
pub fn hflip(input: &LabeledImage) -> LabeledImage {
    let img = &input.image;
    let (w, h) = (img.width(), img.height());
    let mut channels = [vec![0.0; w * h], vec![0.0; w * h], vec![0.0; w * h]];
    let mut missing = vec![false; w * h];
    for v in 0..h {
        for u in 0..w {
            let src = v * w + (w - 1 - u);
            let dst = v * w + u;
            for (c, ch) in channels.iter_mut().enumerate() {
                ch[dst] = img.channel(c)[src];
            }
            missing[dst] = img.missing_mask()[src];
        }
    }
    let boxes = input
        .boxes
        .iter()
        .map(|b| LabeledBox {
            bbox: BoxXYWH::new(w as f64 - b.bbox.x - b.bbox.w, b.bbox.y, b.bbox.w, b.bbox.h),
            category: b.category.clone(),
        })
        .collect();
    LabeledImage {
        image: PseudoImage::from_parts(w, h, channels, missing),
        boxes,
    }
}

fn clip_box(b: &BoxXYWH, width: f64, height: f64) -> Option<BoxXYWH> {
    let x0 = b.x.max(0.0).min(width);
    let y0 = b.y.max(0.0).min(height);
    let x1 = (b.x + b.w).max(0.0).min(width);
    let y1 = (b.y + b.h).max(0.0).min(height);
    if x1 - x0 > 0.0 && y1 - y0 > 0.0 {
        Some(BoxXYWH::new(x0, y0, x1 - x0, y1 - y0))
    } else {
        None
    }
}

/// Scales the image by the single factor that fits it inside
/// `target_w` x `target_h`, preserving aspect ratio. Channel values are
/// sampled bilinearly, the missing mask by nearest neighbor, and boxes
/// are scaled by the same factor then clipped to the output bounds.
pub fn resize_keep_ratio(
    input: &LabeledImage,
    target_w: u32,
    target_h: u32,
) -> Result<LabeledImage, AugmentError> {
    if target_w == 0 || target_h == 0 {
        return Err(AugmentError::BadTarget(target_w, target_h));
    }
    let img = &input.image;
    let (w, h) = (img.width(), img.height());
    let scale = (f64::from(target_w) / w as f64).min(f64::from(target_h) / h as f64);
    let ow = ((w as f64 * scale).round() as usize).max(1);
    let oh = ((h as f64 * scale).round() as usize).max(1);

    let rows = parallel::map_indexed(oh, |oy| {
        let sy = ((oy as f64 + 0.5) / scale - 0.5).clamp(0.0, (h - 1) as f64);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let ty = sy - y0 as f64;
        let ny = sy.round() as usize;
        let mut row = [vec![0.0; ow], vec![0.0; ow], vec![0.0; ow]];
        let mut row_missing = vec![false; ow];
        for ox in 0..ow {
            let sx = ((ox as f64 + 0.5) / scale - 0.5).clamp(0.0, (w - 1) as f64);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let tx = sx - x0 as f64;
            let nx = sx.round() as usize;
            row_missing[ox] = img.missing_mask()[ny * w + nx];
            if row_missing[ox] {
                continue;
            }
            for (c, out) in row.iter_mut().enumerate() {
                let ch = img.channel(c);
                let top = ch[y0 * w + x0] * (1.0 - tx) + ch[y0 * w + x1] * tx;
                let bot = ch[y1 * w + x0] * (1.0 - tx) + ch[y1 * w + x1] * tx;
                out[ox] = top * (1.0 - ty) + bot * ty;
            }
        }
        (row, row_missing)
    });

    let mut channels = [
        Vec::with_capacity(ow * oh),
        Vec::with_capacity(ow * oh),
        Vec::with_capacity(ow * oh),
    ];
    let mut missing = Vec::with_capacity(ow * oh);
    for (row, row_missing) in rows {
        let [r0, r1, r2] = row;
        channels[0].extend(r0);
        channels[1].extend(r1);
        channels[2].extend(r2);
        missing.extend(row_missing);
    }

    let boxes = input
        .boxes
        .iter()
        .filter_map(|b| {
            let scaled = BoxXYWH::new(
                b.bbox.x * scale,
                b.bbox.y * scale,
                b.bbox.w * scale,
                b.bbox.h * scale,
            );
            clip_box(&scaled, ow as f64, oh as f64).map(|bbox| LabeledBox {
                bbox,
                category: b.category.clone(),
            })
        })
        .collect();

    Ok(LabeledImage {
        image: PseudoImage::from_parts(ow, oh, channels, missing),
        boxes,
    })
}

/// Cuts a window of at most `crop_h` x `crop_w` pixels at a uniformly
/// drawn offset (x first, then y). Crops larger than the image clamp to
/// the image size. Boxes are translated, clipped to the window, and
/// dropped once empty.
pub fn random_crop(
    input: &LabeledImage,
    crop_h: u32,
    crop_w: u32,
    rng: &mut impl Rng,
) -> (LabeledImage, (usize, usize)) {
    let img = &input.image;
    let (w, h) = (img.width(), img.height());
    let cw = (crop_w as usize).min(w);
    let ch = (crop_h as usize).min(h);
    let x0 = rng.gen_range(0..=w - cw);
    let y0 = rng.gen_range(0..=h - ch);

    let mut channels = [
        Vec::with_capacity(cw * ch),
        Vec::with_capacity(cw * ch),
        Vec::with_capacity(cw * ch),
    ];
    let mut missing = Vec::with_capacity(cw * ch);
    for v in 0..ch {
        let src = (y0 + v) * w + x0;
        for (c, ch) in channels.iter_mut().enumerate() {
            ch.extend_from_slice(&img.channel(c)[src..src + cw]);
        }
        missing.extend_from_slice(&img.missing_mask()[src..src + cw]);
    }

    let boxes = input
        .boxes
        .iter()
        .filter_map(|b| {
            let moved = BoxXYWH::new(
                b.bbox.x - x0 as f64,
                b.bbox.y - y0 as f64,
                b.bbox.w,
                b.bbox.h,
            );
            clip_box(&moved, cw as f64, ch as f64).map(|bbox| LabeledBox {
                bbox,
                category: b.category.clone(),
            })
        })
        .collect();

    (
        LabeledImage {
            image: PseudoImage::from_parts(cw, ch, channels, missing),
            boxes,
        },
        (x0, y0),
    )
}

/// What one pipeline application did, for previews and reproducibility.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformLog {
    pub flipped: bool,
    /// Offset of the crop window, when the crop branch was taken.
    pub crop_offset: Option<(usize, usize)>,
    pub resize_target: (u32, u32),
    pub input_size: (usize, usize),
    pub output_size: (usize, usize),
}

/// One training-time draw: maybe flip, then either resize straight to a
/// drawn target height or crop first and resize after.
///
/// The RNG is consumed in a fixed order (flip gate, branch gate, crop
/// offsets when cropping, height choice), so a given rng state
/// reproduces the transform bit for bit.
pub fn train_transform(
    input: &LabeledImage,
    policy: &AugmentPolicy,
    rng: &mut impl Rng,
) -> Result<(LabeledImage, TransformLog), AugmentError> {
    policy.validate()?;
    let input_size = (input.image.width(), input.image.height());

    let flipped = rng.gen::<f64>() < policy.flip_prob;
    let stage = if flipped { hflip(input) } else { input.clone() };

    let take_crop = rng.gen::<f64>() < policy.crop_prob;
    let (stage, crop_offset) = if take_crop {
        let (cropped, offset) = random_crop(&stage, policy.crop_height, policy.crop_width, rng);
        (cropped, Some(offset))
    } else {
        (stage, None)
    };

    let height = policy.resize_heights[rng.gen_range(0..policy.resize_heights.len())];
    let out = resize_keep_ratio(&stage, policy.resize_width, height)?;
    let log = TransformLog {
        flipped,
        crop_offset,
        resize_target: (policy.resize_width, height),
        input_size,
        output_size: (out.image.width(), out.image.height()),
    };
    Ok((out, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::random_pseudo_image;
    use approx::assert_relative_eq;

    fn labeled(seed: u64, w: usize, h: usize, boxes: Vec<(f64, f64, f64, f64)>) -> LabeledImage {
        LabeledImage {
            image: random_pseudo_image(w, h, seed, 0.1),
            boxes: boxes
                .into_iter()
                .enumerate()
                .map(|(i, (x, y, bw, bh))| LabeledBox {
                    bbox: BoxXYWH::new(x, y, bw, bh),
                    category: format!("c{}", i % 3),
                })
                .collect(),
        }
    }

    #[test]
    fn hflip_mirrors_pixels_and_boxes() {
        let img = labeled(1, 10, 6, vec![(1.0, 2.0, 3.0, 2.0)]);
        let flipped = hflip(&img);
        assert_eq!(flipped.image.value_at(0, 0, 3), img.image.value_at(0, 9, 3));
        let b = &flipped.boxes[0].bbox;
        assert_eq!((b.x, b.y, b.w, b.h), (6.0, 2.0, 3.0, 2.0));
    }

    #[test]
    fn hflip_is_an_involution() {
        let img = labeled(2, 9, 5, vec![(0.25, 1.0, 2.5, 3.75)]);
        let twice = hflip(&hflip(&img));
        assert_eq!(twice.image, img.image);
        assert_eq!(twice.boxes, img.boxes);
    }

    #[test]
    fn resize_to_own_size_is_identity() {
        let img = labeled(3, 12, 7, vec![(2.0, 1.0, 4.0, 3.0)]);
        let same = resize_keep_ratio(&img, 12, 7).unwrap();
        assert_eq!(same.image, img.image);
        assert_eq!(same.boxes, img.boxes);
    }

    #[test]
    fn resize_uses_single_limiting_scale() {
        let img = labeled(4, 100, 50, vec![(10.0, 10.0, 20.0, 10.0)]);
        // Width allows 2x, height only 1.5x; 1.5x must win.
        let out = resize_keep_ratio(&img, 200, 75).unwrap();
        assert_eq!((out.image.width(), out.image.height()), (150, 75));
        let b = &out.boxes[0].bbox;
        assert_relative_eq!(b.x, 15.0);
        assert_relative_eq!(b.w, 30.0);
        assert_relative_eq!(b.h, 15.0);
        assert_relative_eq!(b.w / b.h, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn resize_clips_boxes_to_output_bounds() {
        let img = labeled(
            5,
            10,
            10,
            vec![(8.0, 8.0, 5.0, 5.0), (-2.0, -2.0, 1.0, 1.0)],
        );
        let out = resize_keep_ratio(&img, 20, 20).unwrap();
        assert_eq!(out.boxes.len(), 1);
        let b = &out.boxes[0].bbox;
        assert!(b.x + b.w <= out.image.width() as f64 + 1e-12);
        assert!(b.y + b.h <= out.image.height() as f64 + 1e-12);
    }

    #[test]
    fn resize_rejects_zero_target() {
        let img = labeled(6, 4, 4, vec![]);
        assert!(matches!(
            resize_keep_ratio(&img, 0, 5),
            Err(AugmentError::BadTarget(0, 5))
        ));
    }

    #[test]
    fn crop_windows_are_seeded_and_translated() {
        let img = labeled(7, 30, 20, vec![(12.0, 9.0, 6.0, 6.0)]);
        let mut rng_a = rng_for_frame(9, 0);
        let mut rng_b = rng_for_frame(9, 0);
        let (out_a, off_a) = random_crop(&img, 10, 10, &mut rng_a);
        let (out_b, off_b) = random_crop(&img, 10, 10, &mut rng_b);
        assert_eq!(off_a, off_b);
        assert_eq!(out_a.image, out_b.image);
        for b in &out_a.boxes {
            assert!(b.bbox.x >= 0.0 && b.bbox.x + b.bbox.w <= 10.0);
            assert!(b.bbox.y >= 0.0 && b.bbox.y + b.bbox.h <= 10.0);
        }
        // Pixel content matches the offset window.
        let (x0, y0) = off_a;
        assert_eq!(
            out_a.image.value_at(2, 3, 4),
            img.image.value_at(2, x0 + 3, y0 + 4)
        );
    }

    #[test]
    fn oversized_crop_clamps_to_image() {
        let img = labeled(8, 5, 4, vec![(1.0, 1.0, 2.0, 2.0)]);
        let mut rng = rng_for_frame(0, 0);
        let (out, offset) = random_crop(&img, 100, 100, &mut rng);
        assert_eq!(offset, (0, 0));
        assert_eq!(out.image, img.image);
        assert_eq!(out.boxes, img.boxes);
    }

    #[test]
    fn pipeline_is_deterministic_per_seed_and_frame() {
        let img = labeled(
            10,
            40,
            30,
            vec![(5.0, 5.0, 10.0, 8.0), (20.0, 12.0, 9.0, 9.0)],
        );
        let policy = AugmentPolicy {
            resize_width: 64,
            resize_heights: vec![24, 32, 48],
            crop_height: 16,
            crop_width: 24,
            ..AugmentPolicy::default()
        };
        let run = |frame: u64| {
            let mut rng = rng_for_frame(policy.seed, frame);
            train_transform(&img, &policy, &mut rng).unwrap()
        };
        let (out_a, log_a) = run(3);
        let (out_b, log_b) = run(3);
        assert_eq!(out_a.image, out_b.image);
        assert_eq!(out_a.boxes, out_b.boxes);
        assert_eq!(log_a.flipped, log_b.flipped);
        assert_eq!(log_a.crop_offset, log_b.crop_offset);
        assert_eq!(log_a.resize_target, log_b.resize_target);

        // Different frames see different draws somewhere in 20 tries.
        let mut any_different = false;
        for frame in 0..20 {
            let (_, log) = run(frame);
            if log.resize_target != log_a.resize_target || log.flipped != log_a.flipped {
                any_different = true;
                break;
            }
        }
        assert!(any_different);
    }

    #[test]
    fn flip_gate_respects_probability_extremes() {
        let img = labeled(11, 8, 8, vec![]);
        for (p, expect) in [(0.0, false), (1.0, true)] {
            let policy = AugmentPolicy {
                flip_prob: p,
                resize_width: 8,
                resize_heights: vec![8],
                crop_prob: 0.0,
                ..AugmentPolicy::default()
            };
            let mut rng = rng_for_frame(1, 1);
            let (_, log) = train_transform(&img, &policy, &mut rng).unwrap();
            assert_eq!(log.flipped, expect);
        }
    }

    #[test]
    fn policy_validation_catches_bad_fields() {
        let mut policy = AugmentPolicy {
            flip_prob: 1.5,
            ..AugmentPolicy::default()
        };
        assert!(policy.validate().is_err());
        policy.flip_prob = 0.5;
        policy.resize_heights.clear();
        assert!(policy.validate().is_err());
    }
}
