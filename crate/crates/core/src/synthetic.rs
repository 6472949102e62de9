//! Deterministic synthetic data: depth scenes with exact box
//! annotations, random organized clouds, and random pseudo-images.
//! Used by tests, benches, and demo dataset generation.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encode::PseudoImage;
use crate::eval::boxes::BoxXYWH;
use crate::ingest::{CameraIntrinsics, DepthImage, OrganizedPointCloud};

/// One synthetic object: an axis-aligned pixel rectangle rendered as a
/// frontal surface at a fixed depth.
#[derive(Debug, Clone)]
pub struct SceneObject {
    pub rect: BoxXYWH,
    pub category: String,
    pub depth_m: f64,
}

/// A rendered scene: depth map, the camera that produced it, a rotation
/// into a z-up frame, and the exact object rectangles.
#[derive(Debug, Clone)]
pub struct SyntheticFrame {
    pub depth: DepthImage,
    pub intrinsics: CameraIntrinsics,
    /// Rows of the camera-to-upright rotation (x right, y forward, z up).
    pub rotation: [[f64; 3]; 3],
    pub objects: Vec<SceneObject>,
}

/// Camera-to-upright rotation for a level camera whose y axis points
/// down: x stays, the optical axis becomes "forward" (y), and up is -y.
pub fn camera_to_upright() -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]]
}

/// Renders a room-like depth map: a back wall, a floor plane 1.5 m
/// below the camera filling the lower rows, and the given objects as
/// frontal rectangles. Object depths must sit in front of the wall;
/// rectangles are clamped to the image.
pub fn floor_scene(width: usize, height: usize, objects: Vec<SceneObject>) -> SyntheticFrame {
    let intrinsics = CameraIntrinsics::new(
        0.9 * width as f64,
        0.9 * width as f64,
        (width as f64 - 1.0) / 2.0,
        (height as f64 - 1.0) / 2.0,
    )
    .expect("valid synthetic intrinsics");
    let wall_z = 8.0;
    let camera_height = 1.5;

    let mut values = vec![0.0f64; width * height];
    for v in 0..height {
        let dy = v as f64 - intrinsics.cy;
        let floor_z = if dy > 0.0 {
            camera_height * intrinsics.fy / dy
        } else {
            f64::INFINITY
        };
        let z = floor_z.min(wall_z);
        for u in 0..width {
            values[v * width + u] = z;
        }
    }
    for obj in &objects {
        let u0 = obj.rect.x.max(0.0) as usize;
        let v0 = obj.rect.y.max(0.0) as usize;
        let u1 = (obj.rect.x2().min(width as f64)) as usize;
        let v1 = (obj.rect.y2().min(height as f64)) as usize;
        for v in v0..v1 {
            for u in u0..u1 {
                let cell = &mut values[v * width + u];
                if obj.depth_m < *cell {
                    *cell = obj.depth_m;
                }
            }
        }
    }

    SyntheticFrame {
        depth: DepthImage::from_meters(width, height, values).expect("finite synthetic depths"),
        intrinsics,
        rotation: camera_to_upright(),
        objects,
    }
}

/// A floor scene with `n_objects` seeded random rectangles placed in the
/// wall region (above the horizon) so every object stands fully in
/// front of its background, plus a sprinkle of missing pixels that
/// avoids the object interiors.
pub fn random_scene(width: usize, height: usize, n_objects: usize, seed: u64) -> SyntheticFrame {
    assert!(width >= 16 && height >= 16, "scene too small");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let categories = ["chair", "bed", "table"];
    let half = height / 2;
    let mut objects: Vec<SceneObject> = Vec::with_capacity(n_objects);
    let overlaps = |r: &BoxXYWH, placed: &[SceneObject]| {
        placed.iter().any(|o| {
            r.x < o.rect.x2() && o.rect.x < r.x2() && r.y < o.rect.y2() && o.rect.y < r.y2()
        })
    };
    for i in 0..n_objects {
        let mut placed = false;
        for _attempt in 0..1000 {
            let w = rng.gen_range(width / 8..=width / 4) as f64;
            let h = rng.gen_range(height / 8..=half / 2) as f64;
            let x = rng.gen_range(0..=(width - w as usize).max(1) - 1) as f64;
            let y = rng.gen_range(0..half.saturating_sub(h as usize).max(1)) as f64;
            let rect = BoxXYWH::new(x, y, w, h);
            if overlaps(&rect, &objects) {
                continue;
            }
            objects.push(SceneObject {
                rect,
                category: categories[i % categories.len()].to_string(),
                depth_m: rng.gen_range(2.0..6.0),
            });
            placed = true;
            break;
        }
        assert!(
            placed,
            "could not place {n_objects} disjoint objects in {width}x{height}"
        );
    }
    let mut frame = floor_scene(width, height, objects);

    // Punch out missing pixels away from the objects.
    let mut values = frame.depth.values().to_vec();
    let inside = |u: usize, v: usize| {
        frame.objects.iter().any(|o| {
            (u as f64) >= o.rect.x
                && (u as f64) < o.rect.x2()
                && (v as f64) >= o.rect.y
                && (v as f64) < o.rect.y2()
        })
    };
    let holes = (width * height) / 50;
    for _ in 0..holes {
        let u = rng.gen_range(0..width);
        let v = rng.gen_range(0..height);
        if !inside(u, v) {
            values[v * width + u] = 0.0;
        }
    }
    frame.depth = DepthImage::from_meters(width, height, values).unwrap();
    frame
}

/// Random organized cloud for fuzzing: points spread over a box in
/// front of the origin, with roughly `invalid_fraction` cells knocked
/// out. One full row is always kept valid so scanline channels have
/// usable cells.
pub fn random_cloud(
    width: usize,
    height: usize,
    seed: u64,
    invalid_fraction: f64,
) -> OrganizedPointCloud {
    assert!(width >= 3 && height >= 1, "cloud too small for scanlines");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keep_row = rng.gen_range(0..height);
    let mut points = Vec::with_capacity(width * height);
    let mut valid = Vec::with_capacity(width * height);
    for v in 0..height {
        for _u in 0..width {
            let dropped = v != keep_row && rng.gen::<f64>() < invalid_fraction;
            if dropped {
                points.push(Vector3::zeros());
                valid.push(false);
            } else {
                points.push(Vector3::new(
                    rng.gen_range(-5.0..5.0),
                    rng.gen_range(-5.0..5.0),
                    rng.gen_range(0.5..10.0),
                ));
                valid.push(true);
            }
        }
    }
    OrganizedPointCloud::from_parts(width, height, points, valid)
}

/// Random normalized pseudo-image with roughly `missing_fraction` cells
/// masked (and zeroed, as the format requires).
pub fn random_pseudo_image(
    width: usize,
    height: usize,
    seed: u64,
    missing_fraction: f64,
) -> PseudoImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = width * height;
    let missing: Vec<bool> = (0..n)
        .map(|_| rng.gen::<f64>() < missing_fraction)
        .collect();
    let mut channels = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for ch in channels.iter_mut() {
        for (i, slot) in ch.iter_mut().enumerate() {
            if !missing[i] {
                *slot = rng.gen::<f64>();
            }
        }
    }
    PseudoImage::new(width, height, channels, missing).expect("generated image is valid")
}
