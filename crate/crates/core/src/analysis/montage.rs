//! Channel montages: every channel of a feature tensor rendered as a
//! grayscale tile on one grid image.

use image::GrayImage;

use super::tensor::FeatureTensor;
use super::AnalysisError;
use crate::parallel;

/// Grid (rows, cols) for a channel count: known stage widths get their
/// conventional layouts, anything else a near-square grid.
pub fn default_grid(channels: usize) -> (usize, usize) {
    match channels {
        2048 => (64, 32),
        768 => (32, 24),
        c => {
            let cols = (c as f64).sqrt().ceil() as usize;
            let rows = c.div_ceil(cols.max(1));
            (rows.max(1), cols.max(1))
        }
    }
}

/// Renders each channel as an h x w grayscale tile, normalized to its
/// own min-max range (constant channels go black), laid out row-major
/// on a rows x cols grid. Unused tiles stay black.
pub fn feature_montage(
    tensor: &FeatureTensor,
    rows: usize,
    cols: usize,
) -> Result<GrayImage, AnalysisError> {
    let c = tensor.channels();
    if rows * cols < c {
        return Err(AnalysisError::GridTooSmall {
            rows,
            cols,
            channels: c,
        });
    }
    let (h, w) = (tensor.height(), tensor.width());

    let tiles: Vec<Vec<u8>> = parallel::map_indexed(c, |ch| {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in 0..h {
            for u in 0..w {
                let x = tensor.value_at(v, u, ch);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        let range = hi - lo;
        let mut tile = vec![0u8; h * w];
        if range > 0.0 {
            for v in 0..h {
                for u in 0..w {
                    let x = (tensor.value_at(v, u, ch) - lo) / range;
                    tile[v * w + u] = (x * 255.0).round() as u8;
                }
            }
        }
        tile
    });

    let mut out = GrayImage::new((cols * w) as u32, (rows * h) as u32);
    for (ch, tile) in tiles.iter().enumerate() {
        let (r, c) = (ch / cols, ch % cols);
        for v in 0..h {
            for u in 0..w {
                out.put_pixel(
                    (c * w + u) as u32,
                    (r * h + v) as u32,
                    image::Luma([tile[v * w + u]]),
                );
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grids_cover_known_and_generic_widths() {
        assert_eq!(default_grid(2048), (64, 32));
        assert_eq!(default_grid(768), (32, 24));
        let (r, c) = default_grid(10);
        assert!(r * c >= 10);
        assert_eq!(default_grid(1), (1, 1));
    }

    #[test]
    fn montage_lays_tiles_out_row_major() {
        // 2x2 spatial, 3 channels; channel index encoded in the values.
        let mut values = Vec::new();
        for _pix in 0..4 {
            for ch in 0..3 {
                values.push(ch as f64 * 10.0);
            }
        }
        // Make each channel non-constant so normalization has a range:
        // bump one pixel per channel to its own max. The layout is
        // channel-fastest, so pixel 0 occupies the first three slots.
        for v in &mut values[..3] {
            *v += 5.0;
        }
        let t = FeatureTensor::new(2, 2, 3, values).unwrap();
        let img = feature_montage(&t, 2, 2).unwrap();
        assert_eq!(img.dimensions(), (4, 4));
        // Pixel 0 of each tile is its channel maximum: white.
        assert_eq!(img.get_pixel(0, 0).0[0], 255);
        assert_eq!(img.get_pixel(2, 0).0[0], 255);
        assert_eq!(img.get_pixel(0, 2).0[0], 255);
        // The fourth tile is unused: black.
        assert_eq!(img.get_pixel(2, 2).0[0], 0);
        assert_eq!(img.get_pixel(3, 3).0[0], 0);
    }

    #[test]
    fn constant_channels_render_black() {
        let t = FeatureTensor::new(2, 2, 1, vec![4.2; 4]).unwrap();
        let img = feature_montage(&t, 1, 1).unwrap();
        assert!(img.pixels().all(|p| p.0[0] == 0));
    }

    #[test]
    fn undersized_grid_is_rejected() {
        let t = FeatureTensor::new(1, 1, 5, vec![0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(matches!(
            feature_montage(&t, 2, 2),
            Err(AnalysisError::GridTooSmall { channels: 5, .. })
        ));
    }
}
