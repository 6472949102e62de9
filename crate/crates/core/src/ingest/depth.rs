//! 16-bit depth PNG decoding and encoding.

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma};
use std::io::Cursor;

use super::IngestError;

/// Dense depth map in meters. A value of exactly 0.0 marks a missing
/// measurement; every other value is finite and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl DepthImage {
    /// Builds a depth image from row-major meter values.
    pub fn from_meters(width: usize, height: usize, values: Vec<f64>) -> Result<Self, IngestError> {
        if width == 0 || height == 0 {
            return Err(IngestError::EmptyImage { width, height });
        }
        if values.len() != width * height {
            return Err(IngestError::SizeMismatch {
                what: "depth image",
                got: values.len(),
                expected: width * height,
                width,
                height,
            });
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(IngestError::InvalidDepth {
                    u: i % width,
                    v: i / width,
                    value: v,
                });
            }
        }
        Ok(DepthImage {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Depth in meters at column `u`, row `v`; 0.0 means missing.
    pub fn depth_at(&self, u: usize, v: usize) -> f64 {
        self.values[v * self.width + u]
    }

    pub fn is_missing(&self, u: usize, v: usize) -> bool {
        self.depth_at(u, v) == 0.0
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn check_scale(scale: f64) -> Result<(), IngestError> {
    if !scale.is_finite() || scale <= 0.0 {
        return Err(IngestError::BadScale(scale));
    }
    Ok(())
}

/// Decodes a 16-bit grayscale PNG into meters.
///
/// `scale` divides the raw integer (1000.0 for millimeter PNGs). When
/// `bitshift` is set, each raw value is first rotated right by three
/// bits, undoing the storage convention of captures that keep the low
/// depth bits in the high bit positions.
pub fn decode_depth_png(
    bytes: &[u8],
    scale: f64,
    bitshift: bool,
) -> Result<DepthImage, IngestError> {
    check_scale(scale)?;
    let decoded = image::load_from_memory(bytes)?;
    let gray16 = match decoded {
        DynamicImage::ImageLuma16(img) => img,
        other => {
            return Err(IngestError::NotSixteenBit {
                found: format!("{:?}", other.color()),
            })
        }
    };
    let (w, h) = (gray16.width() as usize, gray16.height() as usize);
    if w == 0 || h == 0 {
        return Err(IngestError::EmptyImage {
            width: w,
            height: h,
        });
    }
    let values = gray16
        .into_raw()
        .into_iter()
        .map(|raw| {
            let raw = if bitshift { raw.rotate_right(3) } else { raw };
            f64::from(raw) / scale
        })
        .collect();
    Ok(DepthImage {
        width: w,
        height: h,
        values,
    })
}

/// Encodes meters back into a 16-bit grayscale PNG, the inverse of
/// [`decode_depth_png`] up to integer rounding.
pub fn encode_depth_png(
    depth: &DepthImage,
    scale: f64,
    bitshift: bool,
) -> Result<Vec<u8>, IngestError> {
    check_scale(scale)?;
    let mut raw = Vec::with_capacity(depth.values.len());
    for (i, &meters) in depth.values.iter().enumerate() {
        let scaled = (meters * scale).round();
        if scaled > f64::from(u16::MAX) {
            return Err(IngestError::DepthOutOfRange {
                u: i % depth.width,
                v: i / depth.width,
                value: meters,
                scale,
            });
        }
        let q = scaled as u16;
        raw.push(if bitshift { q.rotate_left(3) } else { q });
    }
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(depth.width as u32, depth.height as u32, raw)
            .expect("buffer sized from image dimensions");
    let mut out = Cursor::new(Vec::new());
    DynamicImage::ImageLuma16(buf).write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}
