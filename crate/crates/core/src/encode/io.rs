//! PNG and sidecar round-trips for pseudo-images.

use image::{DynamicImage, ImageBuffer, ImageFormat, Rgb};
use std::io::Cursor;
use std::path::Path;

use super::{EncodeError, EncodeMeta, PseudoImage};

/// Quantization width for stored pseudo-images.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PngBitDepth {
    #[default]
    Eight,
    Sixteen,
}

fn to_png_bytes(img: &PseudoImage, depth: PngBitDepth) -> Result<Vec<u8>, EncodeError> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let n = img.width() * img.height();
    let mut out = Cursor::new(Vec::new());
    match depth {
        PngBitDepth::Eight => {
            let mut raw = Vec::with_capacity(n * 3);
            for i in 0..n {
                for c in 0..3 {
                    raw.push((img.channel(c)[i] * 255.0).round() as u8);
                }
            }
            let buf: ImageBuffer<Rgb<u8>, Vec<u8>> =
                ImageBuffer::from_raw(w, h, raw).expect("sized buffer");
            DynamicImage::ImageRgb8(buf).write_to(&mut out, ImageFormat::Png)?;
        }
        PngBitDepth::Sixteen => {
            let mut raw = Vec::with_capacity(n * 3);
            for i in 0..n {
                for c in 0..3 {
                    raw.push((img.channel(c)[i] * 65535.0).round() as u16);
                }
            }
            let buf: ImageBuffer<Rgb<u16>, Vec<u16>> =
                ImageBuffer::from_raw(w, h, raw).expect("sized buffer");
            DynamicImage::ImageRgb16(buf).write_to(&mut out, ImageFormat::Png)?;
        }
    }
    Ok(out.into_inner())
}

/// Quantizes to the requested bit depth and writes an RGB PNG. Values
/// round to the nearest level, so each recovered value differs from the
/// stored one by at most half a quantization step.
pub fn write_pseudo_png(
    img: &PseudoImage,
    path: &Path,
    depth: PngBitDepth,
) -> Result<(), EncodeError> {
    let bytes = to_png_bytes(img, depth)?;
    std::fs::write(path, bytes).map_err(|source| EncodeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a pseudo-image PNG written by [`write_pseudo_png`]. Cells that
/// are zero in all three channels are treated as missing; a true zero
/// triple is indistinguishable from a masked cell after quantization.
pub fn read_pseudo_png(path: &Path) -> Result<PseudoImage, EncodeError> {
    let bytes = std::fs::read(path).map_err(|source| EncodeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let decoded = image::load_from_memory(&bytes)?;
    let (w, h, channels) = match decoded {
        DynamicImage::ImageRgb8(buf) => {
            let (w, h) = (buf.width() as usize, buf.height() as usize);
            let raw = buf.into_raw();
            let mut channels = [vec![0.0; w * h], vec![0.0; w * h], vec![0.0; w * h]];
            for i in 0..w * h {
                for c in 0..3 {
                    channels[c][i] = f64::from(raw[i * 3 + c]) / 255.0;
                }
            }
            (w, h, channels)
        }
        DynamicImage::ImageRgb16(buf) => {
            let (w, h) = (buf.width() as usize, buf.height() as usize);
            let raw = buf.into_raw();
            let mut channels = [vec![0.0; w * h], vec![0.0; w * h], vec![0.0; w * h]];
            for i in 0..w * h {
                for c in 0..3 {
                    channels[c][i] = f64::from(raw[i * 3 + c]) / 65535.0;
                }
            }
            (w, h, channels)
        }
        other => {
            return Err(EncodeError::NotRgb {
                path: path.to_path_buf(),
                found: format!("{:?}", other.color()),
            })
        }
    };
    let missing: Vec<bool> = (0..w * h)
        .map(|i| channels.iter().all(|ch| ch[i] == 0.0))
        .collect();
    Ok(PseudoImage::from_parts(w, h, channels, missing))
}

pub fn write_meta_json(meta: &EncodeMeta, path: &Path) -> Result<(), EncodeError> {
    let text = serde_json::to_string_pretty(meta).expect("meta serializes");
    std::fs::write(path, text).map_err(|source| EncodeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_meta_json(path: &Path) -> Result<EncodeMeta, EncodeError> {
    let text = std::fs::read_to_string(path).map_err(|source| EncodeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| EncodeError::MetaParse {
        path: path.to_path_buf(),
        source,
    })
}
