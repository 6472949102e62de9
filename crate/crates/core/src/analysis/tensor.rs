//! Dumped feature tensors: a small binary container plus sparsity.

use std::path::Path;

use super::AnalysisError;

const MAGIC: &[u8; 4] = b"FTEN";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TensorDType {
    #[default]
    F32,
    F64,
}

impl TensorDType {
    fn tag(self) -> u8 {
        match self {
            TensorDType::F32 => 0,
            TensorDType::F64 => 1,
        }
    }

    fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(TensorDType::F32),
            1 => Some(TensorDType::F64),
            _ => None,
        }
    }

    fn size(self) -> usize {
        match self {
            TensorDType::F32 => 4,
            TensorDType::F64 => 8,
        }
    }
}

/// A dense height x width x channels activation map, channel fastest.
/// Values are finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    height: usize,
    width: usize,
    channels: usize,
    values: Vec<f64>,
}

impl FeatureTensor {
    pub fn new(
        height: usize,
        width: usize,
        channels: usize,
        values: Vec<f64>,
    ) -> Result<Self, AnalysisError> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(AnalysisError::BadTensor(format!(
                "dimensions {height}x{width}x{channels} must be nonzero"
            )));
        }
        let expected = height
            .checked_mul(width)
            .and_then(|n| n.checked_mul(channels))
            .ok_or_else(|| AnalysisError::BadTensor("dimensions overflow".into()))?;
        if values.len() != expected {
            return Err(AnalysisError::BadTensor(format!(
                "expected {expected} values for {height}x{width}x{channels}, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(AnalysisError::BadTensor(format!("non-finite value {bad}")));
        }
        Ok(FeatureTensor {
            height,
            width,
            channels,
            values,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, v: usize, u: usize, c: usize) -> f64 {
        self.values[(v * self.width + u) * self.channels + c]
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

/// Parses the binary container: magic "FTEN", version, dims, dtype tag,
/// then little-endian values in height-width-channel order.
pub fn tensor_from_bytes(bytes: &[u8]) -> Result<FeatureTensor, AnalysisError> {
    let bad = |msg: String| AnalysisError::BadTensor(msg);
    if bytes.len() < 21 {
        return Err(bad(format!("header truncated at {} bytes", bytes.len())));
    }
    if &bytes[0..4] != MAGIC {
        return Err(bad("bad magic, expected FTEN".into()));
    }
    let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let height = u32_at(8) as usize;
    let width = u32_at(12) as usize;
    let channels = u32_at(16) as usize;
    let dtype = TensorDType::from_tag(bytes[20])
        .ok_or_else(|| bad(format!("unknown dtype tag {}", bytes[20])))?;
    let count = height
        .checked_mul(width)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| bad("dimensions overflow".into()))?;
    let payload = &bytes[21..];
    let expected = count * dtype.size();
    if payload.len() != expected {
        return Err(bad(format!(
            "payload holds {} bytes, expected {expected} for {height}x{width}x{channels}",
            payload.len()
        )));
    }
    let values: Vec<f64> = match dtype {
        TensorDType::F32 => payload
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
            .collect(),
        TensorDType::F64 => payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    };
    FeatureTensor::new(height, width, channels, values)
}

pub fn read_feature_tensor(path: &Path) -> Result<FeatureTensor, AnalysisError> {
    let bytes = std::fs::read(path).map_err(|source| AnalysisError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    tensor_from_bytes(&bytes)
}

pub fn tensor_to_bytes(tensor: &FeatureTensor, dtype: TensorDType) -> Vec<u8> {
    let mut out = Vec::with_capacity(21 + tensor.values.len() * dtype.size());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(tensor.height as u32).to_le_bytes());
    out.extend_from_slice(&(tensor.width as u32).to_le_bytes());
    out.extend_from_slice(&(tensor.channels as u32).to_le_bytes());
    out.push(dtype.tag());
    match dtype {
        TensorDType::F32 => {
            for &v in &tensor.values {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        TensorDType::F64 => {
            for &v in &tensor.values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

pub fn write_feature_tensor(
    tensor: &FeatureTensor,
    path: &Path,
    dtype: TensorDType,
) -> Result<(), AnalysisError> {
    std::fs::write(path, tensor_to_bytes(tensor, dtype)).map_err(|source| AnalysisError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Fraction of values with magnitude at most `eps`.
pub fn sparsity(tensor: &FeatureTensor, eps: f64) -> Result<f64, AnalysisError> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(AnalysisError::BadEpsilon(eps));
    }
    let near_zero = tensor.values.iter().filter(|v| v.abs() <= eps).count();
    Ok(near_zero as f64 / tensor.values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(h: usize, w: usize, c: usize) -> FeatureTensor {
        let values = (0..h * w * c).map(|i| i as f64 * 0.5 - 3.0).collect();
        FeatureTensor::new(h, w, c, values).unwrap()
    }

    #[test]
    fn round_trips_both_dtypes() {
        let t = ramp(3, 4, 2);
        let dir = tempfile::tempdir().unwrap();
        for dtype in [TensorDType::F32, TensorDType::F64] {
            let path = dir.path().join("t.bin");
            write_feature_tensor(&t, &path, dtype).unwrap();
            let back = read_feature_tensor(&path).unwrap();
            assert_eq!(back.height(), 3);
            assert_eq!(back.width(), 4);
            assert_eq!(back.channels(), 2);
            // The ramp values are exactly representable in f32 too.
            assert_eq!(back.values(), t.values());
        }
    }

    #[test]
    fn indexing_is_channel_fastest() {
        let t = ramp(2, 3, 4);
        assert_eq!(t.value_at(0, 0, 0), -3.0);
        assert_eq!(t.value_at(0, 0, 1), -2.5);
        assert_eq!(t.value_at(0, 1, 0), -1.0);
        assert_eq!(t.value_at(1, 0, 0), (3.0 * 4.0) * 0.5 - 3.0);
    }

    #[test]
    fn malformed_containers_are_rejected() {
        let t = ramp(2, 2, 1);
        let mut bytes = tensor_to_bytes(&t, TensorDType::F32);
        bytes[0] = b'X';
        assert!(tensor_from_bytes(&bytes).is_err());

        let mut bytes = tensor_to_bytes(&t, TensorDType::F32);
        bytes[4] = 9; // version
        assert!(tensor_from_bytes(&bytes).is_err());

        let mut bytes = tensor_to_bytes(&t, TensorDType::F32);
        bytes[20] = 7; // dtype tag
        assert!(tensor_from_bytes(&bytes).is_err());

        let mut bytes = tensor_to_bytes(&t, TensorDType::F32);
        bytes.pop();
        assert!(tensor_from_bytes(&bytes).is_err());

        assert!(tensor_from_bytes(&bytes[..10]).is_err());
    }

    #[test]
    fn non_finite_and_empty_tensors_are_rejected() {
        assert!(FeatureTensor::new(1, 1, 1, vec![f64::NAN]).is_err());
        assert!(FeatureTensor::new(0, 1, 1, vec![]).is_err());
        assert!(FeatureTensor::new(1, 1, 2, vec![0.0]).is_err());
    }

    #[test]
    fn sparsity_counts_near_zeros() {
        let t = FeatureTensor::new(1, 1, 5, vec![0.0, 1e-7, -1e-7, 0.5, -2.0]).unwrap();
        assert_eq!(sparsity(&t, 0.0).unwrap(), 0.2);
        assert_eq!(sparsity(&t, 1e-6).unwrap(), 0.6);
        assert_eq!(sparsity(&t, 10.0).unwrap(), 1.0);
        assert!(sparsity(&t, -1.0).is_err());
        assert!(sparsity(&t, f64::NAN).is_err());
    }
}
