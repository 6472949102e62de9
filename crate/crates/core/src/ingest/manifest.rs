//! Dataset manifest: sensor profiles plus the frames to convert.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use super::{CameraIntrinsics, IngestError};

fn default_depth_scale() -> f64 {
    1000.0
}

/// Per-sensor decoding parameters shared by many frames.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorProfile {
    pub intrinsics: CameraIntrinsics,
    /// Raw integer units per meter (1000 for millimeter PNGs).
    #[serde(default = "default_depth_scale")]
    pub depth_scale: f64,
    /// Whether raw values are stored bit-rotated left by three.
    #[serde(default)]
    pub bitshift: bool,
}

/// One capture: a depth PNG plus the sensor that produced it, an
/// optional gravity-alignment rotation (rows of the matrix), and an
/// optional ground-truth file used by previews.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRecord {
    pub id: String,
    pub depth: PathBuf,
    pub sensor: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<[[f64; 3]; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub sensors: BTreeMap<String, SensorProfile>,
    pub frames: Vec<FrameRecord>,
}

impl Manifest {
    /// Checks sensor references, frame-id uniqueness, and per-sensor
    /// parameters.
    pub fn validate(&self) -> Result<(), IngestError> {
        for (name, sensor) in &self.sensors {
            sensor.intrinsics.validate()?;
            if !sensor.depth_scale.is_finite() || sensor.depth_scale <= 0.0 {
                return Err(IngestError::BadScale(sensor.depth_scale));
            }
            let _ = name;
        }
        let mut seen = HashSet::new();
        for frame in &self.frames {
            if !seen.insert(frame.id.as_str()) {
                return Err(IngestError::DuplicateFrame(frame.id.clone()));
            }
            if !self.sensors.contains_key(&frame.sensor) {
                return Err(IngestError::UnknownSensor {
                    frame: frame.id.clone(),
                    sensor: frame.sensor.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn sensor_for(&self, frame: &FrameRecord) -> &SensorProfile {
        &self.sensors[&frame.sensor]
    }
}

/// Reads and validates a JSON manifest.
pub fn load_manifest(path: &Path) -> Result<Manifest, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|source| IngestError::ManifestParse {
            path: path.to_path_buf(),
            source,
        })?;
    manifest.validate()?;
    Ok(manifest)
}

/// Writes a manifest as pretty JSON; used by dataset generators.
pub fn save_manifest(manifest: &Manifest, path: &Path) -> Result<(), IngestError> {
    manifest.validate()?;
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    std::fs::write(path, text).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Manifest {
        let mut sensors = BTreeMap::new();
        sensors.insert(
            "kv1".to_string(),
            SensorProfile {
                intrinsics: CameraIntrinsics::new(520.0, 520.0, 319.5, 239.5).unwrap(),
                depth_scale: 1000.0,
                bitshift: true,
            },
        );
        Manifest {
            sensors,
            frames: vec![FrameRecord {
                id: "f0".into(),
                depth: "depth/f0.png".into(),
                sensor: "kv1".into(),
                rotation: None,
                gt: None,
            }],
        }
    }

    #[test]
    fn round_trips_through_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        let manifest = sample();
        save_manifest(&manifest, &path).unwrap();
        let back = load_manifest(&path).unwrap();
        assert_eq!(back.frames.len(), 1);
        assert_eq!(back.frames[0].id, "f0");
        assert!(back.sensors["kv1"].bitshift);
    }

    #[test]
    fn rejects_unknown_sensor_reference() {
        let mut manifest = sample();
        manifest.frames[0].sensor = "nope".into();
        let err = manifest.validate().unwrap_err();
        assert!(matches!(err, IngestError::UnknownSensor { .. }));
    }

    #[test]
    fn rejects_duplicate_frame_ids() {
        let mut manifest = sample();
        let dup = manifest.frames[0].clone();
        manifest.frames.push(dup);
        let err = manifest.validate().unwrap_err();
        assert!(matches!(err, IngestError::DuplicateFrame(_)));
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = r#"{"sensors": {}, "frames": [], "extra": 1}"#;
        assert!(serde_json::from_str::<Manifest>(text).is_err());
    }
}
