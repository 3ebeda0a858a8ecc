//! Adapter for trained weights in ONNX interchange format.
//!
//! This build ships no inference runtime: constructing a model backend
//! returns a runtime-unavailable error that points at the replay backends,
//! which serve precomputed predictions byte-exactly. The io spec is parsed
//! and validated regardless, so run configs referencing models fail with a
//! clear message rather than an opaque one.

use std::path::Path;

use crate::backends::{Detector, Segmenter};
use crate::error::{Error, Result};

/// Names and conventions of a model's tensors.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelIoSpec {
    pub input_name: String,
    pub output_name: String,
    /// Square input edge length in pixels.
    pub input_size: u32,
    /// Intensities are divided by this before inference.
    pub normalize_divisor: f64,
}

impl Default for ModelIoSpec {
    fn default() -> Self {
        Self {
            input_name: "images".into(),
            output_name: "output0".into(),
            input_size: 256,
            normalize_divisor: 255.0,
        }
    }
}

impl ModelIoSpec {
    pub fn validate(&self) -> Result<()> {
        if self.input_size == 0 {
            return Err(Error::InvalidConfig("model input_size must be >= 1".into()));
        }
        if !self.normalize_divisor.is_finite() || self.normalize_divisor <= 0.0 {
            return Err(Error::InvalidConfig(
                "model normalize_divisor must be > 0".into(),
            ));
        }
        Ok(())
    }
}

fn unavailable(path: &Path, kind: &str) -> Error {
    Error::RuntimeUnavailable(format!(
        "no ONNX runtime in this build; cannot load {kind} model {}. \
         Export per-frame predictions once and use the replay backends instead: \
         --detector replay:records.csv / --segmenter replay:masks_dir",
        path.display()
    ))
}

pub fn model_detector(path: &Path, spec: &ModelIoSpec) -> Result<Box<dyn Detector>> {
    spec.validate()?;
    if !path.exists() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "model file not found"),
        ));
    }
    Err(unavailable(path, "detector"))
}

pub fn model_segmenter(path: &Path, spec: &ModelIoSpec) -> Result<Box<dyn Segmenter>> {
    spec.validate()?;
    if !path.exists() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "model file not found"),
        ));
    }
    Err(unavailable(path, "segmenter"))
}
