//! Detector and segmenter abstractions plus the classical baselines and
//! replay backends for precomputed predictions.

mod model;
mod motion;
mod otsu;
mod replay;

pub use model::{ModelIoSpec, model_detector, model_segmenter};
pub use motion::{MotionParams, MotionTracker};
pub use otsu::{otsu_level, otsu_segment};
pub use replay::{ReplayDetector, ReplaySegmenter};

use crate::bbox::BBox;
use crate::error::{Error, Result};
use crate::frame::{BinaryMask, Frame};

/// A detected glottis box with its confidence score.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Detection {
    pub bbox: BBox,
    pub confidence: f64,
}

impl Detection {
    pub fn new(bbox: BBox, confidence: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::InvalidInput(format!(
                "confidence {confidence} outside [0,1]"
            )));
        }
        Ok(Self { bbox, confidence })
    }
}

/// Per-pixel probability map in [0,1], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMap {
    width: u32,
    height: u32,
    data: Vec<f32>,
}

impl ProbMap {
    pub fn new(width: u32, height: u32, data: Vec<f32>) -> Result<Self> {
        if data.len() != width as usize * height as usize {
            return Err(Error::InvalidInput(format!(
                "probability buffer length {} does not match {width}x{height}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_mask(mask: &BinaryMask) -> Self {
        Self {
            width: mask.width(),
            height: mask.height(),
            data: mask
                .bits()
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Threshold into a binary mask; `p >= threshold` becomes true.
    pub fn binarize(&self, threshold: f32) -> BinaryMask {
        BinaryMask::new(
            self.width,
            self.height,
            self.data.iter().map(|&p| p >= threshold).collect(),
        )
        .expect("probability map is non-degenerate")
    }
}

/// Glottis localizer: detections for one frame, sorted by confidence
/// descending. An empty list means no detection.
pub trait Detector {
    fn detect(&mut self, frame_id: u64, frame: &Frame) -> Result<Vec<Detection>>;
}

/// Pixelwise glottis probability estimator. `segment_crop` serves the
/// crop-zoom pipeline: backends that store or derive full-frame masks can
/// override it to honor the crop rectangle.
pub trait Segmenter {
    fn segment(&mut self, frame_id: u64, frame: &Frame) -> Result<ProbMap>;

    fn segment_crop(&mut self, frame_id: u64, patch: &Frame, _crop_rect: &BBox) -> Result<ProbMap> {
        self.segment(frame_id, patch)
    }
}

/// Cut `crop_rect` out of a full-frame mask and resize it (nearest) to the
/// patch canvas, as a probability map. Shared by backends that store
/// full-frame masks but serve the crop pipeline.
pub(crate) fn crop_mask_to_patch(
    full: &BinaryMask,
    crop_rect: &BBox,
    patch_w: u32,
    patch_h: u32,
) -> Result<ProbMap> {
    let cropped = BinaryMask::from_fn(crop_rect.width(), crop_rect.height(), |x, y| {
        full.get(crop_rect.x0 + x, crop_rect.y0 + y)
    })?;
    let resized = crate::resize::resize_nearest_bool(
        cropped.bits(),
        crop_rect.width(),
        crop_rect.height(),
        patch_w,
        patch_h,
    );
    Ok(ProbMap::from_mask(&BinaryMask::new(
        patch_w, patch_h, resized,
    )?))
}

impl Detector for Box<dyn Detector> {
    fn detect(&mut self, frame_id: u64, frame: &Frame) -> Result<Vec<Detection>> {
        (**self).detect(frame_id, frame)
    }
}

impl Segmenter for Box<dyn Segmenter> {
    fn segment(&mut self, frame_id: u64, frame: &Frame) -> Result<ProbMap> {
        (**self).segment(frame_id, frame)
    }

    fn segment_crop(&mut self, frame_id: u64, patch: &Frame, crop_rect: &BBox) -> Result<ProbMap> {
        (**self).segment_crop(frame_id, patch, crop_rect)
    }
}
