//! Synthetic high-speed-video generator with analytic ground truth.
//!
//! Frame `t` shows a uniform tissue background with a dark ellipse whose
//! semi-axes follow a rectified sine, `s(t) = max(0, sin(2*pi*f_vib*t/fps))`,
//! so the area waveform has realistic open/closed phases and a known
//! fundamental frequency. Occluded spans replace the ellipse with tissue and
//! empty ground truth. Everything is seeded and bit-reproducible, which
//! makes the generator the verification oracle for the gate, the pipelines,
//! and the waveform features.

use std::collections::BTreeSet;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backends::{Detection, Detector, ProbMap, Segmenter};
use crate::bbox::{BBox, mask_to_bbox};
use crate::error::{Error, Result};
use crate::frame::{BinaryMask, Frame};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthConfig {
    pub width: u32,
    pub height: u32,
    pub n_frames: usize,
    pub fps: f64,
    /// Vibration frequency in Hz; must stay below fps/2.
    pub f_vib: f64,
    /// Ellipse semi-axes at full opening, in pixels.
    pub a_max: f64,
    pub b_max: f64,
    pub center: (f64, f64),
    pub glottis_intensity: u8,
    pub tissue_intensity: u8,
    pub noise_sigma: f64,
    /// `(start_frame, length)` spans where the glottis disappears.
    pub occlusions: Vec<(usize, usize)>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            n_frames: 502,
            fps: 4000.0,
            f_vib: 200.0,
            a_max: 10.0,
            b_max: 26.0,
            center: (128.0, 128.0),
            glottis_intensity: 40,
            tissue_intensity: 200,
            noise_sigma: 0.0,
            occlusions: Vec::new(),
            seed: 7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.n_frames == 0 {
            return Err(Error::InvalidConfig("empty video dimensions".into()));
        }
        if !self.fps.is_finite() || self.fps <= 0.0 {
            return Err(Error::InvalidConfig("fps must be > 0".into()));
        }
        if !self.f_vib.is_finite() || self.f_vib >= self.fps / 2.0 {
            return Err(Error::InvalidConfig(format!(
                "f_vib {} must be below fps/2 = {}",
                self.f_vib,
                self.fps / 2.0
            )));
        }
        if self.a_max <= 0.0 || self.b_max <= 0.0 {
            return Err(Error::InvalidConfig("ellipse semi-axes must be > 0".into()));
        }
        let contrast = (self.tissue_intensity as f64 - self.glottis_intensity as f64).abs();
        if contrast < 2.0 * self.noise_sigma {
            return Err(Error::InvalidConfig(format!(
                "intensity contrast {contrast} below 2*noise_sigma = {}",
                2.0 * self.noise_sigma
            )));
        }
        for &(start, len) in &self.occlusions {
            if len == 0 || start >= self.n_frames {
                return Err(Error::InvalidConfig(format!(
                    "occlusion ({start},{len}) outside video of {} frames",
                    self.n_frames
                )));
            }
        }
        Ok(())
    }

    /// Opening factor at frame `t`.
    pub fn opening(&self, t: usize) -> f64 {
        (2.0 * std::f64::consts::PI * self.f_vib * t as f64 / self.fps)
            .sin()
            .max(0.0)
    }
}

/// Ground truth for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTruth {
    pub mask: BinaryMask,
    pub area_px2: u64,
    pub bbox: Option<BBox>,
    pub occluded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthTruth {
    pub frames: Vec<FrameTruth>,
    pub fps: f64,
}

impl SynthTruth {
    pub fn areas(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.area_px2 as f64).collect()
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<(Vec<Frame>, SynthTruth)> {
    cfg.validate()?;
    let occluded: BTreeSet<usize> = cfg
        .occlusions
        .iter()
        .flat_map(|&(start, len)| start..(start + len).min(cfg.n_frames))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut frames = Vec::with_capacity(cfg.n_frames);
    let mut truths = Vec::with_capacity(cfg.n_frames);
    for t in 0..cfg.n_frames {
        let is_occluded = occluded.contains(&t);
        let s = if is_occluded { 0.0 } else { cfg.opening(t) };
        let mask = ellipse_mask(cfg, s)?;
        let mut frame = Frame::filled(cfg.width, cfg.height, cfg.tissue_intensity)?;
        for (x, y) in mask.iter_true() {
            frame.set(x, y, cfg.glottis_intensity);
        }
        if cfg.noise_sigma > 0.0 {
            for p in frame.pixels_mut() {
                let n = gaussian(&mut rng) * cfg.noise_sigma;
                *p = (*p as f64 + n).round().clamp(0.0, 255.0) as u8;
            }
        }
        let area_px2 = mask.count_true();
        let bbox = mask_to_bbox(&mask);
        frames.push(frame);
        truths.push(FrameTruth {
            mask,
            area_px2,
            bbox,
            occluded: is_occluded,
        });
    }
    Ok((
        frames,
        SynthTruth {
            frames: truths,
            fps: cfg.fps,
        },
    ))
}

fn ellipse_mask(cfg: &SynthConfig, s: f64) -> Result<BinaryMask> {
    if s <= 0.0 {
        return BinaryMask::falses(cfg.width, cfg.height);
    }
    let a = cfg.a_max * s;
    let b = cfg.b_max * s;
    let (cx, cy) = cfg.center;
    BinaryMask::from_fn(cfg.width, cfg.height, |x, y| {
        let dx = (x as f64 + 0.5 - cx) / a;
        let dy = (y as f64 + 0.5 - cy) / b;
        dx * dx + dy * dy <= 1.0
    })
}

/// Box-Muller transform over the rng's uniform output.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

// ---------------------------------------------------------------------------
// Oracle backends
// ---------------------------------------------------------------------------

/// Per-frame confidence assignment for the oracle detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConfidenceModel {
    Constant(f64),
    /// Deterministic per-frame uniform draw in (0,1), keyed by seed and
    /// frame id; the recall curve over tau follows the uniform CDF.
    SeededUniform {
        seed: u64,
    },
}

impl ConfidenceModel {
    pub fn confidence(&self, frame_id: u64) -> f64 {
        match *self {
            ConfidenceModel::Constant(c) => c,
            ConfidenceModel::SeededUniform { seed } => {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(seed ^ frame_id.wrapping_mul(0x9e37_79b9_7f4a_7c15));
                // Strictly inside (0,1) so tau comparisons are unambiguous.
                rng.random::<f64>().clamp(1e-12, 1.0 - 1e-12)
            }
        }
    }
}

/// Detector that returns the ground-truth box except on missed or occluded
/// frames.
#[derive(Debug, Clone)]
pub struct OracleDetector {
    boxes: Vec<Option<BBox>>,
    misses: BTreeSet<u64>,
    confidence: ConfidenceModel,
}

impl OracleDetector {
    pub fn new(boxes: Vec<Option<BBox>>) -> Self {
        Self {
            boxes,
            misses: BTreeSet::new(),
            confidence: ConfidenceModel::Constant(1.0),
        }
    }

    pub fn from_truth(truth: &SynthTruth) -> Self {
        Self::new(truth.frames.iter().map(|f| f.bbox).collect())
    }

    pub fn with_misses(mut self, misses: impl IntoIterator<Item = u64>) -> Self {
        self.misses = misses.into_iter().collect();
        self
    }

    pub fn with_confidence(mut self, confidence: ConfidenceModel) -> Self {
        self.confidence = confidence;
        self
    }
}

impl Detector for OracleDetector {
    fn detect(&mut self, frame_id: u64, _frame: &Frame) -> Result<Vec<Detection>> {
        if self.misses.contains(&frame_id) {
            return Ok(Vec::new());
        }
        let Some(Some(bbox)) = self.boxes.get(frame_id as usize) else {
            return Ok(Vec::new());
        };
        Ok(vec![Detection::new(
            *bbox,
            self.confidence.confidence(frame_id),
        )?])
    }
}

/// How the oracle segmenter corrupts the ground truth it returns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Corruption {
    None,
    /// Grow the mask by `radius` pixels.
    Dilate(u32),
    /// Shrink the mask by `radius` pixels.
    Erode(u32),
    /// Inject a spurious always-on rectangle far from the glottis;
    /// exercises the gate's restriction.
    SpuriousBlob(BBox),
}

/// Segmenter that returns the (optionally corrupted) ground-truth mask.
#[derive(Debug, Clone)]
pub struct OracleSegmenter {
    masks: Vec<BinaryMask>,
    corruption: Corruption,
}

impl OracleSegmenter {
    pub fn from_truth(truth: &SynthTruth) -> Self {
        Self {
            masks: truth.frames.iter().map(|f| f.mask.clone()).collect(),
            corruption: Corruption::None,
        }
    }

    pub fn with_corruption(mut self, corruption: Corruption) -> Self {
        self.corruption = corruption;
        self
    }

    fn full_mask(&self, frame_id: u64) -> Result<BinaryMask> {
        let mask = self
            .masks
            .get(frame_id as usize)
            .ok_or(Error::MissingPrediction(frame_id))?;
        Ok(match self.corruption {
            Corruption::None => mask.clone(),
            Corruption::Dilate(r) => mask.dilate(r),
            Corruption::Erode(r) => mask.erode(r),
            Corruption::SpuriousBlob(rect) => {
                let mut m = mask.clone();
                for y in rect.y0..rect.y1.min(m.height()) {
                    for x in rect.x0..rect.x1.min(m.width()) {
                        m.set(x, y, true);
                    }
                }
                m
            }
        })
    }
}

impl Segmenter for OracleSegmenter {
    fn segment(&mut self, frame_id: u64, _frame: &Frame) -> Result<ProbMap> {
        Ok(ProbMap::from_mask(&self.full_mask(frame_id)?))
    }

    fn segment_crop(&mut self, frame_id: u64, patch: &Frame, crop_rect: &BBox) -> Result<ProbMap> {
        let full = self.full_mask(frame_id)?;
        crate::backends::crop_mask_to_patch(&full, crop_rect, patch.width(), patch.height())
    }
}
