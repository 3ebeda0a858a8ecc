//! The five inference pipelines, composed from detector, gate, and
//! segmenter.
//!
//! * `SegmenterOnly`: full-frame segmentation, no gate.
//! * `LocalizerSegmenter`: full-frame segmentation restricted to the gated
//!   detection box; zeroed after sustained misses.
//! * `LocalizerCropSegmenter`: the gated box (+8 px pad) is cropped and
//!   resized to the segmenter canvas; the crop-space mask is pasted back.
//! * `Otsu`: inverted Otsu thresholding inside the gated box.
//! * `Motion`: background-subtraction tracking inside the gated box; the
//!   first frames initialize the background and are excluded from metrics.
//!
//! The confidence threshold `tau` is applied before the gate: a below-tau
//! detection counts as a miss. In frame mode (`temporal = false`) the gate
//! state is reset before every frame, so holding never engages.

use crate::backends::{Detection, Detector, MotionParams, MotionTracker, Segmenter, otsu_segment};
use crate::crop::{crop_resize, paste_back};
use crate::error::{Error, Result};
use crate::frame::{BinaryMask, Frame};
use crate::gate::{GateConfig, GateState, GateStatus};

pub const SEGMENTER_BINARIZE_THRESHOLD: f32 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineKind {
    SegmenterOnly,
    LocalizerSegmenter,
    LocalizerCropSegmenter,
    Motion,
    Otsu,
}

impl PipelineKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PipelineKind::SegmenterOnly => "segmenter-only",
            PipelineKind::LocalizerSegmenter => "localizer-segmenter",
            PipelineKind::LocalizerCropSegmenter => "localizer-crop-segmenter",
            PipelineKind::Motion => "motion",
            PipelineKind::Otsu => "otsu",
        }
    }

    pub fn uses_detector(&self) -> bool {
        !matches!(self, PipelineKind::SegmenterOnly)
    }

    pub fn uses_segmenter(&self) -> bool {
        matches!(
            self,
            PipelineKind::SegmenterOnly
                | PipelineKind::LocalizerSegmenter
                | PipelineKind::LocalizerCropSegmenter
        )
    }
}

impl std::fmt::Display for PipelineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PipelineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "segmenter-only" => Ok(PipelineKind::SegmenterOnly),
            "localizer-segmenter" => Ok(PipelineKind::LocalizerSegmenter),
            "localizer-crop-segmenter" => Ok(PipelineKind::LocalizerCropSegmenter),
            "motion" => Ok(PipelineKind::Motion),
            "otsu" => Ok(PipelineKind::Otsu),
            _ => Err(Error::InvalidConfig(format!("unknown pipeline '{s}'"))),
        }
    }
}

/// Gate status of a frame result; `Ungated` marks pipelines without a
/// detection stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameStatus {
    Detected,
    Held,
    Zeroed,
    Ungated,
}

impl From<GateStatus> for FrameStatus {
    fn from(s: GateStatus) -> Self {
        match s {
            GateStatus::Detected => FrameStatus::Detected,
            GateStatus::Held => FrameStatus::Held,
            GateStatus::Zeroed => FrameStatus::Zeroed,
        }
    }
}

impl std::fmt::Display for FrameStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FrameStatus::Detected => "detected",
            FrameStatus::Held => "held",
            FrameStatus::Zeroed => "zeroed",
            FrameStatus::Ungated => "ungated",
        })
    }
}

impl std::str::FromStr for FrameStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "detected" => Ok(FrameStatus::Detected),
            "held" => Ok(FrameStatus::Held),
            "zeroed" => Ok(FrameStatus::Zeroed),
            "ungated" => Ok(FrameStatus::Ungated),
            _ => Err(Error::InvalidInput(format!("unknown frame status '{s}'"))),
        }
    }
}

/// Output for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameResult {
    pub frame_id: u64,
    pub mask: BinaryMask,
    /// Raw top-1 detection before tau thresholding and before the gate.
    pub detection: Option<Detection>,
    /// Whether the detector fired at the configured tau.
    pub fired: bool,
    pub status: FrameStatus,
    /// Count of true pixels in `mask`.
    pub area_px2: u64,
    /// Excluded from metrics (motion-tracker initialization frames).
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunConfig {
    pub kind: PipelineKind,
    /// Detector confidence threshold applied before the gate.
    pub tau: f64,
    pub gate: GateConfig,
    pub fps: f64,
    /// Video mode; `false` resets gate state every frame.
    pub temporal: bool,
    pub crop_pad: u32,
    pub crop_target: u32,
    pub motion: MotionParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            kind: PipelineKind::LocalizerSegmenter,
            tau: 0.25,
            gate: GateConfig::default(),
            fps: 4000.0,
            temporal: true,
            crop_pad: crate::crop::DEFAULT_CROP_PAD,
            crop_target: crate::crop::DEFAULT_CROP_TARGET,
            motion: MotionParams::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::InvalidConfig(format!(
                "tau {} outside [0,1]",
                self.tau
            )));
        }
        if !self.fps.is_finite() || self.fps <= 0.0 {
            return Err(Error::InvalidConfig("fps must be > 0".into()));
        }
        if self.crop_target == 0 {
            return Err(Error::InvalidConfig("crop target must be >= 1".into()));
        }
        self.gate.validate()
    }
}

enum MotionPhase {
    Init(Vec<Frame>),
    Running(MotionTracker),
}

/// Streaming pipeline state for one video. Feed frames in order through
/// [`PipelineRunner::process_frame`]; call [`PipelineRunner::reset`] between
/// videos.
pub struct PipelineRunner<D, S> {
    cfg: RunConfig,
    detector: Option<D>,
    segmenter: Option<S>,
    gate: GateState,
    motion: Option<MotionPhase>,
    next_frame: u64,
    dims: Option<(u32, u32)>,
}

impl<D: Detector, S: Segmenter> PipelineRunner<D, S> {
    pub fn new(cfg: RunConfig, detector: Option<D>, segmenter: Option<S>) -> Result<Self> {
        cfg.validate()?;
        if cfg.kind.uses_detector() && detector.is_none() {
            return Err(Error::InvalidConfig(format!(
                "pipeline {} requires a detector",
                cfg.kind
            )));
        }
        if cfg.kind.uses_segmenter() && segmenter.is_none() {
            return Err(Error::InvalidConfig(format!(
                "pipeline {} requires a segmenter",
                cfg.kind
            )));
        }
        let motion =
            matches!(cfg.kind, PipelineKind::Motion).then(|| MotionPhase::Init(Vec::new()));
        Ok(Self {
            cfg,
            detector,
            segmenter,
            gate: GateState::cold(),
            motion,
            next_frame: 0,
            dims: None,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    /// Frames already consumed.
    pub fn frames_processed(&self) -> u64 {
        self.next_frame
    }

    /// Clear all per-video state (gate memory, motion background, frame
    /// counter).
    pub fn reset(&mut self) {
        self.gate.reset();
        self.next_frame = 0;
        self.dims = None;
        if matches!(self.cfg.kind, PipelineKind::Motion) {
            self.motion = Some(MotionPhase::Init(Vec::new()));
        }
    }

    pub fn process_frame(&mut self, frame: &Frame) -> Result<FrameResult> {
        match self.dims {
            None => self.dims = Some(frame.dims()),
            Some(d) if d != frame.dims() => {
                return Err(Error::InvalidInput(format!(
                    "frame {} is {}x{} but the video started at {}x{}",
                    self.next_frame,
                    frame.width(),
                    frame.height(),
                    d.0,
                    d.1
                )));
            }
            _ => {}
        }
        let frame_id = self.next_frame;
        self.next_frame += 1;
        if !self.cfg.temporal {
            // Frame mode: no temporal state survives between frames.
            self.gate.reset();
        }

        // Detection stage: keep the raw top-1, gate on tau.
        let detection = match (&mut self.detector, self.cfg.kind.uses_detector()) {
            (Some(det), true) => {
                let mut dets = det.detect(frame_id, frame)?;
                dets.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
                dets.into_iter().next()
            }
            _ => None,
        };
        let fired = detection
            .as_ref()
            .map(|d| d.confidence >= self.cfg.tau)
            .unwrap_or(false);
        let gate_det = fired.then(|| detection.as_ref().expect("fired implies detection").bbox);

        let (w, h) = frame.dims();
        let (status, mask, excluded) = match self.cfg.kind {
            PipelineKind::SegmenterOnly => {
                let prob = self
                    .segmenter
                    .as_mut()
                    .expect("validated")
                    .segment(frame_id, frame)?;
                self.check_prob_dims(&prob, w, h, frame_id)?;
                (
                    FrameStatus::Ungated,
                    prob.binarize(SEGMENTER_BINARIZE_THRESHOLD),
                    false,
                )
            }
            PipelineKind::LocalizerSegmenter => {
                let prob = self
                    .segmenter
                    .as_mut()
                    .expect("validated")
                    .segment(frame_id, frame)?;
                self.check_prob_dims(&prob, w, h, frame_id)?;
                let raw = prob.binarize(SEGMENTER_BINARIZE_THRESHOLD);
                let out =
                    crate::gate::gate_step(&mut self.gate, &self.cfg.gate, gate_det.as_ref(), &raw);
                (out.status.into(), out.gated_mask, false)
            }
            PipelineKind::LocalizerCropSegmenter => {
                let (status, active) = self.gate.step_box(&self.cfg.gate, gate_det.as_ref(), w, h);
                let mask = match active {
                    Some(bbox) => {
                        let (patch, rect) =
                            crop_resize(frame, &bbox, self.cfg.crop_pad, self.cfg.crop_target)?;
                        let prob = self
                            .segmenter
                            .as_mut()
                            .expect("validated")
                            .segment_crop(frame_id, &patch, &rect)?;
                        if prob.width() != patch.width() || prob.height() != patch.height() {
                            return Err(Error::InvalidInput(format!(
                                "segmenter output {}x{} does not match patch {}x{} on frame {frame_id}",
                                prob.width(),
                                prob.height(),
                                patch.width(),
                                patch.height()
                            )));
                        }
                        let patch_mask = prob.binarize(SEGMENTER_BINARIZE_THRESHOLD);
                        paste_back(&patch_mask, &rect, w, h)?
                    }
                    None => BinaryMask::falses(w, h)?,
                };
                (status.into(), mask, false)
            }
            PipelineKind::Otsu => {
                let (status, active) = self.gate.step_box(&self.cfg.gate, gate_det.as_ref(), w, h);
                let mask = match active {
                    Some(bbox) => otsu_segment(frame, &bbox),
                    None => BinaryMask::falses(w, h)?,
                };
                (status.into(), mask, false)
            }
            PipelineKind::Motion => {
                let (status, active) = self.gate.step_box(&self.cfg.gate, gate_det.as_ref(), w, h);
                let phase = self.motion.as_mut().expect("motion pipeline");
                match phase {
                    MotionPhase::Init(buf) => {
                        buf.push(frame.clone());
                        let done = buf.len() >= self.cfg.motion.init_frames;
                        if done {
                            let tracker = MotionTracker::init(self.cfg.motion, buf)?;
                            *phase = MotionPhase::Running(tracker);
                        }
                        // Initialization frames are excluded from metrics.
                        (status.into(), BinaryMask::falses(w, h)?, true)
                    }
                    MotionPhase::Running(tracker) => {
                        let mask = match active {
                            Some(bbox) => tracker.segment(frame, &bbox)?,
                            None => {
                                tracker.observe_background(frame)?;
                                BinaryMask::falses(w, h)?
                            }
                        };
                        (status.into(), mask, false)
                    }
                }
            }
        };

        let area_px2 = mask.count_true();
        Ok(FrameResult {
            frame_id,
            mask,
            detection,
            fired,
            status,
            area_px2,
            excluded,
        })
    }

    fn check_prob_dims(
        &self,
        prob: &crate::backends::ProbMap,
        w: u32,
        h: u32,
        frame_id: u64,
    ) -> Result<()> {
        if prob.width() != w || prob.height() != h {
            return Err(Error::InvalidInput(format!(
                "segmenter output {}x{} does not match frame {w}x{h} on frame {frame_id}",
                prob.width(),
                prob.height()
            )));
        }
        Ok(())
    }
}

/// Run a whole video through a fresh pipeline state.
pub fn process_video<D: Detector, S: Segmenter>(
    runner: &mut PipelineRunner<D, S>,
    frames: &[Frame],
) -> Result<Vec<FrameResult>> {
    if frames.is_empty() {
        return Err(Error::InvalidInput("empty video".into()));
    }
    runner.reset();
    frames.iter().map(|f| runner.process_frame(f)).collect()
}
