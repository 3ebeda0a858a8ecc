//! Detection-gated glottal segmentation engine.
//!
//! High-speed videoendoscopy frames go through a localizer/segmenter pair; a
//! temporal consistency gate holds the last detected box for a short window
//! and zeroes the segmentation once the detector stays silent, so the
//! glottal area waveform (GAW) carries no spurious area on off-target
//! frames. On top of that sit classical baselines (Otsu-in-box, motion
//! subtraction), replay backends for precomputed predictions, segmentation
//! metrics with post-processing sweeps, seven kinematic waveform features,
//! nonparametric group statistics, and a synthetic video generator with
//! analytic ground truth that serves as the test oracle for the whole
//! pipeline.

pub mod backends;
pub mod bbox;
pub mod confusion;
pub mod crop;
pub mod error;
pub mod frame;
pub mod gate;
pub mod gaw;
pub mod io;
pub mod letterbox;
pub mod metrics;
pub mod montage;
pub mod pipeline;
pub mod plot;
mod resize;
pub mod stats;
pub mod synth;
#[cfg(feature = "oracles")]
pub mod test_oracles;

pub use backends::{Detection, Detector, ProbMap, Segmenter};
pub use bbox::{BBox, YoloLabel, bbox_to_label_record, mask_to_bbox, restrict_mask};
pub use confusion::{ConfusionCounts, confusion_counts};
pub use crop::{DEFAULT_CROP_PAD, DEFAULT_CROP_TARGET, crop_resize, paste_back};
pub use error::{Error, Result};
pub use frame::{BinaryMask, Frame};
pub use gate::{GateConfig, GateOutcome, GateState, GateStatus, Hold, clamp_drift, gate_step};
pub use gaw::{FeatureVector, GawSeries, extract_waveform};
pub use letterbox::{LetterboxTransform, letterbox_frame, letterbox_mask};
pub use metrics::{EvalRow, dsc, evaluate, iou};
pub use pipeline::{
    FrameResult, FrameStatus, PipelineKind, PipelineRunner, RunConfig, process_video,
};
pub use synth::{SynthConfig, SynthTruth};
