//! Segmentation evaluation: DSC, IoU, clinical pass rate, detection recall,
//! and the two post-processing sweeps (confidence threshold and hold
//! duration) that re-gate stored predictions without re-running inference.
//!
//! Frames where both prediction and ground truth are empty score
//! DSC = IoU = 1.0: a gated pipeline is rewarded for correctly predicting
//! absence. That convention is surfaced in every output manifest because it
//! affects comparability with other toolchains.

use crate::backends::Detection;
use crate::confusion::{ConfusionCounts, confusion_counts};
use crate::error::{Error, Result};
use crate::frame::BinaryMask;
use crate::gate::{GateConfig, GateState, Hold, gate_step};
use crate::pipeline::{FrameResult, FrameStatus};

/// Dice similarity coefficient; 1.0 when prediction and truth are both
/// empty.
pub fn dsc(c: &ConfusionCounts) -> f64 {
    let denom = 2 * c.true_pos + c.false_pos + c.false_neg;
    if denom == 0 {
        1.0
    } else {
        2.0 * c.true_pos as f64 / denom as f64
    }
}

/// Intersection over union; 1.0 when both are empty.
pub fn iou(c: &ConfusionCounts) -> f64 {
    let denom = c.true_pos + c.false_pos + c.false_neg;
    if denom == 0 {
        1.0
    } else {
        c.true_pos as f64 / denom as f64
    }
}

/// One evaluation table row.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EvalRow {
    pub method: String,
    /// Fraction of non-excluded frames where the detector fired; 1.0 by
    /// convention for ungated pipelines.
    pub det_recall: f64,
    pub mean_dsc: f64,
    pub mean_iou: f64,
    /// Fraction of frames with DSC >= 0.5.
    pub pass_rate_dsc_ge_05: f64,
    pub n_frames: u64,
    pub n_excluded: u64,
}

/// Score per-frame results against ground-truth masks, skipping excluded
/// frames. Results and masks are aligned index-by-index.
pub fn evaluate(method: &str, results: &[FrameResult], gts: &[BinaryMask]) -> Result<EvalRow> {
    if results.len() != gts.len() {
        return Err(Error::InvalidInput(format!(
            "{} results vs {} ground-truth masks",
            results.len(),
            gts.len()
        )));
    }
    let mut n = 0u64;
    let mut n_excluded = 0u64;
    let mut sum_dsc = 0.0;
    let mut sum_iou = 0.0;
    let mut n_pass = 0u64;
    let mut n_fired = 0u64;
    let mut ungated = false;
    for (r, gt) in results.iter().zip(gts) {
        if r.excluded {
            n_excluded += 1;
            continue;
        }
        let c = confusion_counts(&r.mask, gt)?;
        let d = dsc(&c);
        sum_dsc += d;
        sum_iou += iou(&c);
        if d >= 0.5 {
            n_pass += 1;
        }
        if r.fired {
            n_fired += 1;
        }
        if r.status == FrameStatus::Ungated {
            ungated = true;
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::InvalidInput(
            "no non-excluded frames to evaluate".into(),
        ));
    }
    Ok(EvalRow {
        method: method.to_string(),
        det_recall: if ungated {
            1.0
        } else {
            n_fired as f64 / n as f64
        },
        mean_dsc: sum_dsc / n as f64,
        mean_iou: sum_iou / n as f64,
        pass_rate_dsc_ge_05: n_pass as f64 / n as f64,
        n_frames: n,
        n_excluded,
    })
}

/// Re-gate stored per-frame detections and raw masks at a given tau and gate
/// configuration. This is the shared path for both sweeps, and is bit-exact
/// with running the localizer+segmenter pipeline over the same inputs.
pub fn regate(
    detections: &[Option<Detection>],
    raw_masks: &[BinaryMask],
    excluded: &[bool],
    tau: f64,
    gate: &GateConfig,
    temporal: bool,
) -> Result<Vec<FrameResult>> {
    if detections.len() != raw_masks.len() || detections.len() != excluded.len() {
        return Err(Error::InvalidInput(
            "detections, masks and excluded flags must have equal length".into(),
        ));
    }
    let mut state = GateState::cold();
    let mut out = Vec::with_capacity(detections.len());
    for (i, ((det, raw), &exc)) in detections.iter().zip(raw_masks).zip(excluded).enumerate() {
        if !temporal {
            state.reset();
        }
        let fired = det.as_ref().map(|d| d.confidence >= tau).unwrap_or(false);
        let gate_box = fired.then(|| det.as_ref().expect("fired implies detection").bbox);
        let outcome = gate_step(&mut state, gate, gate_box.as_ref(), raw);
        let area_px2 = outcome.gated_mask.count_true();
        out.push(FrameResult {
            frame_id: i as u64,
            mask: outcome.gated_mask,
            detection: *det,
            fired,
            status: outcome.status.into(),
            area_px2,
            excluded: exc,
        });
    }
    Ok(out)
}

/// Result of a threshold sweep: one evaluation row per tau, plus warnings
/// (e.g. tau below the capture floor, where results saturate).
#[derive(Debug, Clone)]
pub struct TauSweep {
    pub rows: Vec<(f64, EvalRow)>,
    pub warnings: Vec<String>,
}

/// Single-pass confidence threshold sweep over stored detections: inference
/// ran once at the capture floor; thresholds are applied in post-processing.
#[allow(clippy::too_many_arguments)]
pub fn tau_sweep(
    detections: &[Option<Detection>],
    raw_masks: &[BinaryMask],
    gts: &[BinaryMask],
    excluded: &[bool],
    gate: &GateConfig,
    temporal: bool,
    capture_floor: f64,
    taus: &[f64],
) -> Result<TauSweep> {
    let mut warnings = Vec::new();
    let mut rows = Vec::with_capacity(taus.len());
    for &tau in taus {
        if tau < capture_floor {
            warnings.push(format!(
                "tau {tau} below capture floor {capture_floor}: results saturate at the floor"
            ));
        }
        let results = regate(detections, raw_masks, excluded, tau, gate, temporal)?;
        let row = evaluate(&format!("tau={tau}"), &results, gts)?;
        rows.push((tau, row));
    }
    Ok(TauSweep { rows, warnings })
}

/// Hold-duration sweep: re-gate the same stored predictions for each hold
/// window length (`Hold::Infinite` never zeroes after the first detection).
#[allow(clippy::too_many_arguments)]
pub fn hold_sweep(
    detections: &[Option<Detection>],
    raw_masks: &[BinaryMask],
    gts: &[BinaryMask],
    excluded: &[bool],
    tau: f64,
    drift_clamp_px: f64,
    temporal: bool,
    holds: &[Hold],
) -> Result<Vec<(Hold, EvalRow)>> {
    let mut rows = Vec::with_capacity(holds.len());
    for &hold in holds {
        let gate = GateConfig {
            hold,
            drift_clamp_px,
        };
        let results = regate(detections, raw_masks, excluded, tau, &gate, temporal)?;
        let row = evaluate(&format!("hold={hold}"), &results, gts)?;
        rows.push((hold, row));
    }
    Ok(rows)
}
