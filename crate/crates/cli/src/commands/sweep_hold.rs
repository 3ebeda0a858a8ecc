//! `sweep-hold`: hold-duration sweep over one recording. Detections and raw
//! segmenter masks are computed once; each hold value only re-runs the gate.

use std::path::PathBuf;

use anyhow::{Result, bail};
use clap::Parser;
use glottisgate_core::metrics::hold_sweep;
use glottisgate_core::pipeline::SEGMENTER_BINARIZE_THRESHOLD;
use glottisgate_core::plot::{Series, YAxis, line_plot_svg};
use glottisgate_core::{Detection, Error as CoreError, Hold, io as gio};

use crate::commands::ensure_out_dir;
use crate::dataset::{
    DetectorSpec, SegmenterSpec, build_detector, build_segmenter, discover_recordings,
};
use crate::manifest::Manifest;

#[derive(Parser, Debug)]
pub struct Args {
    /// Recording directory with frames/ and masks/ ground truth.
    #[arg(long)]
    pub frames: PathBuf,
    /// Detector backend: replay:FILE | model:FILE | oracle.
    #[arg(long, default_value = "oracle")]
    pub detector: String,
    /// Segmenter backend: replay:DIR | model:FILE | oracle.
    #[arg(long, default_value = "oracle")]
    pub segmenter: String,
    /// Hold values, e.g. `0..20,inf` or `1,4,8`.
    #[arg(long)]
    pub holds: String,
    #[arg(long, default_value = "0.25")]
    pub tau: f64,
    #[arg(long = "drift-clamp-px", default_value = "30")]
    pub drift_clamp_px: f64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parse `0..20,inf`-style hold lists: comma-separated integers, inclusive
/// `a..b` ranges, and `inf`.
pub fn parse_holds(s: &str) -> Result<Vec<Hold>> {
    let mut out = Vec::new();
    for token in s.split(',') {
        let token = token.trim();
        if let Some((a, b)) = token.split_once("..") {
            let a: u32 = a
                .parse()
                .map_err(|_| CoreError::InvalidConfig(format!("bad hold range '{token}'")))?;
            let b: u32 = b
                .parse()
                .map_err(|_| CoreError::InvalidConfig(format!("bad hold range '{token}'")))?;
            if a > b {
                bail!(CoreError::InvalidConfig(format!(
                    "empty hold range '{token}'"
                )));
            }
            out.extend((a..=b).map(Hold::Frames));
        } else {
            out.push(token.parse::<Hold>()?);
        }
    }
    if out.is_empty() {
        bail!(CoreError::InvalidConfig("no hold values".into()));
    }
    Ok(out)
}

pub fn run(args: Args) -> Result<()> {
    let holds = parse_holds(&args.holds)?;
    let det_spec: DetectorSpec = args.detector.parse()?;
    let seg_spec: SegmenterSpec = args.segmenter.parse()?;
    if matches!(seg_spec, SegmenterSpec::Otsu | SegmenterSpec::Motion) {
        bail!(CoreError::InvalidConfig(
            "hold sweep reuses stored masks; otsu/motion masks depend on the box and cannot be reused"
                .into()
        ));
    }
    let recordings = discover_recordings(&args.frames)?;
    if recordings.len() != 1 {
        bail!(CoreError::InvalidConfig(
            "hold sweep expects a single recording".into()
        ));
    }
    let rec = &recordings[0];
    let frames = rec.load_frames()?;
    let ids: Vec<u64> = frames.iter().map(|(id, _)| *id).collect();
    let gts = rec.load_gt_masks(&ids)?;

    // One pass of detection and full-frame segmentation.
    let io_spec = glottisgate_core::backends::ModelIoSpec::default();
    let mut detector = build_detector(rec, &det_spec, &io_spec)?;
    let mut segmenter = build_segmenter(rec, &seg_spec, &io_spec)?;
    let mut detections: Vec<Option<Detection>> = Vec::with_capacity(frames.len());
    let mut raw_masks = Vec::with_capacity(frames.len());
    for (id, frame) in &frames {
        let mut dets = detector.detect(*id, frame)?;
        dets.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
        detections.push(dets.into_iter().next());
        raw_masks.push(
            segmenter
                .segment(*id, frame)?
                .binarize(SEGMENTER_BINARIZE_THRESHOLD),
        );
    }
    let excluded = vec![false; frames.len()];
    let rows = hold_sweep(
        &detections,
        &raw_masks,
        &gts,
        &excluded,
        args.tau,
        args.drift_clamp_px,
        true,
        &holds,
    )?;

    ensure_out_dir(&args.out)?;
    let csv = gio::eval_rows_csv(
        rows.iter().map(|(h, row)| (Some(h.to_string()), row)),
        Some("hold"),
    );
    std::fs::write(args.out.join("sweep_hold.csv"), csv)?;

    // Plot: finite holds on their value, infinity one slot past the max.
    let max_finite = rows
        .iter()
        .filter_map(|(h, _)| match h {
            Hold::Frames(n) => Some(*n),
            Hold::Infinite => None,
        })
        .max()
        .unwrap_or(0);
    let x_of = |h: &Hold| match h {
        Hold::Frames(n) => *n as f64,
        Hold::Infinite => max_finite as f64 + 2.0,
    };
    let ticks: Vec<(f64, String)> = rows.iter().map(|(h, _)| (x_of(h), h.to_string())).collect();
    let svg = line_plot_svg(
        "Hold duration sweep",
        "hold (frames)",
        "mean DSC",
        Some("Det.Recall"),
        &[
            Series {
                label: "DSC".into(),
                color: "#1f77b4",
                axis: YAxis::Left,
                points: rows.iter().map(|(h, r)| (x_of(h), r.mean_dsc)).collect(),
            },
            Series {
                label: "Det.Recall".into(),
                color: "#d62728",
                axis: YAxis::Right,
                points: rows.iter().map(|(h, r)| (x_of(h), r.det_recall)).collect(),
            },
        ],
        Some(&ticks),
    );
    std::fs::write(args.out.join("sweep_hold.svg"), svg)?;

    let mut manifest = Manifest::new(
        "sweep-hold",
        serde_json::json!({
            "frames": args.frames.display().to_string(),
            "holds": holds.iter().map(|h| h.to_string()).collect::<Vec<_>>(),
            "tau": args.tau,
            "drift_clamp_px": args.drift_clamp_px,
        }),
    );
    manifest.add_input(&rec.frames_dir)?;
    manifest.add_output("sweep_hold.csv");
    manifest.add_output("sweep_hold.svg");
    manifest.write(&args.out)?;
    println!(
        "sweep-hold: {} hold values -> {}",
        rows.len(),
        args.out.display()
    );
    Ok(())
}
