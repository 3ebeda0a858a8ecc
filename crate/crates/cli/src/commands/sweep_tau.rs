//! `sweep-tau`: single-pass confidence-threshold sweep. Detections are
//! captured once (records CSV at the capture floor) and thresholds are
//! applied in post-processing by re-gating stored masks.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;
use glottisgate_core::gate::{GateConfig, Hold};
use glottisgate_core::metrics::tau_sweep;
use glottisgate_core::plot::{Series, YAxis, line_plot_svg};
use glottisgate_core::{Detection, Error as CoreError, io as gio};

use crate::commands::{ensure_out_dir, parse_f64_list};
use crate::log_warn;
use crate::manifest::Manifest;

#[derive(Parser, Debug)]
pub struct Args {
    /// Detection records CSV captured at the floor threshold.
    #[arg(long)]
    pub records: PathBuf,
    /// Directory of stored raw segmenter masks (full-frame).
    #[arg(long)]
    pub masks: PathBuf,
    /// Directory of ground-truth masks.
    #[arg(long)]
    pub gt: PathBuf,
    /// Comma-separated thresholds, e.g. `0.02,0.25,0.35`.
    #[arg(long)]
    pub taus: String,
    /// Confidence floor the records were captured at.
    #[arg(long = "capture-floor", default_value = "0.001")]
    pub capture_floor: f64,
    #[arg(long = "hold-frames", default_value = "4")]
    pub hold_frames: Hold,
    #[arg(long = "drift-clamp-px", default_value = "30")]
    pub drift_clamp_px: f64,
    /// Disable temporal state (frame-level benchmark mode).
    #[arg(long = "frame-mode")]
    pub frame_mode: bool,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: Args) -> Result<()> {
    let taus = parse_f64_list(&args.taus)?;
    let records = gio::read_detections(&args.records)?;
    let mask_paths = gio::list_image_dir(&args.masks)?;
    let mut raw_masks = Vec::with_capacity(mask_paths.len());
    let mut detections: Vec<Option<Detection>> = Vec::with_capacity(mask_paths.len());
    let gt_paths: std::collections::BTreeMap<u64, PathBuf> =
        gio::list_image_dir(&args.gt)?.into_iter().collect();
    let mut gts = Vec::with_capacity(mask_paths.len());
    for (id, path) in &mask_paths {
        raw_masks.push(gio::read_mask(path)?);
        detections.push(records.get(id).and_then(|v| v.first()).copied());
        let gt = gt_paths
            .get(id)
            .ok_or(CoreError::MissingPrediction(*id))
            .context("ground-truth mask")?;
        gts.push(gio::read_mask(gt)?);
    }
    let excluded = vec![false; raw_masks.len()];
    let gate = GateConfig {
        hold: args.hold_frames,
        drift_clamp_px: args.drift_clamp_px,
    };
    let sweep = tau_sweep(
        &detections,
        &raw_masks,
        &gts,
        &excluded,
        &gate,
        !args.frame_mode,
        args.capture_floor,
        &taus,
    )?;
    for w in &sweep.warnings {
        log_warn!("{w}");
    }

    ensure_out_dir(&args.out)?;
    let csv = gio::eval_rows_csv(
        sweep
            .rows
            .iter()
            .map(|(tau, row)| (Some(tau.to_string()), row)),
        Some("tau"),
    );
    std::fs::write(args.out.join("sweep_tau.csv"), csv)?;
    let svg = line_plot_svg(
        "Confidence threshold sweep",
        "tau",
        "mean DSC",
        Some("Det.Recall"),
        &[
            Series {
                label: "DSC".into(),
                color: "#1f77b4",
                axis: YAxis::Left,
                points: sweep.rows.iter().map(|(t, r)| (*t, r.mean_dsc)).collect(),
            },
            Series {
                label: "Det.Recall".into(),
                color: "#d62728",
                axis: YAxis::Right,
                points: sweep.rows.iter().map(|(t, r)| (*t, r.det_recall)).collect(),
            },
        ],
        None,
    );
    std::fs::write(args.out.join("sweep_tau.svg"), svg)?;

    let mut manifest = Manifest::new(
        "sweep-tau",
        serde_json::json!({
            "records": args.records.display().to_string(),
            "masks": args.masks.display().to_string(),
            "gt": args.gt.display().to_string(),
            "taus": taus,
            "capture_floor": args.capture_floor,
            "gate": gate,
            "temporal": !args.frame_mode,
            "warnings": sweep.warnings,
        }),
    );
    manifest.add_input(&args.records)?;
    manifest.add_input(&args.masks)?;
    manifest.add_input(&args.gt)?;
    manifest.add_output("sweep_tau.csv");
    manifest.add_output("sweep_tau.svg");
    manifest.write(&args.out)?;
    println!(
        "sweep-tau: {} thresholds -> {}",
        sweep.rows.len(),
        args.out.display()
    );
    Ok(())
}
