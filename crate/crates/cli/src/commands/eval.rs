//! `eval`: score a run directory (frames.csv + masks/) against ground-truth
//! masks, emitting the evaluation row as CSV and JSON.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result, bail};
use clap::Parser;
use glottisgate_core::pipeline::FrameResult;
use glottisgate_core::{Error as CoreError, evaluate, io as gio};

use crate::commands::ensure_out_dir;
use crate::manifest::Manifest;

#[derive(Parser, Debug)]
pub struct Args {
    /// Run output directory (from `run`, with masks saved).
    #[arg(long)]
    pub pred: PathBuf,
    /// Directory of ground-truth masks keyed by frame id.
    #[arg(long)]
    pub gt: PathBuf,
    /// Method name for the report row.
    #[arg(long, default_value = "run")]
    pub method: String,
    #[arg(long)]
    pub out: PathBuf,
}

/// Rebuild per-frame results (with masks) from a run directory.
pub fn load_run_results(run_dir: &Path) -> Result<Vec<FrameResult>> {
    let rows = gio::read_frame_results(&run_dir.join("frames.csv"))?;
    let masks_dir = run_dir.join("masks");
    if !masks_dir.is_dir() {
        bail!(CoreError::missing_input(
            masks_dir,
            "run has no masks/ (re-run without --no-save-masks)",
        ));
    }
    let excluded: Vec<u64> = Manifest::read(run_dir)
        .ok()
        .and_then(|m| {
            m.config
                .get("excluded_frame_ids")
                .and_then(|v| serde_json::from_value(v.clone()).ok())
        })
        .unwrap_or_default();
    let mask_paths: std::collections::BTreeMap<u64, PathBuf> =
        gio::list_image_dir(&masks_dir)?.into_iter().collect();
    let mut results = Vec::with_capacity(rows.len());
    for row in rows {
        let path = mask_paths
            .get(&row.frame_id)
            .ok_or(CoreError::MissingPrediction(row.frame_id))
            .context("prediction mask")?;
        let mask = gio::read_mask(path)?;
        let fired = row.status == glottisgate_core::FrameStatus::Detected;
        results.push(FrameResult {
            frame_id: row.frame_id,
            area_px2: mask.count_true(),
            mask,
            detection: row.detection,
            fired,
            status: row.status,
            excluded: excluded.contains(&row.frame_id),
        });
    }
    Ok(results)
}

pub fn run(args: Args) -> Result<()> {
    let results = load_run_results(&args.pred)?;
    let ids: Vec<u64> = results.iter().map(|r| r.frame_id).collect();
    let gt_paths: std::collections::BTreeMap<u64, PathBuf> =
        gio::list_image_dir(&args.gt)?.into_iter().collect();
    let gts = ids
        .iter()
        .map(|id| {
            let p = gt_paths
                .get(id)
                .ok_or(CoreError::MissingPrediction(*id))
                .context("ground-truth mask")?;
            Ok(gio::read_mask(p)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let row = evaluate(&args.method, &results, &gts)?;
    // Post-hold activity, alongside det_recall's raw-firing convention:
    // the fraction of non-excluded frames with non-zeroed output.
    let scored: Vec<_> = results.iter().filter(|r| !r.excluded).collect();
    let active_rate = scored
        .iter()
        .filter(|r| r.status != glottisgate_core::FrameStatus::Zeroed)
        .count() as f64
        / scored.len().max(1) as f64;

    ensure_out_dir(&args.out)?;
    std::fs::write(
        args.out.join("eval.csv"),
        gio::eval_rows_csv([(None, &row)], None),
    )?;
    std::fs::write(
        args.out.join("eval.json"),
        serde_json::to_string_pretty(&row)? + "\n",
    )?;
    let mut manifest = Manifest::new(
        "eval",
        serde_json::json!({
            "pred": args.pred.display().to_string(),
            "gt": args.gt.display().to_string(),
            "method": args.method,
            "active_rate_post_hold": active_rate,
        }),
    );
    manifest.add_input(&args.pred.join("frames.csv"))?;
    manifest.add_input(&args.gt)?;
    manifest.add_output("eval.csv");
    manifest.add_output("eval.json");
    manifest.write(&args.out)?;
    println!(
        "eval: {} frames, det_recall {:.3} (active post-hold {:.3}), DSC {:.4}, IoU {:.4}, pass {:.1}%",
        row.n_frames,
        row.det_recall,
        active_rate,
        row.mean_dsc,
        row.mean_iou,
        row.pass_rate_dsc_ge_05 * 100.0
    );
    Ok(())
}
