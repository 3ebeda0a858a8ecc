//! `run`: execute one of the five inference pipelines over a recording or a
//! dataset of recordings, writing per-frame results, the area waveform,
//! prediction masks and a manifest per recording.

use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::sync::atomic::{AtomicUsize, Ordering};

use anyhow::{Context, Result, bail};
use clap::Parser;
use glottisgate_core::backends::MotionParams;
use glottisgate_core::gate::{GateConfig, Hold};
use glottisgate_core::pipeline::{FrameResult, PipelineKind, PipelineRunner, RunConfig};
use glottisgate_core::{Detector, Error as CoreError, Segmenter, io as gio, process_video};

use crate::commands::ensure_out_dir;
use crate::dataset::{
    DetectorSpec, Recording, SegmenterSpec, build_detector, build_segmenter, discover_recordings,
    load_io_spec,
};
use crate::log_info;
use crate::manifest::Manifest;

#[derive(Parser, Debug, Clone)]
pub struct Args {
    /// Pipeline: segmenter-only | localizer-segmenter |
    /// localizer-crop-segmenter | otsu | motion.
    #[arg(long, default_value = "localizer-segmenter")]
    pub pipeline: String,
    /// Recording directory (frames/ plus optional masks/, truth.csv,
    /// meta.csv) or a dataset directory of recordings.
    #[arg(long)]
    pub frames: PathBuf,
    /// Detector backend: replay:FILE | model:FILE | oracle.
    #[arg(long, default_value = "oracle")]
    pub detector: String,
    /// Segmenter backend: replay:DIR | model:FILE | otsu | motion | oracle.
    #[arg(long, default_value = "oracle")]
    pub segmenter: String,
    /// Detector confidence threshold applied before the gate.
    #[arg(long, default_value = "0.25")]
    pub tau: f64,
    /// Hold window in frames (4 = 1 ms at 4000 frames/s).
    #[arg(long = "hold-frames", default_value = "4")]
    pub hold_frames: Hold,
    #[arg(long = "drift-clamp-px", default_value = "30")]
    pub drift_clamp_px: f64,
    /// Frame rate override (otherwise meta.csv, otherwise 4000 with a
    /// warning).
    #[arg(long)]
    pub fps: Option<f64>,
    /// Disable temporal state: the gate resets on every frame.
    #[arg(long = "frame-mode")]
    pub frame_mode: bool,
    /// Motion-tracker initialization frame count.
    #[arg(long = "motion-init-frames", default_value = "10")]
    pub motion_init_frames: usize,
    /// JSON file naming model tensors (input_name, output_name, input_size,
    /// normalize_divisor) for model: backends.
    #[arg(long = "model-io-spec")]
    pub model_io_spec: Option<PathBuf>,
    /// Skip writing per-frame mask PNGs.
    #[arg(long = "no-save-masks")]
    pub no_save_masks: bool,
    /// Parallel worker count across recordings.
    #[arg(long, default_value = "1")]
    pub workers: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Resolve (pipeline flag, segmenter spec) into a pipeline kind. A classical
/// segmenter spec on a localizer pipeline selects the matching classical
/// pipeline.
pub fn resolve_kind(pipeline: PipelineKind, seg: &SegmenterSpec) -> Result<PipelineKind> {
    match (pipeline, seg) {
        (PipelineKind::LocalizerSegmenter, SegmenterSpec::Otsu) => Ok(PipelineKind::Otsu),
        (PipelineKind::LocalizerSegmenter, SegmenterSpec::Motion) => Ok(PipelineKind::Motion),
        (
            PipelineKind::SegmenterOnly | PipelineKind::LocalizerCropSegmenter,
            SegmenterSpec::Otsu | SegmenterSpec::Motion,
        ) => bail!(CoreError::InvalidConfig(format!(
            "pipeline {pipeline} cannot use a classical segmenter; use --pipeline otsu|motion"
        ))),
        (kind, _) => Ok(kind),
    }
}

pub fn run(args: Args) -> Result<()> {
    let pipeline: PipelineKind = args.pipeline.parse()?;
    let det_spec: DetectorSpec = args.detector.parse()?;
    let seg_spec: SegmenterSpec = args.segmenter.parse()?;
    let kind = resolve_kind(pipeline, &seg_spec)?;
    let recordings = discover_recordings(&args.frames)?;
    let multi = recordings.len() > 1;
    ensure_out_dir(&args.out)?;
    if args.workers == 0 {
        bail!(CoreError::InvalidConfig("--workers must be >= 1".into()));
    }

    let next = AtomicUsize::new(0);
    let failure: Mutex<Option<anyhow::Error>> = Mutex::new(None);
    std::thread::scope(|scope| {
        for _ in 0..args.workers.min(recordings.len()) {
            scope.spawn(|| {
                loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(rec) = recordings.get(i) else { break };
                    let out_dir = if multi {
                        args.out.join(&rec.name)
                    } else {
                        args.out.clone()
                    };
                    let res = run_recording(&args, kind, &det_spec, &seg_spec, rec, &out_dir)
                        .with_context(|| format!("recording {}", rec.name));
                    if let Err(e) = res {
                        let mut slot = failure.lock().expect("poisoned");
                        if slot.is_none() {
                            *slot = Some(e);
                        }
                        break;
                    }
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }

    if multi {
        // Top-level manifest listing the recordings.
        let mut manifest = Manifest::new(
            "run",
            serde_json::json!({
                "dataset": args.frames.display().to_string(),
                "recordings": recordings.iter().map(|r| r.name.clone()).collect::<Vec<_>>(),
            }),
        );
        for rec in &recordings {
            manifest.add_output(format!("{}/", rec.name));
        }
        manifest.write(&args.out)?;
    }
    println!(
        "run: {} ({} recording{}) -> {}",
        kind,
        recordings.len(),
        if multi { "s" } else { "" },
        args.out.display()
    );
    Ok(())
}

fn run_recording(
    args: &Args,
    kind: PipelineKind,
    det_spec: &DetectorSpec,
    seg_spec: &SegmenterSpec,
    rec: &Recording,
    out_dir: &Path,
) -> Result<()> {
    let fps = rec.resolve_fps(args.fps)?;
    let cfg = RunConfig {
        kind,
        tau: args.tau,
        gate: GateConfig {
            hold: args.hold_frames,
            drift_clamp_px: args.drift_clamp_px,
        },
        fps,
        temporal: !args.frame_mode,
        motion: MotionParams {
            init_frames: args.motion_init_frames,
            ..MotionParams::default()
        },
        ..RunConfig::default()
    };
    let io_spec = load_io_spec(args.model_io_spec.as_deref())?;
    let detector: Option<Box<dyn Detector>> = if kind.uses_detector() {
        Some(build_detector(rec, det_spec, &io_spec)?)
    } else {
        None
    };
    let segmenter: Option<Box<dyn Segmenter>> = if kind.uses_segmenter() {
        Some(build_segmenter(rec, seg_spec, &io_spec)?)
    } else {
        None
    };

    let frames: Vec<_> = rec.load_frames()?.into_iter().map(|(_, f)| f).collect();
    log_info!("{}: {} frames at {} fps", rec.name, frames.len(), fps);
    let mut runner = PipelineRunner::new(cfg.clone(), detector, segmenter)?;
    let results = process_video(&mut runner, &frames)?;

    write_run_outputs(
        out_dir,
        &cfg,
        rec,
        &results,
        !args.no_save_masks,
        &[
            ("pipeline", serde_json::json!(kind.as_str())),
            ("detector", serde_json::json!(args.detector)),
            ("segmenter", serde_json::json!(args.segmenter)),
        ],
    )
}

/// Write frames.csv, gaw.csv, optional masks/ and the manifest for one
/// processed recording.
pub fn write_run_outputs(
    out_dir: &Path,
    cfg: &RunConfig,
    rec: &Recording,
    results: &[FrameResult],
    save_masks: bool,
    extra_config: &[(&str, serde_json::Value)],
) -> Result<()> {
    ensure_out_dir(out_dir)?;
    gio::write_frame_results(&out_dir.join("frames.csv"), results)?;
    let areas: Vec<f64> = results.iter().map(|r| r.area_px2 as f64).collect();
    gio::write_gaw(&out_dir.join("gaw.csv"), &areas)?;
    if save_masks {
        let masks_dir = out_dir.join("masks");
        ensure_out_dir(&masks_dir)?;
        for r in results {
            gio::write_mask(&masks_dir.join(gio::frame_file_name(r.frame_id)), &r.mask)?;
        }
    }
    let excluded: Vec<u64> = results
        .iter()
        .filter(|r| r.excluded)
        .map(|r| r.frame_id)
        .collect();
    let mut config = serde_json::json!({
        "run": cfg,
        "recording": rec.name,
        "patient_id": rec
            .meta_csv
            .as_ref()
            .and_then(|m| crate::dataset::read_meta(m).ok())
            .map(|m| m.patient_id),
        "excluded_frame_ids": excluded,
        "n_frames": results.len(),
    });
    for (k, v) in extra_config {
        config[k] = v.clone();
    }
    let mut manifest = Manifest::new("run", config);
    manifest.add_input(&rec.frames_dir)?;
    manifest.add_output("frames.csv");
    manifest.add_output("gaw.csv");
    if save_masks {
        manifest.add_output("masks/");
    }
    manifest.write(out_dir)?;
    Ok(())
}
