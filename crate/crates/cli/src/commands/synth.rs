//! `synth`: write a synthetic recording (frames, ground-truth masks, truth
//! and detection-record CSVs, metadata) with bit-reproducible content.

use std::path::PathBuf;

use anyhow::{Context, Result, bail};
use clap::Parser;
use glottisgate_core::synth::{ConfidenceModel, SynthConfig};
use glottisgate_core::{Detection, Error as CoreError, io as gio};

use crate::commands::ensure_out_dir;
use crate::dataset::{MetaRow, write_meta};
use crate::manifest::Manifest;

#[derive(Parser, Debug)]
pub struct Args {
    #[arg(long, default_value = "256")]
    pub width: u32,
    #[arg(long, default_value = "256")]
    pub height: u32,
    /// Number of frames.
    #[arg(long = "frames", default_value = "502")]
    pub n_frames: usize,
    #[arg(long, default_value = "4000")]
    pub fps: f64,
    /// Vibration frequency in Hz.
    #[arg(long = "f-vib", default_value = "200")]
    pub f_vib: f64,
    /// Ellipse semi-axis (horizontal) at full opening, px.
    #[arg(long = "a-max", default_value = "10")]
    pub a_max: f64,
    /// Ellipse semi-axis (vertical) at full opening, px.
    #[arg(long = "b-max", default_value = "26")]
    pub b_max: f64,
    /// Ellipse center as `x,y`.
    #[arg(long, default_value = "128,128")]
    pub center: String,
    #[arg(long = "glottis-intensity", default_value = "40")]
    pub glottis_intensity: u8,
    #[arg(long = "tissue-intensity", default_value = "200")]
    pub tissue_intensity: u8,
    #[arg(long = "noise-sigma", default_value = "0")]
    pub noise_sigma: f64,
    /// Occlusion span `start:length`; repeatable.
    #[arg(long = "occlude")]
    pub occlusions: Vec<String>,
    #[arg(long, default_value = "7")]
    pub seed: u64,
    /// Detector-record confidences: `constant:C` or `seeded:SEED`.
    #[arg(long, default_value = "constant:1.0")]
    pub confidence: String,
    /// Patient id written to meta.csv.
    #[arg(long = "patient-id", default_value = "synthetic")]
    pub patient_id: String,
    /// Disorder status written to meta.csv.
    #[arg(long, default_value = "Healthy")]
    pub status: String,
    /// Sex written to meta.csv.
    #[arg(long, default_value = "F")]
    pub sex: String,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_center(s: &str) -> Result<(f64, f64)> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| CoreError::InvalidConfig(format!("bad center '{s}', expected x,y")))?;
    Ok((
        x.trim().parse().context("center x")?,
        y.trim().parse().context("center y")?,
    ))
}

fn parse_occlusion(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s.split_once(':').ok_or_else(|| {
        CoreError::InvalidConfig(format!("bad occlusion '{s}', expected start:length"))
    })?;
    Ok((
        a.trim().parse().context("occlusion start")?,
        b.trim().parse().context("occlusion length")?,
    ))
}

fn parse_confidence(s: &str) -> Result<ConfidenceModel> {
    match s.split_once(':') {
        Some(("constant", c)) => Ok(ConfidenceModel::Constant(
            c.trim().parse().context("confidence constant")?,
        )),
        Some(("seeded", seed)) => Ok(ConfidenceModel::SeededUniform {
            seed: seed.trim().parse().context("confidence seed")?,
        }),
        _ => bail!(CoreError::InvalidConfig(format!(
            "bad confidence model '{s}' (expected constant:C or seeded:SEED)"
        ))),
    }
}

pub fn run(args: Args) -> Result<()> {
    let cfg = SynthConfig {
        width: args.width,
        height: args.height,
        n_frames: args.n_frames,
        fps: args.fps,
        f_vib: args.f_vib,
        a_max: args.a_max,
        b_max: args.b_max,
        center: parse_center(&args.center)?,
        glottis_intensity: args.glottis_intensity,
        tissue_intensity: args.tissue_intensity,
        noise_sigma: args.noise_sigma,
        occlusions: args
            .occlusions
            .iter()
            .map(|s| parse_occlusion(s))
            .collect::<Result<_>>()?,
        seed: args.seed,
    };
    let confidence = parse_confidence(&args.confidence)?;
    let (frames, truth) = glottisgate_core::synth::generate(&cfg)?;

    ensure_out_dir(&args.out)?;
    let frames_dir = args.out.join("frames");
    let masks_dir = args.out.join("masks");
    ensure_out_dir(&frames_dir)?;
    ensure_out_dir(&masks_dir)?;

    let mut truth_rows = Vec::with_capacity(frames.len());
    let mut records: Vec<(u64, Detection)> = Vec::new();
    for (t, (frame, ft)) in frames.iter().zip(&truth.frames).enumerate() {
        let name = gio::frame_file_name(t as u64);
        gio::write_frame(&frames_dir.join(&name), frame)?;
        gio::write_mask(&masks_dir.join(&name), &ft.mask)?;
        truth_rows.push(gio::TruthRow {
            frame_id: t as u64,
            area: ft.area_px2,
            occluded: ft.occluded,
            bbox: ft.bbox,
        });
        if let Some(bbox) = ft.bbox {
            records.push((
                t as u64,
                Detection::new(bbox, confidence.confidence(t as u64))?,
            ));
        }
    }
    gio::write_truth(&args.out.join("truth.csv"), &truth_rows)?;
    gio::write_detections(
        &args.out.join("records.csv"),
        records.iter().map(|(id, d)| (*id, d)),
    )?;
    write_meta(
        &args.out.join("meta.csv"),
        &MetaRow {
            patient_id: args.patient_id.clone(),
            status: args.status.parse()?,
            sex: args.sex.parse()?,
            fps: Some(cfg.fps),
        },
    )?;

    let mut manifest = Manifest::new("synth", serde_json::json!({ "synth": cfg }));
    manifest.add_output("frames/");
    manifest.add_output("masks/");
    manifest.add_output("truth.csv");
    manifest.add_output("records.csv");
    manifest.add_output("meta.csv");
    manifest.write(&args.out)?;
    println!(
        "synth: {} frames at {}x{} -> {}",
        frames.len(),
        cfg.width,
        cfg.height,
        args.out.display()
    );
    Ok(())
}
