//! `features`: extract the seven kinematic features from a run's waveform,
//! writing `<name>.json` (keyed by the canonical feature names) and a
//! waveform SVG.

use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::{Result, bail};
use clap::Parser;
use glottisgate_core::gaw::{GawSeries, features};
use glottisgate_core::plot::waveform_svg;
use glottisgate_core::{Error as CoreError, io as gio};

use crate::commands::ensure_out_dir;
use crate::dataset::DEFAULT_FPS;
use crate::log_warn;
use crate::manifest::Manifest;

#[derive(Parser, Debug)]
pub struct Args {
    /// Run output directory (reads gaw.csv and the manifest).
    #[arg(long, conflicts_with = "gaw")]
    pub run: Option<PathBuf>,
    /// Bare waveform CSV (requires --fps).
    #[arg(long)]
    pub gaw: Option<PathBuf>,
    /// Frame rate override.
    #[arg(long)]
    pub fps: Option<f64>,
    /// Output stem; defaults to the run's patient id or directory name.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: Args) -> Result<()> {
    let (areas, fps, excluded, default_name, input) = match (&args.run, &args.gaw) {
        (Some(run_dir), None) => {
            let areas = gio::read_gaw(&run_dir.join("gaw.csv"))?;
            let manifest = Manifest::read(run_dir).ok();
            let fps = args
                .fps
                .or_else(|| {
                    manifest.as_ref().and_then(|m| {
                        m.config
                            .get("run")
                            .and_then(|r| r.get("fps"))
                            .and_then(|v| v.as_f64())
                    })
                })
                .unwrap_or_else(|| {
                    log_warn!("no fps in manifest; assuming {DEFAULT_FPS}");
                    DEFAULT_FPS
                });
            let excluded: BTreeSet<usize> = manifest
                .as_ref()
                .and_then(|m| {
                    m.config
                        .get("excluded_frame_ids")
                        .and_then(|v| serde_json::from_value::<Vec<usize>>(v.clone()).ok())
                })
                .unwrap_or_default()
                .into_iter()
                .collect();
            let name = manifest
                .as_ref()
                .and_then(|m| {
                    m.config
                        .get("patient_id")
                        .and_then(|v| v.as_str().map(String::from))
                })
                .unwrap_or_else(|| {
                    run_dir
                        .file_name()
                        .and_then(|n| n.to_str())
                        .unwrap_or("recording")
                        .to_string()
                });
            (areas, fps, excluded, name, run_dir.join("gaw.csv"))
        }
        (None, Some(gaw_path)) => {
            let Some(fps) = args.fps else {
                bail!(CoreError::InvalidConfig("--gaw requires --fps".into()));
            };
            let areas = gio::read_gaw(gaw_path)?;
            let name = gaw_path
                .file_stem()
                .and_then(|n| n.to_str())
                .unwrap_or("gaw")
                .to_string();
            (areas, fps, BTreeSet::new(), name, gaw_path.clone())
        }
        _ => bail!(CoreError::InvalidConfig(
            "exactly one of --run or --gaw is required".into()
        )),
    };
    let name = args.name.clone().unwrap_or(default_name);
    let series = GawSeries::new(areas, fps)?.with_excluded(excluded.iter().copied());
    let fv = features(&series)?;

    ensure_out_dir(&args.out)?;
    let json_path = args.out.join(format!("{name}.json"));
    std::fs::write(&json_path, fv.to_json_string())?;
    let svg = waveform_svg(&format!("GAW: {name}"), &series.areas, fps);
    std::fs::write(args.out.join(format!("{name}.svg")), svg)?;

    let mut manifest = Manifest::new(
        "features",
        serde_json::json!({
            "fps": fps,
            "n_frames": series.areas.len(),
            "n_excluded": excluded.len(),
            "f0_resolution_hz": fps / (series.areas.len() - excluded.len()).max(1) as f64,
            "name": name,
        }),
    );
    manifest.add_input(&input)?;
    manifest.add_output(format!("{name}.json"));
    manifest.add_output(format!("{name}.svg"));
    manifest.write(&args.out)?;
    println!(
        "features: {name}: f0 {:.1} Hz, OQ {:.3}, cv {:.3} -> {}",
        fv.f0,
        fv.open_quotient,
        fv.cv,
        args.out.display()
    );
    Ok(())
}
