//! `montage`: grid of evenly spaced annotated frames from a run (mask in
//! green, detection box in yellow, area label).

use std::path::PathBuf;

use anyhow::Result;
use clap::Parser;
use glottisgate_core::montage::annotate_montage;

use crate::commands::ensure_out_dir;
use crate::commands::eval::load_run_results;
use crate::dataset::discover_recordings;
use crate::manifest::Manifest;

#[derive(Parser, Debug)]
pub struct Args {
    /// Run output directory (frames.csv + masks/).
    #[arg(long)]
    pub run: PathBuf,
    /// Recording directory the run was produced from.
    #[arg(long)]
    pub frames: PathBuf,
    #[arg(long, default_value = "12")]
    pub panels: usize,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: Args) -> Result<()> {
    let recordings = discover_recordings(&args.frames)?;
    let rec = &recordings[0];
    let frames: Vec<_> = rec.load_frames()?.into_iter().map(|(_, f)| f).collect();
    let results = load_run_results(&args.run)?;
    let img = annotate_montage(&frames, &results, args.panels)?;

    ensure_out_dir(&args.out)?;
    img.write_png(&args.out.join("montage.png"))?;
    let mut manifest = Manifest::new(
        "montage",
        serde_json::json!({
            "run": args.run.display().to_string(),
            "frames": args.frames.display().to_string(),
            "panels": args.panels,
        }),
    );
    manifest.add_input(&args.run.join("frames.csv"))?;
    manifest.add_input(&rec.frames_dir)?;
    manifest.add_output("montage.png");
    manifest.write(&args.out)?;
    println!(
        "montage: {} panels ({}x{}) -> {}",
        args.panels,
        img.width(),
        img.height(),
        args.out.join("montage.png").display()
    );
    Ok(())
}
