//! `letterbox`: aspect-preserving resize of frames (and their masks) onto a
//! square canvas with symmetric zero padding; transforms recorded per file.

use std::path::PathBuf;

use anyhow::Result;
use clap::Parser;
use glottisgate_core::{io as gio, letterbox_frame, letterbox_mask};

use crate::commands::ensure_out_dir;
use crate::manifest::Manifest;

#[derive(Parser, Debug)]
pub struct Args {
    /// Directory of input frames.
    #[arg(long)]
    pub frames: PathBuf,
    /// Optional directory of masks to transform identically.
    #[arg(long)]
    pub masks: Option<PathBuf>,
    /// Square canvas edge.
    #[arg(long, default_value = "256")]
    pub target: u32,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: Args) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let frames_out = args.out.join("frames");
    ensure_out_dir(&frames_out)?;
    let mut transforms = String::from("file,scale,pad_left,pad_top,source_width,source_height\n");
    for (id, path) in gio::list_image_dir(&args.frames)? {
        let frame = gio::read_frame(&path)?;
        let (boxed, t) = letterbox_frame(&frame, args.target)?;
        let name = gio::frame_file_name(id);
        gio::write_frame(&frames_out.join(&name), &boxed)?;
        transforms.push_str(&format!(
            "{name},{},{},{},{},{}\n",
            t.scale, t.pad_left, t.pad_top, t.source_width, t.source_height
        ));
    }
    if let Some(masks) = &args.masks {
        let masks_out = args.out.join("masks");
        ensure_out_dir(&masks_out)?;
        for (id, path) in gio::list_image_dir(masks)? {
            let mask = gio::read_mask(&path)?;
            let (boxed, _) = letterbox_mask(&mask, args.target)?;
            gio::write_mask(&masks_out.join(gio::frame_file_name(id)), &boxed)?;
        }
    }
    std::fs::write(args.out.join("transforms.csv"), transforms)?;

    let mut manifest = Manifest::new(
        "letterbox",
        serde_json::json!({
            "frames": args.frames.display().to_string(),
            "masks": args.masks.as_ref().map(|p| p.display().to_string()),
            "target": args.target,
        }),
    );
    manifest.add_input(&args.frames)?;
    if let Some(m) = &args.masks {
        manifest.add_input(m)?;
    }
    manifest.add_output("frames/");
    if args.masks.is_some() {
        manifest.add_output("masks/");
    }
    manifest.add_output("transforms.csv");
    manifest.write(&args.out)?;
    println!("letterbox: -> {}", args.out.display());
    Ok(())
}
