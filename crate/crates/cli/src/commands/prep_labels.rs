//! `prep-labels`: derive one normalized detector label file per ground-truth
//! mask (tight enclosing box, class 0, center/size normalized to [0,1]).
//! Empty masks produce empty label files.

use std::path::PathBuf;

use anyhow::Result;
use clap::Parser;
use glottisgate_core::{bbox_to_label_record, io as gio, mask_to_bbox};

use crate::commands::ensure_out_dir;
use crate::manifest::Manifest;

#[derive(Parser, Debug)]
pub struct Args {
    /// Directory of ground-truth mask images.
    #[arg(long)]
    pub masks: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: Args) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let mut n_boxes = 0usize;
    let mut n_empty = 0usize;
    let entries = gio::list_image_dir(&args.masks)?;
    for (id, path) in &entries {
        let mask = gio::read_mask(path)?;
        let label_path = args.out.join(format!("{id:06}.txt"));
        match mask_to_bbox(&mask) {
            Some(bbox) => {
                let label = bbox_to_label_record(&bbox, mask.width(), mask.height())?;
                std::fs::write(&label_path, format!("{label}\n"))?;
                n_boxes += 1;
            }
            None => {
                std::fs::write(&label_path, "")?;
                n_empty += 1;
            }
        }
    }
    let mut manifest = Manifest::new(
        "prep-labels",
        serde_json::json!({ "masks": args.masks.display().to_string() }),
    );
    manifest.add_input(&args.masks)?;
    manifest.add_output("*.txt");
    manifest.write(&args.out)?;
    println!(
        "prep-labels: {} labels ({} boxes, {} empty) -> {}",
        entries.len(),
        n_boxes,
        n_empty,
        args.out.display()
    );
    Ok(())
}
