pub mod compare;
pub mod eval;
pub mod features;
pub mod letterbox;
pub mod montage;
pub mod prep_labels;
pub mod run;
pub mod sweep_hold;
pub mod sweep_tau;
pub mod synth;

use std::path::Path;

use anyhow::{Context, Result};

pub fn ensure_out_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

/// Parse a comma-separated float list (e.g. `0.02,0.25,0.35`).
pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number '{t}'"))
        })
        .collect()
}
