//! `compare`: sex-stratified healthy-vs-pathological feature report over a
//! cohort of feature JSON files (stems are patient ids) plus a metadata CSV.

use std::path::PathBuf;

use anyhow::{Context, Result, bail};
use clap::Parser;
use glottisgate_core::Error as CoreError;
use glottisgate_core::gaw::FeatureVector;
use glottisgate_core::stats::{PatientRecord, group_report};

use crate::commands::ensure_out_dir;
use crate::dataset::read_meta_rows;
use crate::manifest::Manifest;

#[derive(Parser, Debug)]
pub struct Args {
    /// Feature JSON files (one per patient; file stem = patient id).
    #[arg(long, num_args = 1.., required = true)]
    pub features: Vec<PathBuf>,
    /// Cohort metadata CSV: patient_id,status,sex[,fps].
    #[arg(long)]
    pub meta: PathBuf,
    #[arg(long, default_value = "0.05")]
    pub alpha: f64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: Args) -> Result<()> {
    let meta = read_meta_rows(&args.meta)?;
    let mut records = Vec::with_capacity(args.features.len());
    for path in &args.features {
        let stem = path.file_stem().and_then(|s| s.to_str()).ok_or_else(|| {
            CoreError::InvalidInput(format!("bad feature path {}", path.display()))
        })?;
        let raw = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
        let features = FeatureVector::from_json_str(&raw)
            .with_context(|| format!("parsing {}", path.display()))?;
        let Some(row) = meta.iter().find(|m| m.patient_id == stem) else {
            bail!(CoreError::InvalidInput(format!(
                "{}: patient '{stem}' not found in {}",
                path.display(),
                args.meta.display()
            )));
        };
        records.push(PatientRecord {
            patient_id: stem.to_string(),
            status: row.status,
            sex: row.sex,
            features,
        });
    }
    let report = group_report(&records, args.alpha)?;

    ensure_out_dir(&args.out)?;
    std::fs::write(args.out.join("report.csv"), report.to_csv())?;
    std::fs::write(args.out.join("report.txt"), report.to_text())?;
    let mut manifest = Manifest::new(
        "compare",
        serde_json::json!({
            "meta": args.meta.display().to_string(),
            "alpha": args.alpha,
            "n_records": records.len(),
            "sex_table": report.sex_table,
            "sex_imbalance_p": report.sex_imbalance_p,
        }),
    );
    manifest.add_input(&args.meta)?;
    for f in &args.features {
        manifest.add_input(f)?;
    }
    manifest.add_output("report.csv");
    manifest.add_output("report.txt");
    manifest.write(&args.out)?;
    print!("{}", report.to_text());
    println!(
        "compare: {} records -> {}",
        records.len(),
        args.out.display()
    );
    Ok(())
}
