//! Detection-gated glottal segmentation toolkit.
//!
//! Subcommands cover the full workflow: synthetic data generation, label
//! preparation, letterbox preprocessing, the five inference pipelines,
//! evaluation, confidence-threshold and hold-duration sweeps, waveform
//! feature extraction, cohort statistics, and annotated montages.

mod commands;
mod dataset;
mod logging;
mod manifest;

use clap::Parser;
use glottisgate_core::Error as CoreError;

#[derive(Parser)]
#[command(
    name = "glottisgate",
    version,
    about = "Detection-gated glottal segmentation and kinematic analysis",
    propagate_version = true
)]
enum Cli {
    /// Generate a synthetic recording with analytic ground truth.
    Synth(commands::synth::Args),
    /// Derive normalized detector label files from ground-truth masks.
    PrepLabels(commands::prep_labels::Args),
    /// Letterbox frames (and masks) onto a square canvas.
    Letterbox(commands::letterbox::Args),
    /// Run an inference pipeline over one recording or a dataset.
    Run(commands::run::Args),
    /// Score a run against ground-truth masks.
    Eval(commands::eval::Args),
    /// Confidence-threshold sweep over stored detections.
    SweepTau(commands::sweep_tau::Args),
    /// Hold-duration sweep over a recording.
    SweepHold(commands::sweep_hold::Args),
    /// Extract waveform features from a run.
    Features(commands::features::Args),
    /// Compare feature cohorts: stratified Mann-Whitney report.
    Compare(commands::compare::Args),
    /// Render an annotated frame montage from a run.
    Montage(commands::montage::Args),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli {
        Cli::Synth(a) => commands::synth::run(a),
        Cli::PrepLabels(a) => commands::prep_labels::run(a),
        Cli::Letterbox(a) => commands::letterbox::run(a),
        Cli::Run(a) => commands::run::run(a),
        Cli::Eval(a) => commands::eval::run(a),
        Cli::SweepTau(a) => commands::sweep_tau::run(a),
        Cli::SweepHold(a) => commands::sweep_hold::run(a),
        Cli::Features(a) => commands::features::run(a),
        Cli::Compare(a) => commands::compare::run(a),
        Cli::Montage(a) => commands::montage::run(a),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code(&err));
    }
}

/// Exit codes: 2 missing input, 3 invalid config, 4 model runtime absent,
/// 1 anything else.
fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return match e {
                CoreError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => 2,
                CoreError::MissingPrediction(_) => 2,
                CoreError::InvalidConfig(_) => 3,
                CoreError::RuntimeUnavailable(_) => 4,
                _ => 1,
            };
        }
        if let Some(e) = cause.downcast_ref::<std::io::Error>()
            && e.kind() == std::io::ErrorKind::NotFound
        {
            return 2;
        }
    }
    1
}
