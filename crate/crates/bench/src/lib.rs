//! Shared fixtures for the engine benchmarks.

use glottisgate_core::Frame;
use glottisgate_core::synth::{SynthConfig, SynthTruth, generate};

/// Default 256x256 synthetic clip used across benches.
pub fn clip(n_frames: usize) -> (Vec<Frame>, SynthTruth) {
    let cfg = SynthConfig {
        n_frames,
        noise_sigma: 6.0,
        ..SynthConfig::default()
    };
    generate(&cfg).expect("valid config")
}
