//! Run manifests: every output directory gets exactly one `manifest.json`
//! recording the command, the config snapshot, input hashes, output paths
//! and the numeric conventions in force. Reruns over identical inputs are
//! byte-identical except for the timestamp field.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Manifest {
    pub command: String,
    pub tool_version: String,
    pub timestamp_unix: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<InputHash>,
    pub outputs: Vec<String>,
    pub conventions: BTreeMap<String, String>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct InputHash {
    pub path: String,
    pub fnv1a64: String,
}

impl Manifest {
    pub fn new(command_name: &str, config: serde_json::Value) -> Self {
        Self {
            command: command_name.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            conventions: standard_conventions(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(InputHash {
            path: path.display().to_string(),
            fnv1a64: format!("{:016x}", hash_path(path)?),
        });
        Ok(())
    }

    pub fn add_output(&mut self, rel: impl Into<String>) {
        self.outputs.push(rel.into());
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let path = out_dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(out_dir: &Path) -> Result<Self> {
        let path = out_dir.join(MANIFEST_FILE);
        let raw = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&raw).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Conventions that affect numeric comparability, declared with every run.
fn standard_conventions() -> BTreeMap<String, String> {
    [
        (
            "empty_frame_dsc",
            "frames where prediction and ground truth are both empty score DSC = IoU = 1.0",
        ),
        ("area_std", "area_mean and area_std are over open frames (area > 0)"),
        (
            "det_recall",
            "fraction of non-excluded frames with a detection at confidence >= tau, before the hold; 1.0 for ungated pipelines",
        ),
        ("pass_rate", "fraction of frames with DSC >= 0.5 (inclusive)"),
        ("f0", "argmax FFT bin over bins 1..=N/2, converted to Hz; resolution fps/N, no interpolation"),
        (
            "open_quotient",
            "fraction of analyzed frames with area > 10% of the open-frame mean",
        ),
        (
            "mask_binarization",
            "probability maps binarized at 0.5; mask images binarized at intensity >= 128",
        ),
        (
            "periodicity",
            "peak windowed normalized autocorrelation over lags 1..=50",
        ),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Hash a file's bytes, or a directory as the hash of its sorted
/// `(name, file-hash)` pairs.
pub fn hash_path(path: &Path) -> Result<u64> {
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(path)
            .with_context(|| format!("listing {}", path.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        entries.sort();
        let mut acc = String::new();
        for p in entries {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            acc.push_str(&format!("{name}:{:016x};", hash_file(&p)?));
        }
        Ok(fnv1a64(acc.as_bytes()))
    } else {
        hash_file(path)
    }
}

fn hash_file(path: &Path) -> Result<u64> {
    let mut f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut buf = Vec::new();
    f.read_to_end(&mut buf)
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(fnv1a64(&buf))
}
