//! Recording discovery and backend wiring.
//!
//! A recording is a directory with a `frames/` subdirectory (plus optional
//! `masks/` ground truth, `truth.csv`, `meta.csv`), or a bare directory of
//! images. A dataset directory holds several recordings; commands iterate
//! them in name order.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result, bail};
use glottisgate_core::backends::{
    ModelIoSpec, ReplayDetector, ReplaySegmenter, model_detector, model_segmenter,
};
use glottisgate_core::stats::{Sex, Status};
use glottisgate_core::synth::OracleDetector;
use glottisgate_core::{BinaryMask, Detector, Error as CoreError, Frame, Segmenter, io as gio};

use crate::log_warn;

pub const DEFAULT_FPS: f64 = 4000.0;

#[derive(Debug, Clone)]
pub struct Recording {
    pub name: String,
    pub root: PathBuf,
    pub frames_dir: PathBuf,
    pub masks_dir: Option<PathBuf>,
    pub truth_csv: Option<PathBuf>,
    pub meta_csv: Option<PathBuf>,
}

impl Recording {
    fn from_root(root: &Path, frames_dir: PathBuf) -> Recording {
        let opt = |p: PathBuf| p.exists().then_some(p);
        Recording {
            name: root
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or("recording")
                .to_string(),
            root: root.to_path_buf(),
            frames_dir,
            masks_dir: opt(root.join("masks")),
            truth_csv: opt(root.join("truth.csv")),
            meta_csv: opt(root.join("meta.csv")),
        }
    }

    /// Frames in id order. Ids must be dense from 0 so stored predictions
    /// and results stay aligned.
    pub fn load_frames(&self) -> Result<Vec<(u64, Frame)>> {
        let mut out = Vec::new();
        for (i, (id, path)) in gio::list_image_dir(&self.frames_dir)?
            .into_iter()
            .enumerate()
        {
            if id != i as u64 {
                bail!(CoreError::InvalidInput(format!(
                    "{}: frame ids must be dense from 0 (found {id} at position {i})",
                    self.frames_dir.display()
                )));
            }
            out.push((id, gio::read_frame(&path)?));
        }
        Ok(out)
    }

    /// Ground-truth masks aligned to the given frame ids.
    pub fn load_gt_masks(&self, ids: &[u64]) -> Result<Vec<BinaryMask>> {
        let dir = self.masks_dir.as_ref().ok_or_else(|| {
            CoreError::missing_input(
                self.root.join("masks"),
                "recording has no masks/ ground truth",
            )
        })?;
        let by_id: std::collections::BTreeMap<u64, PathBuf> =
            gio::list_image_dir(dir)?.into_iter().collect();
        ids.iter()
            .map(|id| {
                let p = by_id
                    .get(id)
                    .ok_or(CoreError::MissingPrediction(*id))
                    .with_context(|| format!("ground-truth mask for frame {id}"))?;
                Ok(gio::read_mask(p)?)
            })
            .collect()
    }

    /// Frame rate: explicit flag wins, then meta.csv, then the default with
    /// a loud warning.
    pub fn resolve_fps(&self, flag: Option<f64>) -> Result<f64> {
        if let Some(fps) = flag {
            return Ok(fps);
        }
        if let Some(meta) = &self.meta_csv
            && let Some(fps) = read_meta(meta)?.fps
        {
            return Ok(fps);
        }
        log_warn!(
            "{}: no --fps and no meta.csv frame rate; assuming {} frames/s",
            self.name,
            DEFAULT_FPS
        );
        Ok(DEFAULT_FPS)
    }
}

/// Interpret `path` as a recording or a dataset of recordings.
pub fn discover_recordings(path: &Path) -> Result<Vec<Recording>> {
    if !path.exists() {
        bail!(CoreError::missing_input(path, "input path not found"));
    }
    if !path.is_dir() {
        bail!(CoreError::InvalidInput(format!(
            "{} is not a directory",
            path.display()
        )));
    }
    if path.join("frames").is_dir() {
        return Ok(vec![Recording::from_root(path, path.join("frames"))]);
    }
    if dir_has_images(path)? {
        return Ok(vec![Recording::from_root(path, path.to_path_buf())]);
    }
    // Dataset: subdirectories that are recordings, in name order.
    let mut subs: Vec<PathBuf> = std::fs::read_dir(path)
        .with_context(|| format!("listing {}", path.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subs.sort();
    let mut recordings = Vec::new();
    for sub in subs {
        if sub.join("frames").is_dir() {
            recordings.push(Recording::from_root(&sub, sub.join("frames")));
        } else if dir_has_images(&sub)? {
            recordings.push(Recording::from_root(&sub, sub.clone()));
        }
    }
    if recordings.is_empty() {
        bail!(CoreError::InvalidInput(format!(
            "{}: no frames/ directory, no images, and no recording subdirectories",
            path.display()
        )));
    }
    Ok(recordings)
}

fn dir_has_images(path: &Path) -> Result<bool> {
    for entry in std::fs::read_dir(path).with_context(|| format!("listing {}", path.display()))? {
        let p = entry?.path();
        if p.is_file()
            && p.extension()
                .map(|e| e.eq_ignore_ascii_case("png") || e.eq_ignore_ascii_case("pgm"))
                .unwrap_or(false)
        {
            return Ok(true);
        }
    }
    Ok(false)
}

// ---------------------------------------------------------------------------
// meta.csv
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct MetaRow {
    pub patient_id: String,
    pub status: Status,
    pub sex: Sex,
    pub fps: Option<f64>,
}

/// Single-recording metadata: `patient_id,status,sex[,fps]`, one row.
pub fn read_meta(path: &Path) -> Result<MetaRow> {
    let rows = read_meta_rows(path)?;
    rows.into_iter()
        .next()
        .ok_or_else(|| anyhow::anyhow!("{}: no metadata rows", path.display()))
}

/// Cohort metadata: `patient_id,status,sex[,fps]`, one row per patient.
pub fn read_meta_rows(path: &Path) -> Result<Vec<MetaRow>> {
    let raw =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = raw.lines();
    let header = lines
        .next()
        .ok_or_else(|| anyhow::anyhow!("{}: empty file", path.display()))?
        .trim_end();
    let with_fps = match header {
        "patient_id,status,sex" => false,
        "patient_id,status,sex,fps" => true,
        other => bail!(
            "{}: expected header 'patient_id,status,sex[,fps]', got '{other}'",
            path.display()
        ),
    };
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let expected = if with_fps { 4 } else { 3 };
        if f.len() != expected {
            bail!(
                "{}: line {}: expected {expected} fields",
                path.display(),
                i + 2
            );
        }
        let fps = if with_fps && !f[3].trim().is_empty() {
            Some(
                f[3].trim()
                    .parse::<f64>()
                    .with_context(|| format!("{}: line {}: bad fps", path.display(), i + 2))?,
            )
        } else {
            None
        };
        rows.push(MetaRow {
            patient_id: f[0].trim().to_string(),
            status: Status::from_str(f[1])?,
            sex: Sex::from_str(f[2])?,
            fps,
        });
    }
    Ok(rows)
}

pub fn write_meta(path: &Path, row: &MetaRow) -> Result<()> {
    let fps = row.fps.map(|f| f.to_string()).unwrap_or_default();
    std::fs::write(
        path,
        format!(
            "patient_id,status,sex,fps\n{},{},{},{}\n",
            row.patient_id, row.status, row.sex, fps
        ),
    )
    .with_context(|| format!("writing {}", path.display()))
}

// ---------------------------------------------------------------------------
// Backend specs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum DetectorSpec {
    Replay(PathBuf),
    Model(PathBuf),
    Oracle,
}

impl FromStr for DetectorSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "oracle" => Ok(DetectorSpec::Oracle),
            Some(("replay", p)) => Ok(DetectorSpec::Replay(PathBuf::from(p))),
            Some(("model", p)) => Ok(DetectorSpec::Model(PathBuf::from(p))),
            _ => bail!(CoreError::InvalidConfig(format!(
                "bad detector spec '{s}' (expected replay:FILE, model:FILE or oracle)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SegmenterSpec {
    Replay(PathBuf),
    Model(PathBuf),
    Otsu,
    Motion,
    Oracle,
}

impl FromStr for SegmenterSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "otsu" => Ok(SegmenterSpec::Otsu),
            None if s == "motion" => Ok(SegmenterSpec::Motion),
            None if s == "oracle" => Ok(SegmenterSpec::Oracle),
            Some(("replay", p)) => Ok(SegmenterSpec::Replay(PathBuf::from(p))),
            Some(("model", p)) => Ok(SegmenterSpec::Model(PathBuf::from(p))),
            _ => bail!(CoreError::InvalidConfig(format!(
                "bad segmenter spec '{s}' (expected replay:DIR, model:FILE, otsu, motion or oracle)"
            ))),
        }
    }
}

/// Resolve a possibly recording-relative path.
fn resolve(rec: &Recording, p: &Path) -> PathBuf {
    if p.is_absolute() || p.exists() {
        p.to_path_buf()
    } else {
        let local = rec.root.join(p);
        if local.exists() {
            local
        } else {
            p.to_path_buf()
        }
    }
}

/// Ground-truth boxes indexed by frame id, from the recording's truth.csv.
pub fn load_truth_boxes(rec: &Recording) -> Result<Vec<Option<glottisgate_core::BBox>>> {
    let truth_csv = rec.truth_csv.as_ref().ok_or_else(|| {
        CoreError::missing_input(
            rec.root.join("truth.csv"),
            "oracle backends need truth.csv in the recording directory",
        )
    })?;
    let rows = gio::read_truth(truth_csv)?;
    let max_id = rows.iter().map(|r| r.frame_id).max().unwrap_or(0);
    let mut boxes = vec![None; max_id as usize + 1];
    for r in &rows {
        boxes[r.frame_id as usize] = r.bbox;
    }
    Ok(boxes)
}

/// Load a model io spec from a JSON file, or the default when absent.
pub fn load_io_spec(path: Option<&Path>) -> Result<ModelIoSpec> {
    let Some(path) = path else {
        return Ok(ModelIoSpec::default());
    };
    let raw = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
    let spec: ModelIoSpec = serde_json::from_str(&raw)
        .map_err(|e| CoreError::InvalidConfig(format!("{}: {e}", path.display())))?;
    spec.validate()?;
    Ok(spec)
}

pub fn build_detector(
    rec: &Recording,
    spec: &DetectorSpec,
    io_spec: &ModelIoSpec,
) -> Result<Box<dyn Detector>> {
    Ok(match spec {
        DetectorSpec::Oracle => Box::new(OracleDetector::new(load_truth_boxes(rec)?)),
        DetectorSpec::Replay(p) => Box::new(ReplayDetector::from_csv(&resolve(rec, p))?),
        DetectorSpec::Model(p) => model_detector(&resolve(rec, p), io_spec)?,
    })
}

pub fn build_segmenter(
    rec: &Recording,
    spec: &SegmenterSpec,
    io_spec: &ModelIoSpec,
) -> Result<Box<dyn Segmenter>> {
    Ok(match spec {
        SegmenterSpec::Oracle => {
            // The oracle segmenter replays the recording's ground-truth
            // masks.
            let dir = rec.masks_dir.as_ref().ok_or_else(|| {
                CoreError::missing_input(
                    rec.root.join("masks"),
                    "oracle segmenter needs masks/ in the recording directory",
                )
            })?;
            Box::new(ReplaySegmenter::from_dir(dir)?)
        }
        SegmenterSpec::Replay(p) => Box::new(ReplaySegmenter::from_dir(&resolve(rec, p))?),
        SegmenterSpec::Model(p) => model_segmenter(&resolve(rec, p), io_spec)?,
        SegmenterSpec::Otsu | SegmenterSpec::Motion => bail!(CoreError::InvalidConfig(
            "otsu/motion are pipeline kinds, not probability-map segmenters".into()
        )),
    })
}
