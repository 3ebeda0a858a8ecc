//! Replay backends: byte-exact re-serving of precomputed detections and
//! masks, keyed by frame id. These make released predictions evaluable
//! without an inference runtime, and make threshold sweeps a single-pass
//! post-processing step.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::backends::{Detection, Detector, ProbMap, Segmenter, crop_mask_to_patch};
use crate::bbox::BBox;
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::io;

/// Detections loaded from a records CSV (`frame_id,x0,y0,x1,y1,confidence`).
/// Frames without rows yield no detection.
#[derive(Debug, Clone)]
pub struct ReplayDetector {
    by_frame: BTreeMap<u64, Vec<Detection>>,
}

impl ReplayDetector {
    pub fn from_csv(path: &Path) -> Result<Self> {
        Ok(Self {
            by_frame: io::read_detections(path)?,
        })
    }

    pub fn from_map(by_frame: BTreeMap<u64, Vec<Detection>>) -> Self {
        Self { by_frame }
    }
}

impl Detector for ReplayDetector {
    fn detect(&mut self, frame_id: u64, _frame: &Frame) -> Result<Vec<Detection>> {
        Ok(self.by_frame.get(&frame_id).cloned().unwrap_or_default())
    }
}

/// Masks replayed from a directory of `<frame_id>.png` files, served as
/// probability maps (intensity / 255).
#[derive(Debug, Clone)]
pub struct ReplaySegmenter {
    by_frame: BTreeMap<u64, PathBuf>,
}

impl ReplaySegmenter {
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let by_frame = io::list_image_dir(dir)?.into_iter().collect();
        Ok(Self { by_frame })
    }
}

impl Segmenter for ReplaySegmenter {
    fn segment(&mut self, frame_id: u64, _frame: &Frame) -> Result<ProbMap> {
        let path = self
            .by_frame
            .get(&frame_id)
            .ok_or(Error::MissingPrediction(frame_id))?;
        let frame = io::read_frame(path)?;
        let data = frame.pixels().iter().map(|&p| p as f32 / 255.0).collect();
        ProbMap::new(frame.width(), frame.height(), data)
    }

    /// Stored masks are full-frame predictions: the crop pipeline replays
    /// them by cutting out the crop rectangle.
    fn segment_crop(&mut self, frame_id: u64, patch: &Frame, crop_rect: &BBox) -> Result<ProbMap> {
        let path = self
            .by_frame
            .get(&frame_id)
            .ok_or(Error::MissingPrediction(frame_id))?;
        let full = io::read_mask(path)?;
        crop_mask_to_patch(&full, crop_rect, patch.width(), patch.height())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbox::BBox;
    use crate::frame::BinaryMask;

    fn tmpdir(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("gg-replay-{name}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn detector_replays_stored_rows_and_empty_frames() {
        let dir = tmpdir("det");
        let p = dir.join("records.csv");
        let d = Detection::new(BBox::new(10, 10, 20, 20).unwrap(), 0.9).unwrap();
        io::write_detections(&p, [(0u64, &d), (2u64, &d)]).unwrap();
        let mut det = ReplayDetector::from_csv(&p).unwrap();
        let f = Frame::filled(32, 32, 0).unwrap();
        assert_eq!(det.detect(0, &f).unwrap().len(), 1);
        assert!(det.detect(1, &f).unwrap().is_empty());
        assert_eq!(det.detect(2, &f).unwrap()[0], d);
    }

    #[test]
    fn segmenter_replays_masks_and_reports_missing() {
        let dir = tmpdir("seg");
        let m = BinaryMask::from_fn(16, 16, |x, y| x > 4 && y > 4).unwrap();
        io::write_mask(&dir.join("000001.png"), &m).unwrap();
        let mut seg = ReplaySegmenter::from_dir(&dir).unwrap();
        let f = Frame::filled(16, 16, 0).unwrap();
        assert_eq!(seg.segment(1, &f).unwrap().binarize(0.5), m);
        assert!(matches!(
            seg.segment(7, &f),
            Err(Error::MissingPrediction(7))
        ));
    }

    #[test]
    fn empty_records_mean_no_detections_anywhere() {
        let dir = tmpdir("empty");
        let rec = dir.join("records.csv");
        std::fs::write(&rec, format!("{}\n", io::DETECTIONS_HEADER)).unwrap();
        let mut det = ReplayDetector::from_csv(&rec).unwrap();
        let f = Frame::filled(8, 8, 0).unwrap();
        for id in 0..20 {
            assert!(det.detect(id, &f).unwrap().is_empty());
        }
    }

    #[test]
    fn two_passes_are_bit_exact() {
        let dir = tmpdir("twice");
        let m = BinaryMask::from_fn(8, 8, |x, _| x % 2 == 0).unwrap();
        io::write_mask(&dir.join("000000.png"), &m).unwrap();
        let d = Detection::new(BBox::new(1, 1, 5, 5).unwrap(), 0.125).unwrap();
        let rec = dir.join("r.csv");
        io::write_detections(&rec, [(0u64, &d)]).unwrap();

        let f = Frame::filled(8, 8, 0).unwrap();
        let mut det = ReplayDetector::from_csv(&rec).unwrap();
        let mut seg = ReplaySegmenter::from_dir(&dir).unwrap();
        let (d1, m1) = (det.detect(0, &f).unwrap(), seg.segment(0, &f).unwrap());
        let mut det2 = ReplayDetector::from_csv(&rec).unwrap();
        let mut seg2 = ReplaySegmenter::from_dir(&dir).unwrap();
        assert_eq!(d1, det2.detect(0, &f).unwrap());
        assert_eq!(m1, seg2.segment(0, &f).unwrap());
    }
}
