//! Temporal consistency guard.
//!
//! A finite-state rule sits between the detector and the segmenter output:
//! while the detector fires, the segmenter mask is restricted to the detected
//! box; when it goes silent, the last box is held for a bounded window of
//! frames and then the output is zeroed. Output is non-zero on frame `t`
//! exactly when some detection occurred in the window of the last
//! `hold` frames ending at `t` (inclusive). Fresh detections are
//! drift-clamped: the box center may move at most `drift_clamp_px` per frame
//! from the previously held center, while the box size always comes from the
//! fresh detection.

use crate::bbox::{BBox, restrict_mask};
use crate::error::{Error, Result};
use crate::frame::BinaryMask;

/// Hold window length in frames; `Infinite` never zeroes after the first
/// detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Hold {
    Frames(u32),
    Infinite,
}

impl Hold {
    /// Whether output stays active `misses` frames after the last detection
    /// (`misses = 0` is the detection frame itself).
    #[inline]
    fn allows(self, misses: u64) -> bool {
        match self {
            Hold::Frames(w) => misses < w as u64,
            Hold::Infinite => true,
        }
    }
}

impl std::fmt::Display for Hold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Hold::Frames(n) => write!(f, "{n}"),
            Hold::Infinite => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Hold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinite" | "∞" => Ok(Hold::Infinite),
            n => n
                .parse::<u32>()
                .map(Hold::Frames)
                .map_err(|_| Error::InvalidConfig(format!("bad hold value '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GateConfig {
    /// Window length in frames. 4 frames is 1 ms at 4000 frames/s: one
    /// detection plus up to three held misses.
    pub hold: Hold,
    /// Maximum per-frame Euclidean box-center travel in pixels.
    pub drift_clamp_px: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self {
            hold: Hold::Frames(4),
            drift_clamp_px: 30.0,
        }
    }
}

impl GateConfig {
    pub fn validate(&self) -> Result<()> {
        if let Hold::Frames(0) = self.hold {
            return Err(Error::InvalidConfig("hold window must be >= 1".into()));
        }
        if !self.drift_clamp_px.is_finite() || self.drift_clamp_px < 0.0 {
            return Err(Error::InvalidConfig("drift clamp must be >= 0".into()));
        }
        Ok(())
    }
}

/// Per-video gate memory. `held_box` is absent iff no detection has ever
/// occurred; `frames_since_detection` is a saturating miss counter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateState {
    held_box: Option<BBox>,
    frames_since_detection: u64,
}

impl Default for GateState {
    fn default() -> Self {
        Self::cold()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateStatus {
    Detected,
    Held,
    Zeroed,
}

/// Result of one gate step over a full mask.
#[derive(Debug, Clone)]
pub struct GateOutcome {
    pub gated_mask: BinaryMask,
    pub active_box: Option<BBox>,
    pub status: GateStatus,
}

impl GateState {
    pub fn cold() -> Self {
        Self {
            held_box: None,
            frames_since_detection: u64::MAX,
        }
    }

    pub fn reset(&mut self) {
        *self = Self::cold();
    }

    pub fn held_box(&self) -> Option<&BBox> {
        self.held_box.as_ref()
    }

    /// Advance the box-level state machine one frame. Returns the status and
    /// the box the output should be restricted to (absent when zeroed).
    pub fn step_box(
        &mut self,
        cfg: &GateConfig,
        detection: Option<&BBox>,
        frame_w: u32,
        frame_h: u32,
    ) -> (GateStatus, Option<BBox>) {
        match detection {
            Some(fresh) => {
                let boxed = match self.held_box {
                    Some(prev) => {
                        clamp_drift(prev.center(), fresh, cfg.drift_clamp_px, frame_w, frame_h)
                    }
                    // First-ever detection: no previous center, no clamp.
                    None => *fresh,
                };
                self.held_box = Some(boxed);
                self.frames_since_detection = 0;
                if cfg.hold.allows(0) {
                    (GateStatus::Detected, Some(boxed))
                } else {
                    // Degenerate zero-length window used by hold sweeps.
                    (GateStatus::Zeroed, None)
                }
            }
            None => {
                self.frames_since_detection = self.frames_since_detection.saturating_add(1);
                match self.held_box {
                    Some(held) if cfg.hold.allows(self.frames_since_detection) => {
                        (GateStatus::Held, Some(held))
                    }
                    _ => (GateStatus::Zeroed, None),
                }
            }
        }
    }
}

/// One gate step over a raw segmenter mask: restricts the mask to the active
/// box, or zeroes it entirely.
pub fn gate_step(
    state: &mut GateState,
    cfg: &GateConfig,
    detection: Option<&BBox>,
    raw_mask: &BinaryMask,
) -> GateOutcome {
    let (status, active) = state.step_box(cfg, detection, raw_mask.width(), raw_mask.height());
    let gated_mask = match &active {
        Some(b) => restrict_mask(raw_mask, b),
        None => {
            BinaryMask::falses(raw_mask.width(), raw_mask.height()).expect("mask is non-degenerate")
        }
    };
    GateOutcome {
        gated_mask,
        active_box: active,
        status,
    }
}

/// Pull a fresh detection toward the previously held center so the center
/// moves at most `max_px`; the box size is kept from the fresh detection and
/// the result stays inside the frame.
pub fn clamp_drift(
    prev_center: (f64, f64),
    new_box: &BBox,
    max_px: f64,
    frame_w: u32,
    frame_h: u32,
) -> BBox {
    let (ncx, ncy) = new_box.center();
    let (px, py) = prev_center;
    let d = (ncx - px).hypot(ncy - py);
    if d <= max_px {
        return new_box.translate_clamped(0, 0, frame_w, frame_h);
    }
    // Ideal center: on the segment from the previous center toward the new
    // one, at distance max_px. Box positions are integral, so search integer
    // translations near the ideal one for the closest center that respects
    // the travel bound.
    let scale = max_px / d;
    let ideal = (px + (ncx - px) * scale, py + (ncy - py) * scale);
    let dx = ideal.0 - ncx;
    let dy = ideal.1 - ncy;
    let mut best: Option<(f64, i64, i64)> = None;
    let mut fallback: Option<(f64, i64, i64)> = None;
    for tx in candidate_steps(dx) {
        for ty in candidate_steps(dy) {
            let cx = ncx + tx as f64;
            let cy = ncy + ty as f64;
            let to_prev = (cx - px).hypot(cy - py);
            let to_ideal = (cx - ideal.0).hypot(cy - ideal.1);
            if to_prev <= max_px + 1e-9 {
                if best.map(|(b, _, _)| to_ideal < b).unwrap_or(true) {
                    best = Some((to_ideal, tx, ty));
                }
            } else if fallback.map(|(b, _, _)| to_prev < b).unwrap_or(true) {
                fallback = Some((to_prev, tx, ty));
            }
        }
    }
    let (_, tx, ty) = best.or(fallback).expect("candidate set is non-empty");
    new_box.translate_clamped(tx, ty, frame_w, frame_h)
}

fn candidate_steps(v: f64) -> [i64; 4] {
    let f = v.floor() as i64;
    [f - 1, f, f + 1, f + 2]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(w: u32, h: u32) -> BinaryMask {
        BinaryMask::from_fn(w, h, |_, _| true).unwrap()
    }

    fn boxed(x0: u32, y0: u32, x1: u32, y1: u32) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    /// Window-sum oracle over a detection sequence: non-zero output at `t`
    /// iff any detection in the last `hold` frames including `t`.
    fn eq1_nonzero(dets: &[bool], hold: u64, t: usize) -> bool {
        let lo = (t as u64).saturating_sub(hold.saturating_sub(1)) as usize;
        dets[lo..=t].iter().any(|&b| b)
    }

    fn run_statuses(dets: &[bool], cfg: &GateConfig) -> Vec<GateStatus> {
        let mut st = GateState::cold();
        let m = mask(8, 8);
        let b = boxed(1, 1, 5, 5);
        dets.iter()
            .map(|&d| gate_step(&mut st, cfg, d.then_some(&b), &m).status)
            .collect()
    }

    #[test]
    fn always_firing_stays_detected() {
        let s = run_statuses(&[true, true, true], &GateConfig::default());
        assert!(s.iter().all(|&x| x == GateStatus::Detected));
    }

    #[test]
    fn hold_then_zero_then_recover() {
        let s = run_statuses(
            &[true, false, false, false, false, true],
            &GateConfig::default(),
        );
        assert_eq!(
            s,
            vec![
                GateStatus::Detected,
                GateStatus::Held,
                GateStatus::Held,
                GateStatus::Held,
                GateStatus::Zeroed,
                GateStatus::Detected
            ]
        );
    }

    #[test]
    fn cold_start_is_zeroed() {
        let s = run_statuses(&[false, false], &GateConfig::default());
        assert_eq!(s, vec![GateStatus::Zeroed, GateStatus::Zeroed]);
        let mut st = GateState::cold();
        let out = gate_step(&mut st, &GateConfig::default(), None, &mask(8, 8));
        assert_eq!(out.gated_mask.count_true(), 0);
        assert!(out.active_box.is_none());
    }

    #[test]
    fn matches_window_oracle_exhaustively_up_to_len_10() {
        let cfg = GateConfig::default();
        for len in 1..=10usize {
            for bits in 0u32..(1 << len) {
                let dets: Vec<bool> = (0..len).map(|i| bits >> i & 1 == 1).collect();
                let statuses = run_statuses(&dets, &cfg);
                for t in 0..len {
                    let nonzero = statuses[t] != GateStatus::Zeroed;
                    assert_eq!(nonzero, eq1_nonzero(&dets, 4, t), "bits={bits:b} t={t}");
                }
            }
        }
    }

    #[test]
    fn isolated_detection_gives_exactly_hold_window_active_frames() {
        for hold in 1..=6u32 {
            let cfg = GateConfig {
                hold: Hold::Frames(hold),
                ..GateConfig::default()
            };
            let mut dets = vec![false; 2];
            dets.push(true);
            dets.extend(std::iter::repeat_n(false, 12));
            let statuses = run_statuses(&dets, &cfg);
            let active = statuses
                .iter()
                .filter(|&&s| s != GateStatus::Zeroed)
                .count();
            assert_eq!(active as u32, hold);
            assert_eq!(statuses[2], GateStatus::Detected);
            for (i, s) in statuses.iter().enumerate().skip(3) {
                let expect = if i < 2 + hold as usize {
                    GateStatus::Held
                } else {
                    GateStatus::Zeroed
                };
                assert_eq!(*s, expect, "hold={hold} i={i}");
            }
        }
    }

    #[test]
    fn hold_one_is_per_frame_gating() {
        let cfg = GateConfig {
            hold: Hold::Frames(1),
            ..GateConfig::default()
        };
        let dets = [true, false, true, false, false];
        let statuses = run_statuses(&dets, &cfg);
        for (d, s) in dets.iter().zip(&statuses) {
            let expect = if *d {
                GateStatus::Detected
            } else {
                GateStatus::Zeroed
            };
            assert_eq!(*s, expect);
        }
    }

    #[test]
    fn infinite_hold_never_zeroes_after_first_detection() {
        let cfg = GateConfig {
            hold: Hold::Infinite,
            ..GateConfig::default()
        };
        let mut dets = vec![false, true];
        dets.extend(std::iter::repeat_n(false, 30));
        let statuses = run_statuses(&dets, &cfg);
        assert_eq!(statuses[0], GateStatus::Zeroed);
        assert!(statuses[2..].iter().all(|&s| s == GateStatus::Held));
    }

    #[test]
    fn gated_mask_is_subset_of_raw() {
        let raw = BinaryMask::from_fn(16, 16, |x, y| (x + y) % 2 == 0).unwrap();
        let mut st = GateState::cold();
        let cfg = GateConfig::default();
        let dets = [
            Some(boxed(2, 2, 9, 9)),
            None,
            Some(boxed(3, 1, 10, 8)),
            None,
            None,
        ];
        for d in dets {
            let out = gate_step(&mut st, &cfg, d.as_ref(), &raw);
            for (x, y) in out.gated_mask.iter_true() {
                assert!(raw.get(x, y));
            }
        }
    }

    #[test]
    fn reset_isolates_videos() {
        let cfg = GateConfig::default();
        let m = mask(8, 8);
        let b = boxed(0, 0, 4, 4);
        let mut st = GateState::cold();
        gate_step(&mut st, &cfg, Some(&b), &m);
        st.reset();
        // First video's box must not leak: next miss is Zeroed, not Held.
        let out = gate_step(&mut st, &cfg, None, &m);
        assert_eq!(out.status, GateStatus::Zeroed);
        // Fresh detection after reset applies no drift clamp.
        let far = boxed(100, 100, 120, 120);
        let m2 = mask(256, 256);
        let out = gate_step(&mut st, &cfg, Some(&far), &m2);
        assert_eq!(out.active_box, Some(far));
    }

    #[test]
    fn clamp_examples() {
        // Along the x axis: travel 50 capped to 30.
        let b = boxed(140, 90, 160, 110); // center (150, 100)
        let c = clamp_drift((100.0, 100.0), &b, 30.0, 256, 256);
        assert_eq!(c.center(), (130.0, 100.0));
        assert_eq!((c.width(), c.height()), (20, 20));

        // 3-4-5 direction: (30,40) scaled by 0.6 to (18,24).
        let b = boxed(120, 130, 140, 150); // center (130, 140)
        let c = clamp_drift((100.0, 100.0), &b, 30.0, 256, 256);
        assert_eq!(c.center(), (118.0, 124.0));

        // Within the clamp: unchanged.
        let b = boxed(110, 100, 130, 120); // center (120, 110), d ~ 22.4
        let c = clamp_drift((100.0, 100.0), &b, 30.0, 256, 256);
        assert_eq!(c, b);
    }

    #[test]
    fn consecutive_active_centers_respect_drift_bound() {
        let cfg = GateConfig::default();
        let mut st = GateState::cold();
        let m = mask(256, 256);
        let seq = [
            (10u32, 10u32, 40u32, 60u32),
            (200, 30, 230, 80),
            (16, 180, 60, 220),
            (120, 120, 150, 140),
            (121, 119, 152, 142),
        ];
        let mut prev_center: Option<(f64, f64)> = None;
        for (x0, y0, x1, y1) in seq {
            let out = gate_step(&mut st, &cfg, Some(&boxed(x0, y0, x1, y1)), &m);
            let c = out.active_box.unwrap().center();
            if let Some(p) = prev_center {
                let d = (c.0 - p.0).hypot(c.1 - p.1);
                assert!(d <= 30.0 + 1e-9, "moved {d}");
            }
            prev_center = Some(c);
        }
    }

    #[test]
    fn hold_parses_and_displays() {
        assert_eq!("4".parse::<Hold>().unwrap(), Hold::Frames(4));
        assert_eq!("inf".parse::<Hold>().unwrap(), Hold::Infinite);
        assert!("x".parse::<Hold>().is_err());
        assert_eq!(Hold::Frames(7).to_string(), "7");
        assert_eq!(Hold::Infinite.to_string(), "inf");
    }

    #[test]
    fn zero_hold_config_rejected_for_runs() {
        let cfg = GateConfig {
            hold: Hold::Frames(0),
            ..GateConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(GateConfig::default().validate().is_ok());
    }
}
