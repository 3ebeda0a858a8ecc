//! Running-background-subtraction tracker.
//!
//! The background starts as the per-pixel mean of the first `init_frames`
//! frames and is then updated exponentially on non-glottal pixels
//! (`bg <- (1 - alpha) * bg + alpha * frame`). A pixel inside the active box
//! is glottal when `background - intensity >= delta`.

use crate::bbox::BBox;
use crate::error::{Error, Result};
use crate::frame::{BinaryMask, Frame};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MotionParams {
    pub init_frames: usize,
    pub alpha: f64,
    pub delta: f64,
}

impl Default for MotionParams {
    fn default() -> Self {
        Self {
            init_frames: 10,
            alpha: 0.05,
            delta: 25.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MotionTracker {
    params: MotionParams,
    width: u32,
    height: u32,
    accum: Vec<f64>,
    background: Vec<f64>,
    frames_seen: usize,
}

impl MotionTracker {
    pub fn new(params: MotionParams, width: u32, height: u32) -> Result<Self> {
        if params.init_frames == 0 {
            return Err(Error::InvalidConfig("init_frames must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&params.alpha) {
            return Err(Error::InvalidConfig("alpha must be in [0,1]".into()));
        }
        let n = width as usize * height as usize;
        Ok(Self {
            params,
            width,
            height,
            accum: vec![0.0; n],
            background: vec![0.0; n],
            frames_seen: 0,
        })
    }

    /// Build a tracker and initialize it from the first frames in one call.
    pub fn init(params: MotionParams, frames: &[Frame]) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::InvalidInput("no init frames".into()))?;
        let mut t = Self::new(params, first.width(), first.height())?;
        for f in frames {
            t.observe_init(f)?;
        }
        Ok(t)
    }

    pub fn params(&self) -> &MotionParams {
        &self.params
    }

    pub fn ready(&self) -> bool {
        self.frames_seen >= self.params.init_frames
    }

    /// Feed one initialization frame; once `init_frames` have been seen the
    /// background is the per-pixel mean.
    pub fn observe_init(&mut self, frame: &Frame) -> Result<()> {
        self.check_dims(frame)?;
        if self.ready() {
            return Err(Error::InvalidState("tracker already initialized".into()));
        }
        for (a, &p) in self.accum.iter_mut().zip(frame.pixels()) {
            *a += p as f64;
        }
        self.frames_seen += 1;
        if self.ready() {
            let k = self.params.init_frames as f64;
            for (b, &a) in self.background.iter_mut().zip(&self.accum) {
                *b = a / k;
            }
        }
        Ok(())
    }

    /// Segment the glottis inside `bbox` and update the background model on
    /// non-glottal pixels.
    pub fn segment(&mut self, frame: &Frame, bbox: &BBox) -> Result<BinaryMask> {
        self.check_dims(frame)?;
        if !self.ready() {
            return Err(Error::InvalidState(format!(
                "segment before init: {}/{} initialization frames seen",
                self.frames_seen, self.params.init_frames
            )));
        }
        let mut mask = BinaryMask::falses(self.width, self.height).expect("non-degenerate");
        let x1 = bbox.x1.min(self.width);
        let y1 = bbox.y1.min(self.height);
        for y in bbox.y0..y1 {
            for x in bbox.x0..x1 {
                let i = y as usize * self.width as usize + x as usize;
                if self.background[i] - frame.pixels()[i] as f64 >= self.params.delta {
                    mask.set(x, y, true);
                }
            }
        }
        let a = self.params.alpha;
        for (i, (b, &p)) in self.background.iter_mut().zip(frame.pixels()).enumerate() {
            let glottal = mask.bits()[i];
            if !glottal {
                *b = (1.0 - a) * *b + a * p as f64;
            }
        }
        Ok(mask)
    }

    /// Update the whole background from a frame with no active box.
    pub fn observe_background(&mut self, frame: &Frame) -> Result<()> {
        self.check_dims(frame)?;
        if !self.ready() {
            return Err(Error::InvalidState("observe before init".into()));
        }
        let a = self.params.alpha;
        for (b, &p) in self.background.iter_mut().zip(frame.pixels()) {
            *b = (1.0 - a) * *b + a * p as f64;
        }
        Ok(())
    }

    fn check_dims(&self, frame: &Frame) -> Result<()> {
        if frame.dims() != (self.width, self.height) {
            return Err(Error::InvalidInput(format!(
                "frame {}x{} does not match tracker {}x{}",
                frame.width(),
                frame.height(),
                self.width,
                self.height
            )));
        }
        Ok(())
    }
}
