//! Glottal area waveform extraction and the seven kinematic features:
//! area_mean, area_std, area_range, open_quotient, f0, periodicity, cv.
//!
//! Conventions, recorded in every output manifest:
//! * area_mean and area_std are taken over open frames (area > 0);
//!   area_range over all non-excluded frames.
//! * open_quotient is the fraction of analyzed frames with area above 10%
//!   of the open-frame mean.
//! * f0 is the argmax FFT bin converted to Hz (resolution fps/N); no
//!   interpolation.
//! * periodicity is the peak normalized autocorrelation over lags 1..=50.
//! * Degenerate inputs (all-zero or zero-variance series) yield 0 for
//!   open_quotient, f0, periodicity and cv, keeping cohort pipelines total.

use std::collections::BTreeSet;

use rustfft::FftPlanner;
use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::pipeline::FrameResult;

/// Per-frame area series with frame rate; `excluded` indexes (e.g. motion
/// initialization frames) stay in the series but are skipped by features.
#[derive(Debug, Clone, PartialEq)]
pub struct GawSeries {
    pub areas: Vec<f64>,
    pub fps: f64,
    pub excluded: BTreeSet<usize>,
}

impl GawSeries {
    pub fn new(areas: Vec<f64>, fps: f64) -> Result<Self> {
        if areas.is_empty() {
            return Err(Error::InvalidInput("empty area series".into()));
        }
        if !fps.is_finite() || fps <= 0.0 {
            return Err(Error::InvalidInput("fps must be > 0".into()));
        }
        Ok(Self {
            areas,
            fps,
            excluded: BTreeSet::new(),
        })
    }

    pub fn with_excluded(mut self, excluded: impl IntoIterator<Item = usize>) -> Self {
        self.excluded = excluded.into_iter().collect();
        self
    }

    /// Non-excluded samples in frame order.
    pub fn included(&self) -> Vec<f64> {
        self.areas
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.excluded.contains(i))
            .map(|(_, &a)| a)
            .collect()
    }
}

/// Build the waveform from pipeline results; zeroed frames contribute zero.
pub fn extract_waveform(results: &[FrameResult], fps: f64) -> Result<GawSeries> {
    let areas = results.iter().map(|r| r.area_px2 as f64).collect();
    let excluded = results
        .iter()
        .enumerate()
        .filter(|(_, r)| r.excluded)
        .map(|(i, _)| i);
    Ok(GawSeries::new(areas, fps)?.with_excluded(excluded))
}

/// The seven kinematic features. Serialization order matches the canonical
/// feature table.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FeatureVector {
    pub area_mean: f64,
    pub area_std: f64,
    pub area_range: f64,
    pub open_quotient: f64,
    pub f0: f64,
    pub periodicity: f64,
    pub cv: f64,
}

impl FeatureVector {
    pub const NAMES: [&'static str; 7] = [
        "area_mean",
        "area_std",
        "area_range",
        "open_quotient",
        "f0",
        "periodicity",
        "cv",
    ];

    pub fn values(&self) -> [f64; 7] {
        [
            self.area_mean,
            self.area_std,
            self.area_range,
            self.open_quotient,
            self.f0,
            self.periodicity,
            self.cv,
        ]
    }

    pub fn to_json_string(&self) -> String {
        let mut out = String::from("{\n");
        for (i, (name, v)) in Self::NAMES.iter().zip(self.values()).enumerate() {
            let sep = if i + 1 < Self::NAMES.len() { "," } else { "" };
            out.push_str(&format!("  \"{name}\": {v}{sep}\n"));
        }
        out.push('}');
        out.push('\n');
        out
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("features json: {e}")))
    }
}

/// Fraction of analyzed frames with area above 10% of the open-frame mean;
/// 0 for an all-zero series.
pub fn open_quotient(g: &GawSeries) -> f64 {
    let samples = g.included();
    let open: Vec<f64> = samples.iter().copied().filter(|&a| a > 0.0).collect();
    if open.is_empty() || samples.is_empty() {
        return 0.0;
    }
    let mean_open = open.iter().sum::<f64>() / open.len() as f64;
    let threshold = 0.1 * mean_open;
    samples.iter().filter(|&&a| a > threshold).count() as f64 / samples.len() as f64
}

/// Dominant frequency in Hz from the mean-removed magnitude spectrum, over
/// bins `1..=N/2`; 0 for a zero-variance series.
pub fn f0_fft(g: &GawSeries) -> Result<f64> {
    let samples = g.included();
    let n = samples.len();
    if n < 4 {
        return Err(Error::InvalidInput(format!(
            "f0 needs at least 4 samples, got {n}"
        )));
    }
    let min = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Ok(0.0);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = samples
        .iter()
        .map(|&a| Complex::new(a - mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let mut best_bin = 1usize;
    let mut best_mag = 0.0f64;
    for (k, c) in buf.iter().enumerate().take(half + 1).skip(1) {
        let mag = c.norm_sqr();
        if mag > best_mag {
            best_mag = mag;
            best_bin = k;
        }
    }
    Ok(best_bin as f64 * g.fps / n as f64)
}

/// Peak normalized autocorrelation over lags 1..=50 (or up to N-1 for short
/// series). Each lag correlates the two overlapping windows of the
/// mean-removed series, normalized so an exactly periodic series scores 1.
/// Zero-variance series score 0.
pub fn periodicity(g: &GawSeries) -> f64 {
    let samples = g.included();
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let min = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return 0.0;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = samples.iter().map(|&a| a - mean).collect();
    let max_lag = 50.min(n - 1);
    let mut best = f64::NEG_INFINITY;
    for k in 1..=max_lag {
        let mut num = 0.0;
        let mut den_a = 0.0;
        let mut den_b = 0.0;
        for t in 0..n - k {
            num += dev[t] * dev[t + k];
            den_a += dev[t] * dev[t];
            den_b += dev[t + k] * dev[t + k];
        }
        let den = (den_a * den_b).sqrt();
        if den > 0.0 {
            best = best.max(num / den);
        }
    }
    if best.is_finite() { best } else { 0.0 }
}

/// All seven features. `f0` falls back to 0 when fewer than 4 samples are
/// available.
pub fn features(g: &GawSeries) -> Result<FeatureVector> {
    let samples = g.included();
    let open: Vec<f64> = samples.iter().copied().filter(|&a| a > 0.0).collect();
    let (area_mean, area_std) = if open.is_empty() {
        (0.0, 0.0)
    } else {
        let mean = open.iter().sum::<f64>() / open.len() as f64;
        let var = open.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / open.len() as f64;
        (mean, var.sqrt())
    };
    let area_range = if samples.is_empty() {
        0.0
    } else {
        let min = samples.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        max - min
    };
    let f0 = if samples.len() >= 4 { f0_fft(g)? } else { 0.0 };
    Ok(FeatureVector {
        area_mean,
        area_std,
        area_range,
        open_quotient: open_quotient(g),
        f0,
        periodicity: periodicity(g),
        cv: if area_mean > 0.0 {
            area_std / area_mean
        } else {
            0.0
        },
    })
}
