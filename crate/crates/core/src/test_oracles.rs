//! Independent brute-force oracles for verification (feature `oracles`).
//!
//! Everything here recomputes results from first definitions along a
//! different code path than the library: the naive O(N^2) discrete Fourier
//! transform instead of the FFT, per-threshold recomputation instead of
//! cumulative sums, direct window sums instead of the gate state machine.
//! Test suites compare library output against these.

use crate::gaw::{FeatureVector, GawSeries};

/// Window-sum rule over a detection sequence: output at `t` is non-zero iff
/// any detection occurred in the last `hold` frames ending at `t`.
/// `hold = None` is the infinite window.
pub fn gate_window_oracle(detections: &[bool], hold: Option<u64>, t: usize) -> bool {
    let lo = match hold {
        Some(h) => (t as u64).saturating_sub(h.saturating_sub(1)) as usize,
        None => 0,
    };
    if hold == Some(0) {
        return false;
    }
    detections[lo..=t].iter().any(|&b| b)
}

/// Exhaustive Otsu maximizer: recomputes both class statistics from scratch
/// for every threshold and compares the variance objective in exact
/// rational arithmetic. Ties break toward the lower level; a single
/// populated bin returns that bin.
pub fn otsu_bruteforce(histogram: &[u64; 256]) -> Option<u8> {
    let total: u64 = histogram.iter().sum();
    if total == 0 {
        return None;
    }
    let populated: Vec<usize> = (0..256).filter(|&i| histogram[i] > 0).collect();
    if populated.len() == 1 {
        return Some(populated[0] as u8);
    }
    let mut best: Option<(u8, i128, i128)> = None;
    for t in 0..256usize {
        // Class 0: intensities <= t; class 1: the rest. Recomputed fresh.
        let w0: u64 = histogram[..=t].iter().sum();
        let w1 = total - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let s0: u64 = histogram[..=t]
            .iter()
            .enumerate()
            .map(|(i, &c)| i as u64 * c)
            .sum();
        let s1: u64 = histogram[t + 1..]
            .iter()
            .enumerate()
            .map(|(i, &c)| (t + 1 + i) as u64 * c)
            .sum();
        // sigma_b^2 proportional to w0*w1*(mu0-mu1)^2 =
        // (s0*w1 - s1*w0)^2 / (w0*w1).
        let num = s0 as i128 * w1 as i128 - s1 as i128 * w0 as i128;
        let num_sq = num * num;
        let den = w0 as i128 * w1 as i128;
        let better = match &best {
            None => true,
            Some((_, bn, bd)) => num_sq * bd > bn * den,
        };
        if better {
            best = Some((t as u8, num_sq, den));
        }
    }
    best.map(|(t, _, _)| t)
}

/// Direct-definition re-implementation of the seven waveform features.
pub fn features_bruteforce(g: &GawSeries) -> FeatureVector {
    let samples: Vec<f64> = g
        .areas
        .iter()
        .enumerate()
        .filter(|(i, _)| !g.excluded.contains(i))
        .map(|(_, &a)| a)
        .collect();
    let n = samples.len();

    let open: Vec<f64> = samples.iter().copied().filter(|&a| a > 0.0).collect();
    let area_mean = if open.is_empty() {
        0.0
    } else {
        open.iter().sum::<f64>() / open.len() as f64
    };
    let area_std = if open.is_empty() {
        0.0
    } else {
        (open.iter().map(|a| (a - area_mean).powi(2)).sum::<f64>() / open.len() as f64).sqrt()
    };
    let area_range = if samples.is_empty() {
        0.0
    } else {
        let mut min = samples[0];
        let mut max = samples[0];
        for &a in &samples {
            if a < min {
                min = a;
            }
            if a > max {
                max = a;
            }
        }
        max - min
    };
    let open_quotient = if open.is_empty() {
        0.0
    } else {
        samples.iter().filter(|&&a| a > 0.1 * area_mean).count() as f64 / n as f64
    };

    let zero_variance = samples.iter().all(|&a| a == samples[0]);
    let f0 = if n >= 4 && !zero_variance {
        naive_dft_peak_hz(&samples, g.fps)
    } else {
        0.0
    };
    let periodicity = if n >= 2 && !zero_variance {
        direct_autocorr_peak(&samples)
    } else {
        0.0
    };
    FeatureVector {
        area_mean,
        area_std,
        area_range,
        open_quotient,
        f0,
        periodicity,
        cv: if area_mean > 0.0 {
            area_std / area_mean
        } else {
            0.0
        },
    }
}

/// O(N^2) DFT magnitude argmax over bins 1..=N/2, in Hz.
fn naive_dft_peak_hz(samples: &[f64], fps: f64) -> f64 {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut best_bin = 1usize;
    let mut best_mag = 0.0f64;
    for k in 1..=n / 2 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (t, &a) in samples.iter().enumerate() {
            let phase = -2.0 * std::f64::consts::PI * k as f64 * t as f64 / n as f64;
            re += (a - mean) * phase.cos();
            im += (a - mean) * phase.sin();
        }
        let mag = re * re + im * im;
        if mag > best_mag {
            best_mag = mag;
            best_bin = k;
        }
    }
    best_bin as f64 * fps / n as f64
}

/// Directly evaluated normalized autocorrelation peak over lags 1..=50.
fn direct_autocorr_peak(samples: &[f64]) -> f64 {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut best = f64::NEG_INFINITY;
    for k in 1..=50.min(n - 1) {
        let mut num = 0.0;
        let mut da = 0.0;
        let mut db = 0.0;
        for t in 0..n - k {
            let x = samples[t] - mean;
            let y = samples[t + k] - mean;
            num += x * y;
            da += x * x;
            db += y * y;
        }
        if da > 0.0 && db > 0.0 {
            let r = num / (da * db).sqrt();
            if r > best {
                best = r;
            }
        }
    }
    if best.is_finite() { best } else { 0.0 }
}

/// Direct pixel-count DSC/IoU from two bit slices, straight from the
/// definitions.
pub fn dsc_iou_bruteforce(pred: &[bool], gt: &[bool]) -> (f64, f64) {
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut fn_ = 0u64;
    for (&p, &g) in pred.iter().zip(gt) {
        match (p, g) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let dsc = if 2 * tp + fp + fn_ == 0 {
        1.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    };
    let iou = if tp + fp + fn_ == 0 {
        1.0
    } else {
        tp as f64 / (tp + fp + fn_) as f64
    };
    (dsc, iou)
}
