//! Otsu thresholding restricted to a box, inverted so the dark class is the
//! foreground (the glottis is dark).
//!
//! The threshold maximizes the between-class variance
//! `sigma_b^2(t) = w0 * w1 * (mu0 - mu1)^2` over the 256 candidate levels.
//! Dropping the constant total-count factors this is equivalent to
//! maximizing `(S0*W - S*W0)^2 / (W0*(W - W0))` with cumulative count `W0`
//! and intensity sum `S0`, which we compare exactly in integer arithmetic so
//! ties break deterministically toward the lower level.

use crate::bbox::BBox;
use crate::error::{Error, Result};
use crate::frame::{BinaryMask, Frame};

/// Between-class-variance-maximizing intensity level for an intensity
/// histogram. Ties break toward the lower level; a single populated bin
/// returns that bin.
pub fn otsu_level(histogram: &[u64; 256]) -> Result<u8> {
    let total: u64 = histogram.iter().sum();
    if total == 0 {
        return Err(Error::InvalidInput("empty histogram".into()));
    }
    let populated: Vec<usize> = (0..256).filter(|&i| histogram[i] > 0).collect();
    if populated.len() == 1 {
        return Ok(populated[0] as u8);
    }
    let sum: u64 = histogram
        .iter()
        .enumerate()
        .map(|(i, &c)| i as u64 * c)
        .sum();

    // Maximize num^2 / den exactly: keep the best as a cross-multiplied
    // rational comparison in i128.
    let mut best_level = 0u8;
    let mut best_num_sq: i128 = -1;
    let mut best_den: i128 = 1;
    let mut w0: u64 = 0;
    let mut s0: u64 = 0;
    for (t, &count) in histogram.iter().enumerate() {
        w0 += count;
        s0 += t as u64 * count;
        if w0 == 0 || w0 == total {
            continue;
        }
        let num = s0 as i128 * total as i128 - sum as i128 * w0 as i128;
        let num_sq = num * num;
        let den = w0 as i128 * (total - w0) as i128;
        // num_sq / den > best_num_sq / best_den, strict so the lowest level wins.
        if num_sq * best_den > best_num_sq * den {
            best_num_sq = num_sq;
            best_den = den;
            best_level = t as u8;
        }
    }
    Ok(best_level)
}

/// Otsu segmentation inside `bbox`: threshold the in-box histogram, mark
/// pixels at or below the level (dark class), leave everything outside the
/// box false. A zero-contrast box yields an all-false mask.
pub fn otsu_segment(frame: &Frame, bbox: &BBox) -> BinaryMask {
    let mut out = BinaryMask::falses(frame.width(), frame.height()).expect("frame non-degenerate");
    let x1 = bbox.x1.min(frame.width());
    let y1 = bbox.y1.min(frame.height());
    if bbox.x0 >= x1 || bbox.y0 >= y1 {
        return out;
    }
    let mut hist = [0u64; 256];
    for y in bbox.y0..y1 {
        for x in bbox.x0..x1 {
            hist[frame.get(x, y) as usize] += 1;
        }
    }
    if hist.iter().filter(|&&c| c > 0).count() < 2 {
        // No contrast: no evidence of a dark region.
        return out;
    }
    let level = otsu_level(&hist).expect("in-box histogram is non-empty");
    for y in bbox.y0..y1 {
        for x in bbox.x0..x1 {
            if frame.get(x, y) <= level {
                out.set(x, y, true);
            }
        }
    }
    out
}
