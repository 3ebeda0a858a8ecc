//! Half-open pixel rectangles and box/mask geometry.
//!
//! Boxes are `[x0, x1) x [y0, y1)` so that `width = x1 - x0` and clamping
//! arithmetic stays exact in integers.

use std::fmt;

use crate::error::{Error, Result};
use crate::frame::BinaryMask;

/// Half-open pixel rectangle: `x0 <= x < x1`, `y0 <= y < y1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BBox {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl BBox {
    pub fn new(x0: u32, y0: u32, x1: u32, y1: u32) -> Result<Self> {
        if x0 >= x1 || y0 >= y1 {
            return Err(Error::InvalidInput(format!(
                "degenerate box ({x0},{y0},{x1},{y1})"
            )));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    pub fn width(&self) -> u32 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    /// Geometric center in pixel units. Half-integral for odd sizes.
    pub fn center(&self) -> (f64, f64) {
        (
            (self.x0 as f64 + self.x1 as f64) / 2.0,
            (self.y0 as f64 + self.y1 as f64) / 2.0,
        )
    }

    #[inline]
    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn fits_in(&self, frame_w: u32, frame_h: u32) -> bool {
        self.x1 <= frame_w && self.y1 <= frame_h
    }

    /// Grow by `pad` on each side, clamped to the frame.
    pub fn expand_clamped(&self, pad: u32, frame_w: u32, frame_h: u32) -> BBox {
        BBox {
            x0: self.x0.saturating_sub(pad),
            y0: self.y0.saturating_sub(pad),
            x1: (self.x1.saturating_add(pad)).min(frame_w),
            y1: (self.y1.saturating_add(pad)).min(frame_h),
        }
    }

    /// Shift by `(dx, dy)` keeping size, clamping the position so the box
    /// stays inside the frame. The box must not be larger than the frame.
    pub fn translate_clamped(&self, dx: i64, dy: i64, frame_w: u32, frame_h: u32) -> BBox {
        let w = self.width() as i64;
        let h = self.height() as i64;
        let x0 = (self.x0 as i64 + dx).clamp(0, (frame_w as i64 - w).max(0));
        let y0 = (self.y0 as i64 + dy).clamp(0, (frame_h as i64 - h).max(0));
        BBox {
            x0: x0 as u32,
            y0: y0 as u32,
            x1: (x0 + w) as u32,
            y1: (y0 + h) as u32,
        }
    }

    pub fn intersect(&self, other: &BBox) -> Option<BBox> {
        let x0 = self.x0.max(other.x0);
        let y0 = self.y0.max(other.y0);
        let x1 = self.x1.min(other.x1);
        let y1 = self.y1.min(other.y1);
        (x0 < x1 && y0 < y1).then_some(BBox { x0, y0, x1, y1 })
    }
}

impl fmt::Display for BBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.x0, self.y0, self.x1, self.y1)
    }
}

/// Smallest half-open rectangle containing all set pixels; `None` for an
/// empty mask.
pub fn mask_to_bbox(mask: &BinaryMask) -> Option<BBox> {
    let mut x0 = u32::MAX;
    let mut y0 = u32::MAX;
    let mut x1 = 0u32;
    let mut y1 = 0u32;
    let mut any = false;
    for (x, y) in mask.iter_true() {
        any = true;
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x + 1);
        y1 = y1.max(y + 1);
    }
    any.then_some(BBox { x0, y0, x1, y1 })
}

/// True exactly where the mask is true and the pixel lies inside the box.
/// The box is clipped to the mask bounds.
pub fn restrict_mask(mask: &BinaryMask, bbox: &BBox) -> BinaryMask {
    let mut out = BinaryMask::falses(mask.width(), mask.height()).expect("mask is non-degenerate");
    let x1 = bbox.x1.min(mask.width());
    let y1 = bbox.y1.min(mask.height());
    for y in bbox.y0..y1 {
        for x in bbox.x0..x1 {
            if mask.get(x, y) {
                out.set(x, y, true);
            }
        }
    }
    out
}

/// Normalized detection label record: class id plus center/size in [0,1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YoloLabel {
    pub class_id: u32,
    pub x_center: f64,
    pub y_center: f64,
    pub width: f64,
    pub height: f64,
}

/// Convert a pixel box into a normalized label record (class 0).
pub fn bbox_to_label_record(bbox: &BBox, frame_w: u32, frame_h: u32) -> Result<YoloLabel> {
    if !bbox.fits_in(frame_w, frame_h) {
        return Err(Error::InvalidInput(format!(
            "box {bbox} outside {frame_w}x{frame_h} frame"
        )));
    }
    let fw = frame_w as f64;
    let fh = frame_h as f64;
    Ok(YoloLabel {
        class_id: 0,
        x_center: (bbox.x0 as f64 + bbox.x1 as f64) / (2.0 * fw),
        y_center: (bbox.y0 as f64 + bbox.y1 as f64) / (2.0 * fh),
        width: bbox.width() as f64 / fw,
        height: bbox.height() as f64 / fh,
    })
}

impl fmt::Display for YoloLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {}",
            self.class_id, self.x_center, self.y_center, self.width, self.height
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_boxes_rejected() {
        assert!(BBox::new(5, 5, 5, 10).is_err());
        assert!(BBox::new(5, 5, 10, 5).is_err());
        assert!(BBox::new(5, 5, 4, 10).is_err());
    }

    #[test]
    fn mask_to_bbox_tight_rectangle() {
        // Set pixels exactly {(10,20)..(30,40)} inclusive.
        let m = BinaryMask::from_fn(64, 64, |x, y| {
            (10..=30).contains(&x) && (20..=40).contains(&y)
        })
        .unwrap();
        assert_eq!(mask_to_bbox(&m), Some(BBox::new(10, 20, 31, 41).unwrap()));
    }

    #[test]
    fn mask_to_bbox_empty_and_single() {
        assert_eq!(mask_to_bbox(&BinaryMask::falses(8, 8).unwrap()), None);
        let m = BinaryMask::from_fn(16, 16, |x, y| x == 5 && y == 7).unwrap();
        assert_eq!(mask_to_bbox(&m), Some(BBox::new(5, 7, 6, 8).unwrap()));
    }

    #[test]
    fn restrict_full_frame_box_is_identity() {
        let m = BinaryMask::from_fn(12, 12, |x, y| (x + y) % 3 == 0).unwrap();
        let full = BBox::new(0, 0, 12, 12).unwrap();
        assert_eq!(restrict_mask(&m, &full), m);
    }

    #[test]
    fn restrict_is_set_intersection() {
        let m = BinaryMask::from_fn(32, 32, |x, y| x < 10 && y < 10).unwrap();
        let b = BBox::new(5, 5, 20, 20).unwrap();
        let r = restrict_mask(&m, &b);
        for y in 0..32 {
            for x in 0..32 {
                assert_eq!(r.get(x, y), (5..10).contains(&x) && (5..10).contains(&y));
            }
        }
    }

    #[test]
    fn restrict_disjoint_is_empty() {
        let m = BinaryMask::from_fn(32, 32, |x, y| x < 4 && y < 4).unwrap();
        let b = BBox::new(10, 10, 20, 20).unwrap();
        assert_eq!(restrict_mask(&m, &b).count_true(), 0);
    }

    #[test]
    fn restrict_with_own_bbox_is_identity() {
        let m = BinaryMask::from_fn(20, 20, |x, y| x.abs_diff(9) + y.abs_diff(9) < 6).unwrap();
        let b = mask_to_bbox(&m).unwrap();
        assert_eq!(restrict_mask(&m, &b), m);
    }

    #[test]
    fn label_record_values() {
        let full = bbox_to_label_record(&BBox::new(0, 0, 256, 256).unwrap(), 256, 256).unwrap();
        assert_eq!(
            (full.x_center, full.y_center, full.width, full.height),
            (0.5, 0.5, 1.0, 1.0)
        );

        let mid = bbox_to_label_record(&BBox::new(64, 64, 192, 192).unwrap(), 256, 256).unwrap();
        assert_eq!(
            (mid.x_center, mid.y_center, mid.width, mid.height),
            (0.5, 0.5, 0.5, 0.5)
        );

        let tight = bbox_to_label_record(&BBox::new(10, 20, 31, 41).unwrap(), 256, 256).unwrap();
        assert_eq!(tight.x_center, 0.080078125);
        assert_eq!(tight.y_center, 0.119140625);
        assert_eq!(tight.width, 0.08203125);
        assert_eq!(tight.height, 0.08203125);
        assert_eq!(
            tight.to_string(),
            "0 0.080078125 0.119140625 0.08203125 0.08203125"
        );
    }

    #[test]
    fn label_record_rejects_out_of_frame() {
        let b = BBox::new(200, 200, 300, 300).unwrap();
        assert!(bbox_to_label_record(&b, 256, 256).is_err());
    }

    #[test]
    fn translate_clamped_stays_inside() {
        let b = BBox::new(10, 10, 30, 30).unwrap();
        let t = b.translate_clamped(-50, 5, 64, 64);
        assert_eq!(t, BBox::new(0, 15, 20, 35).unwrap());
        let t = b.translate_clamped(100, 100, 64, 64);
        assert_eq!(t, BBox::new(44, 44, 64, 64).unwrap());
    }
}
