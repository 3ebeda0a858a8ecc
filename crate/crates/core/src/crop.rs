//! Crop-and-zoom geometry: cut a padded detection region out of a frame,
//! resize it to the segmenter canvas, and paste patch-space masks back into
//! full-frame coordinates.

use crate::bbox::BBox;
use crate::error::{Error, Result};
use crate::frame::{BinaryMask, Frame};
use crate::resize::{resize_bilinear_u8, resize_nearest_bool};

pub const DEFAULT_CROP_PAD: u32 = 8;
pub const DEFAULT_CROP_TARGET: u32 = 256;

/// Expand `bbox` by `pad` on each side (clamped to the frame), then resize
/// that region bilinearly to a `target` x `target` patch. Returns the patch
/// and the crop rectangle actually used.
pub fn crop_resize(frame: &Frame, bbox: &BBox, pad: u32, target: u32) -> Result<(Frame, BBox)> {
    if !bbox.fits_in(frame.width(), frame.height()) {
        return Err(Error::InvalidInput(format!(
            "box {bbox} outside {}x{} frame",
            frame.width(),
            frame.height()
        )));
    }
    if target == 0 {
        return Err(Error::InvalidInput("crop target must be >= 1".into()));
    }
    let rect = bbox.expand_clamped(pad, frame.width(), frame.height());
    let (cw, ch) = (rect.width(), rect.height());
    let mut region = Vec::with_capacity(cw as usize * ch as usize);
    for y in rect.y0..rect.y1 {
        let row = y as usize * frame.width() as usize;
        region.extend_from_slice(&frame.pixels()[row + rect.x0 as usize..row + rect.x1 as usize]);
    }
    let patch = Frame::new(
        target,
        target,
        resize_bilinear_u8(&region, cw, ch, target, target),
    )?;
    Ok((patch, rect))
}

/// Resize a patch-space mask (nearest-neighbor) to the crop rectangle and
/// write it into an otherwise all-false full-frame mask.
pub fn paste_back(
    patch_mask: &BinaryMask,
    crop_rect: &BBox,
    frame_w: u32,
    frame_h: u32,
) -> Result<BinaryMask> {
    if !crop_rect.fits_in(frame_w, frame_h) {
        return Err(Error::InvalidInput(format!(
            "crop rect {crop_rect} outside {frame_w}x{frame_h} frame"
        )));
    }
    let (cw, ch) = (crop_rect.width(), crop_rect.height());
    let resized = resize_nearest_bool(
        patch_mask.bits(),
        patch_mask.width(),
        patch_mask.height(),
        cw,
        ch,
    );
    let mut out = BinaryMask::falses(frame_w, frame_h)?;
    for y in 0..ch {
        for x in 0..cw {
            if resized[y as usize * cw as usize + x as usize] {
                out.set(crop_rect.x0 + x, crop_rect.y0 + y, true);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbox::mask_to_bbox;

    #[test]
    fn pad_expands_and_patch_is_square() {
        let f = Frame::filled(256, 256, 100).unwrap();
        let b = BBox::new(100, 100, 140, 140).unwrap();
        let (patch, rect) = crop_resize(&f, &b, 8, 256).unwrap();
        assert_eq!(rect, BBox::new(92, 92, 148, 148).unwrap());
        assert_eq!(patch.dims(), (256, 256));
    }

    #[test]
    fn pad_clamps_at_border() {
        let f = Frame::filled(256, 256, 0).unwrap();
        let b = BBox::new(0, 0, 10, 10).unwrap();
        let (_, rect) = crop_resize(&f, &b, 8, 32).unwrap();
        assert_eq!(rect, BBox::new(0, 0, 18, 18).unwrap());
    }

    #[test]
    fn full_frame_zero_pad_is_identity() {
        let mut f = Frame::filled(256, 256, 0).unwrap();
        for y in 0..256u32 {
            for x in 0..256u32 {
                f.set(x, y, ((x * 7 + y * 13) % 251) as u8);
            }
        }
        let b = BBox::new(0, 0, 256, 256).unwrap();
        let (patch, rect) = crop_resize(&f, &b, 0, 256).unwrap();
        assert_eq!(rect, b);
        assert_eq!(patch, f);
    }

    #[test]
    fn paste_back_all_true_patch_fills_rect_exactly() {
        let patch = BinaryMask::from_fn(256, 256, |_, _| true).unwrap();
        let rect = BBox::new(92, 92, 148, 148).unwrap();
        let out = paste_back(&patch, &rect, 256, 256).unwrap();
        assert_eq!(out.count_true(), 56 * 56);
        for (x, y) in out.iter_true() {
            assert!(rect.contains(x, y));
        }
    }

    #[test]
    fn paste_back_all_false_patch_is_empty() {
        let patch = BinaryMask::falses(256, 256).unwrap();
        let rect = BBox::new(10, 10, 50, 50).unwrap();
        assert_eq!(paste_back(&patch, &rect, 64, 64).unwrap().count_true(), 0);
    }

    #[test]
    fn paste_back_rejects_out_of_frame_rect() {
        let patch = BinaryMask::falses(8, 8).unwrap();
        let rect = BBox::new(60, 60, 70, 70).unwrap();
        assert!(paste_back(&patch, &rect, 64, 64).is_err());
    }

    #[test]
    fn round_trip_without_resizing_is_exact() {
        // pad=0 and crop size == target: crop then paste returns the region.
        let blob =
            BinaryMask::from_fn(64, 64, |x, y| x.abs_diff(32) < 9 && y.abs_diff(30) < 7).unwrap();
        let rect = BBox::new(16, 16, 48, 48).unwrap();
        let patch = BinaryMask::from_fn(32, 32, |x, y| blob.get(x + 16, y + 16)).unwrap();
        let out = paste_back(&patch, &rect, 64, 64).unwrap();
        assert_eq!(out, blob);
    }

    #[test]
    fn crop_paste_round_trip_preserves_blob_area_within_2_percent() {
        // Blob >= 100 px^2 through a full crop/resize/paste cycle.
        let frame = Frame::filled(256, 256, 0).unwrap();
        let blob = BinaryMask::from_fn(256, 256, |x, y| {
            let dx = (x as f64 - 128.0) / 14.0;
            let dy = (y as f64 - 120.0) / 9.0;
            dx * dx + dy * dy <= 1.0
        })
        .unwrap();
        let b = mask_to_bbox(&blob).unwrap();
        let (_, rect) = crop_resize(&frame, &b, 8, 256).unwrap();
        // Emulate a perfect crop-space segmenter output: blob restricted to
        // the crop, resized up to the patch, then pasted back.
        let crop_bits = BinaryMask::from_fn(rect.width(), rect.height(), |x, y| {
            blob.get(rect.x0 + x, rect.y0 + y)
        })
        .unwrap();
        let patch = BinaryMask::new(
            256,
            256,
            crate::resize::resize_nearest_bool(
                crop_bits.bits(),
                rect.width(),
                rect.height(),
                256,
                256,
            ),
        )
        .unwrap();
        let out = paste_back(&patch, &rect, 256, 256).unwrap();
        let a0 = blob.count_true() as f64;
        let a1 = out.count_true() as f64;
        assert!(a0 >= 100.0);
        assert!((a1 - a0).abs() / a0 <= 0.02, "area drift {a0} -> {a1}");
    }
}
