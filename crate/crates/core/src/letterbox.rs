//! Aspect-preserving resize onto a square canvas with symmetric zero padding.
//!
//! The longer side is scaled to the target exactly; the shorter side keeps
//! the aspect ratio and the leftover margin is split evenly, with any odd
//! pixel going to the right/bottom. Frames are resampled bilinearly, masks
//! with nearest-neighbor so the identical transform applies to both.

use crate::error::{Error, Result};
use crate::frame::{BinaryMask, Frame};
use crate::resize::{resize_bilinear_u8, resize_nearest_bool};

/// Forward map from source to canvas coordinates: `q = p * scale + pad`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LetterboxTransform {
    pub scale: f64,
    pub pad_left: u32,
    pub pad_top: u32,
    pub source_width: u32,
    pub source_height: u32,
}

impl LetterboxTransform {
    pub fn apply(&self, p: (f64, f64)) -> (f64, f64) {
        (
            p.0 * self.scale + self.pad_left as f64,
            p.1 * self.scale + self.pad_top as f64,
        )
    }

    pub fn invert(&self, q: (f64, f64)) -> (f64, f64) {
        (
            (q.0 - self.pad_left as f64) / self.scale,
            (q.1 - self.pad_top as f64) / self.scale,
        )
    }
}

struct Geometry {
    scaled_w: u32,
    scaled_h: u32,
    transform: LetterboxTransform,
}

fn geometry(width: u32, height: u32, target: u32) -> Result<Geometry> {
    if target == 0 {
        return Err(Error::InvalidInput("letterbox target must be >= 1".into()));
    }
    let longer = width.max(height);
    let scale = target as f64 / longer as f64;
    let (scaled_w, scaled_h) = if width >= height {
        (target, (((height as f64) * scale).round() as u32).max(1))
    } else {
        ((((width as f64) * scale).round() as u32).max(1), target)
    };
    let pad_left = (target - scaled_w) / 2;
    let pad_top = (target - scaled_h) / 2;
    Ok(Geometry {
        scaled_w,
        scaled_h,
        transform: LetterboxTransform {
            scale,
            pad_left,
            pad_top,
            source_width: width,
            source_height: height,
        },
    })
}

pub fn letterbox_frame(frame: &Frame, target: u32) -> Result<(Frame, LetterboxTransform)> {
    let g = geometry(frame.width(), frame.height(), target)?;
    let scaled = resize_bilinear_u8(
        frame.pixels(),
        frame.width(),
        frame.height(),
        g.scaled_w,
        g.scaled_h,
    );
    let mut out = Frame::filled(target, target, 0)?;
    blit(
        &scaled,
        g.scaled_w,
        g.scaled_h,
        out.pixels_mut(),
        target,
        g.transform.pad_left,
        g.transform.pad_top,
    );
    Ok((out, g.transform))
}

pub fn letterbox_mask(mask: &BinaryMask, target: u32) -> Result<(BinaryMask, LetterboxTransform)> {
    let g = geometry(mask.width(), mask.height(), target)?;
    let scaled = resize_nearest_bool(
        mask.bits(),
        mask.width(),
        mask.height(),
        g.scaled_w,
        g.scaled_h,
    );
    let mut out = BinaryMask::falses(target, target)?;
    for y in 0..g.scaled_h {
        for x in 0..g.scaled_w {
            if scaled[y as usize * g.scaled_w as usize + x as usize] {
                out.set(x + g.transform.pad_left, y + g.transform.pad_top, true);
            }
        }
    }
    Ok((out, g.transform))
}

fn blit(src: &[u8], sw: u32, sh: u32, dst: &mut [u8], dst_w: u32, off_x: u32, off_y: u32) {
    for y in 0..sh {
        let src_row = y as usize * sw as usize;
        let dst_row = (y + off_y) as usize * dst_w as usize + off_x as usize;
        dst[dst_row..dst_row + sw as usize].copy_from_slice(&src[src_row..src_row + sw as usize]);
    }
}
