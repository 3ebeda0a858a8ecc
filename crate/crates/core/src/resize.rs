//! Raster resampling primitives shared by letterboxing and crop handling.
//!
//! Both samplers map destination pixel centers to source coordinates with
//! `src = (dst + 0.5) * src_len / dst_len - 0.5`, so a same-size resize is
//! the identity.

/// Bilinear resample of an 8-bit grayscale buffer.
pub(crate) fn resize_bilinear_u8(src: &[u8], sw: u32, sh: u32, dw: u32, dh: u32) -> Vec<u8> {
    debug_assert_eq!(src.len(), sw as usize * sh as usize);
    let (sw_u, sh_u) = (sw as usize, sh as usize);
    let mut out = Vec::with_capacity(dw as usize * dh as usize);
    let x_ratio = sw as f64 / dw as f64;
    let y_ratio = sh as f64 / dh as f64;
    for dy in 0..dh {
        let sy = ((dy as f64 + 0.5) * y_ratio - 0.5).clamp(0.0, (sh - 1) as f64);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(sh_u - 1);
        let fy = sy - y0 as f64;
        for dx in 0..dw {
            let sx = ((dx as f64 + 0.5) * x_ratio - 0.5).clamp(0.0, (sw - 1) as f64);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(sw_u - 1);
            let fx = sx - x0 as f64;
            let top = src[y0 * sw_u + x0] as f64 * (1.0 - fx) + src[y0 * sw_u + x1] as f64 * fx;
            let bot = src[y1 * sw_u + x0] as f64 * (1.0 - fx) + src[y1 * sw_u + x1] as f64 * fx;
            let v = top * (1.0 - fy) + bot * fy;
            out.push((v + 0.5).floor() as u8);
        }
    }
    out
}

/// Nearest-neighbor resample of a boolean buffer; keeps masks binary.
pub(crate) fn resize_nearest_bool(src: &[bool], sw: u32, sh: u32, dw: u32, dh: u32) -> Vec<bool> {
    debug_assert_eq!(src.len(), sw as usize * sh as usize);
    let sw_u = sw as usize;
    let mut out = Vec::with_capacity(dw as usize * dh as usize);
    let x_ratio = sw as f64 / dw as f64;
    let y_ratio = sh as f64 / dh as f64;
    for dy in 0..dh {
        let sy = (((dy as f64 + 0.5) * y_ratio).floor() as usize).min(sh as usize - 1);
        for dx in 0..dw {
            let sx = (((dx as f64 + 0.5) * x_ratio).floor() as usize).min(sw_u - 1);
            out.push(src[sy * sw_u + sx]);
        }
    }
    out
}
