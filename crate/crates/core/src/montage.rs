//! Annotated montage rendering: a grid of evenly spaced frames with the
//! segmentation overlaid in green, the active box in yellow, and the pixel
//! area as a numeric label.

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::pipeline::FrameResult;

/// Row-major RGB24 image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for _ in 0..width as usize * height as usize {
            data.extend_from_slice(&rgb);
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn write_png(&self, path: &std::path::Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut encoder = png::Encoder::new(std::io::BufWriter::new(file), self.width, self.height);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::format(path, format!("png: {e}")))?;
        writer
            .write_image_data(&self.data)
            .map_err(|e| Error::format(path, format!("png: {e}")))?;
        Ok(())
    }
}

const BOX_YELLOW: [u8; 3] = [255, 255, 0];

/// Indices of `n` evenly spaced panels over `len` frames:
/// `round(i * (len-1) / (n-1))`.
pub fn panel_indices(len: usize, n: usize) -> Vec<usize> {
    if n <= 1 || len <= 1 {
        return vec![0];
    }
    (0..n)
        .map(|i| ((i as f64) * (len as f64 - 1.0) / (n as f64 - 1.0)).round() as usize)
        .collect()
}

/// Grid image of `n_panels` evenly spaced annotated frames.
pub fn annotate_montage(
    frames: &[Frame],
    results: &[FrameResult],
    n_panels: usize,
) -> Result<RgbImage> {
    if frames.is_empty() || n_panels == 0 {
        return Err(Error::InvalidInput("empty montage".into()));
    }
    if frames.len() != results.len() {
        return Err(Error::InvalidInput(format!(
            "{} frames vs {} results",
            frames.len(),
            results.len()
        )));
    }
    if n_panels > frames.len() {
        return Err(Error::InvalidInput(format!(
            "{n_panels} panels requested from {} frames",
            frames.len()
        )));
    }
    let (fw, fh) = frames[0].dims();
    let cols = (n_panels as f64).sqrt().ceil() as u32;
    let rows = (n_panels as u32).div_ceil(cols);
    let mut out = RgbImage::filled(cols * fw, rows * fh, [0, 0, 0]);
    for (panel, &fi) in panel_indices(frames.len(), n_panels).iter().enumerate() {
        let frame = &frames[fi];
        let res = &results[fi];
        if frame.dims() != (fw, fh) {
            return Err(Error::InvalidInput("frame dimensions vary".into()));
        }
        let ox = (panel as u32 % cols) * fw;
        let oy = (panel as u32 / cols) * fh;
        for y in 0..fh {
            for x in 0..fw {
                let g = frame.get(x, y);
                let rgb = if res.mask.get(x, y) {
                    // 50/50 blend with green.
                    [g / 2, (g as u16 / 2 + 128) as u8, g / 2]
                } else {
                    [g, g, g]
                };
                out.set(ox + x, oy + y, rgb);
            }
        }
        if let Some(det) = &res.detection {
            let b = det.bbox;
            for x in b.x0..b.x1.min(fw) {
                out.set(ox + x, oy + b.y0, BOX_YELLOW);
                out.set(ox + x, oy + (b.y1 - 1).min(fh - 1), BOX_YELLOW);
            }
            for y in b.y0..b.y1.min(fh) {
                out.set(ox + b.x0, oy + y, BOX_YELLOW);
                out.set(ox + (b.x1 - 1).min(fw - 1), oy + y, BOX_YELLOW);
            }
        }
        draw_label(&mut out, ox + 2, oy + 2, &res.area_px2.to_string());
    }
    Ok(out)
}

// 3x5 digit glyphs, one u16 of row-major bits per digit.
const DIGITS: [u16; 10] = [
    0b111_101_101_101_111, // 0
    0b010_110_010_010_111, // 1
    0b111_001_111_100_111, // 2
    0b111_001_111_001_111, // 3
    0b101_101_111_001_001, // 4
    0b111_100_111_001_111, // 5
    0b111_100_111_101_111, // 6
    0b111_001_001_001_001, // 7
    0b111_101_111_101_111, // 8
    0b111_101_111_001_111, // 9
];

const GLYPH_SCALE: u32 = 2;

fn draw_label(img: &mut RgbImage, x0: u32, y0: u32, text: &str) {
    let mut cx = x0;
    for ch in text.chars() {
        let Some(d) = ch.to_digit(10) else { continue };
        let glyph = DIGITS[d as usize];
        for row in 0..5u32 {
            for col in 0..3u32 {
                let bit = 14 - (row * 3 + col);
                if glyph >> bit & 1 == 1 {
                    for dy in 0..GLYPH_SCALE {
                        for dx in 0..GLYPH_SCALE {
                            let px = cx + col * GLYPH_SCALE + dx;
                            let py = y0 + row * GLYPH_SCALE + dy;
                            if px < img.width() && py < img.height() {
                                img.set(px, py, BOX_YELLOW);
                            }
                        }
                    }
                }
            }
        }
        cx += 4 * GLYPH_SCALE;
    }
}
