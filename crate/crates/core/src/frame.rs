//! Grayscale frames and binary masks, the two pixel value types everything
//! else operates on. Both are row-major with `index = y * width + x`.

use crate::error::{Error, Result};

/// Single-channel 8-bit image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl Frame {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(Error::InvalidInput(format!(
                "pixel buffer length {} does not match {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Result<Self> {
        check_dims(width, height)?;
        let n = width as usize * height as usize;
        Ok(Self {
            width,
            height,
            pixels: vec![value; n],
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        self.pixels[y as usize * self.width as usize + x as usize] = value;
    }
}

/// Per-pixel boolean image aligned to a [`Frame`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        check_dims(width, height)?;
        let expected = width as usize * height as usize;
        if bits.len() != expected {
            return Err(Error::InvalidInput(format!(
                "bit buffer length {} does not match {}x{}",
                bits.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// All-false mask.
    pub fn falses(width: u32, height: u32) -> Result<Self> {
        check_dims(width, height)?;
        let n = width as usize * height as usize;
        Ok(Self {
            width,
            height,
            bits: vec![false; n],
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Result<Self> {
        check_dims(width, height)?;
        let mut bits = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.bits[y as usize * self.width as usize + x as usize] = value;
    }

    pub fn count_true(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }

    pub fn any(&self) -> bool {
        self.bits.iter().any(|&b| b)
    }

    /// Set pixels in row-major order.
    pub fn iter_true(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b)
            .map(move |(i, _)| ((i as u32) % w, (i as u32) / w))
    }

    /// Morphological dilation with a square structuring element of the given
    /// radius (two separable passes).
    pub fn dilate(&self, radius: u32) -> BinaryMask {
        self.morph(radius, true)
    }

    /// Morphological erosion with a square structuring element of the given
    /// radius.
    pub fn erode(&self, radius: u32) -> BinaryMask {
        self.morph(radius, false)
    }

    fn morph(&self, radius: u32, dilate: bool) -> BinaryMask {
        if radius == 0 {
            return self.clone();
        }
        let (w, h) = (self.width as usize, self.height as usize);
        let r = radius as usize;
        let mut tmp = vec![false; w * h];
        for y in 0..h {
            let row = &self.bits[y * w..(y + 1) * w];
            for x in 0..w {
                let lo = x.saturating_sub(r);
                let hi = (x + r).min(w - 1);
                let window = &row[lo..=hi];
                tmp[y * w + x] = if dilate {
                    window.iter().any(|&b| b)
                } else {
                    window.iter().all(|&b| b)
                };
            }
        }
        let mut out = vec![false; w * h];
        for x in 0..w {
            for y in 0..h {
                let lo = y.saturating_sub(r);
                let hi = (y + r).min(h - 1);
                let mut acc = !dilate;
                for row in lo..=hi {
                    let b = tmp[row * w + x];
                    if dilate {
                        acc |= b;
                    } else {
                        acc &= b;
                    }
                }
                out[y * w + x] = acc;
            }
        }
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: out,
        }
    }
}

fn check_dims(width: u32, height: u32) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidInput(format!(
            "image dimensions must be positive, got {width}x{height}"
        )));
    }
    Ok(())
}
