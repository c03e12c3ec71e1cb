use std::path::Path;

use image::{GrayImage, ImageFormat};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("image dimensions {width}x{height} must both be at least 1")]
    EmptyDimensions { width: u32, height: u32 },
    #[error("pixel buffer holds {got} samples, expected {expected}")]
    BufferSize { expected: usize, got: usize },
    #[error("image codec: {0}")]
    Codec(#[from] image::ImageError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// 8-bit grayscale image, row-major, 0 = black and 255 = white.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::EmptyDimensions { width, height });
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(RasterError::BufferSize {
                expected,
                got: pixels.len(),
            });
        }
        Ok(RasterImage {
            width,
            height,
            pixels,
        })
    }

    /// Uniform image of the given value.
    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        assert!(width > 0 && height > 0, "empty image");
        RasterImage {
            width,
            height,
            pixels: vec![value; width as usize * height as usize],
        }
    }

    pub fn white(width: u32, height: u32) -> Self {
        Self::filled(width, height, 255)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = value;
    }

    /// Same-size image with `f` applied to every pixel.
    pub fn map(&self, f: impl Fn(u8) -> u8) -> RasterImage {
        RasterImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }

    /// Adds a uniform white border.
    pub fn pad(&self, margin: u32) -> RasterImage {
        let w = self.width + 2 * margin;
        let h = self.height + 2 * margin;
        let mut out = RasterImage::white(w, h);
        for y in 0..self.height {
            let src = &self.pixels[(y * self.width) as usize..((y + 1) * self.width) as usize];
            let start = ((y + margin) * w + margin) as usize;
            out.pixels[start..start + self.width as usize].copy_from_slice(src);
        }
        out
    }

    /// Bounding box `(x0, y0, x1, y1)` (inclusive) of pixels darker than
    /// `threshold`, or `None` when there are none.
    pub fn ink_bounds(&self, threshold: u8) -> Option<(u32, u32, u32, u32)> {
        let mut b: Option<(u32, u32, u32, u32)> = None;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) < threshold {
                    b = Some(match b {
                        None => (x, y, x, y),
                        Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
                    });
                }
            }
        }
        b
    }

    pub fn count(&self, pred: impl Fn(u8) -> bool) -> usize {
        self.pixels.iter().filter(|&&p| pred(p)).count()
    }

    pub fn to_gray_image(&self) -> GrayImage {
        GrayImage::from_raw(self.width, self.height, self.pixels.clone())
            .expect("buffer size is an invariant")
    }

    pub fn from_gray_image(img: GrayImage) -> Self {
        let (width, height) = img.dimensions();
        RasterImage {
            width,
            height,
            pixels: img.into_raw(),
        }
    }

    /// Encodes as an 8-bit grayscale PNG.
    pub fn to_png_bytes(&self) -> Result<Vec<u8>, RasterError> {
        let mut out = std::io::Cursor::new(Vec::new());
        self.to_gray_image().write_to(&mut out, ImageFormat::Png)?;
        Ok(out.into_inner())
    }

    pub fn save_png(&self, path: &Path) -> Result<(), RasterError> {
        std::fs::write(path, self.to_png_bytes()?)?;
        Ok(())
    }

    /// Loads any image the codec understands, converting to 8-bit gray.
    pub fn load(path: &Path) -> Result<Self, RasterError> {
        let img = image::open(path)?;
        Ok(Self::from_gray_image(img.into_luma8()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_buffers() {
        assert!(matches!(
            RasterImage::new(0, 3, vec![]),
            Err(RasterError::EmptyDimensions { .. })
        ));
        assert!(matches!(
            RasterImage::new(2, 2, vec![0; 3]),
            Err(RasterError::BufferSize { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn png_round_trip() {
        let img = RasterImage::new(3, 2, vec![0, 17, 255, 128, 1, 254]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.png");
        img.save_png(&p).unwrap();
        assert_eq!(RasterImage::load(&p).unwrap(), img);
    }

    #[test]
    fn pad_and_bounds() {
        let mut img = RasterImage::white(4, 3);
        img.set(1, 2, 0);
        assert_eq!(img.ink_bounds(128), Some((1, 2, 1, 2)));
        let padded = img.pad(5);
        assert_eq!((padded.width(), padded.height()), (14, 13));
        assert_eq!(padded.ink_bounds(128), Some((6, 7, 6, 7)));
        assert_eq!(RasterImage::white(2, 2).ink_bounds(128), None);
    }
}
