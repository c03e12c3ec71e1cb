use std::io::Cursor;

use image::codecs::jpeg::JpegEncoder;
use image::{ExtendedColorType, ImageFormat};

use crate::render::RasterImage;

/// Standard luminance quantization table, natural (row-major) order.
#[rustfmt::skip]
pub const BASE_LUMA_TABLE: [u8; 64] = [
    16, 11, 10, 16,  24,  40,  51,  61,
    12, 12, 14, 19,  26,  58,  60,  55,
    14, 13, 16, 24,  40,  57,  69,  56,
    14, 17, 22, 29,  51,  87,  80,  62,
    18, 22, 37, 56,  68, 109, 103,  77,
    24, 35, 55, 64,  81, 104, 113,  92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103,  99,
];

/// IJG percentage scaling for a quality in `1..=100`.
pub fn quality_scale(quality: u8) -> u32 {
    let q = quality.clamp(1, 100) as u32;
    if q < 50 {
        5000 / q
    } else {
        200 - 2 * q
    }
}

/// Luminance table used at `quality`, natural order.
pub fn quantization_table(quality: u8) -> [u8; 64] {
    let scale = quality_scale(quality);
    BASE_LUMA_TABLE.map(|b| ((b as u32 * scale + 50) / 100).clamp(1, 255) as u8)
}

/// Baseline JPEG bytes for a grayscale image.
pub fn encode_jpeg(img: &RasterImage, quality: u8) -> Vec<u8> {
    let mut out = Cursor::new(Vec::new());
    JpegEncoder::new_with_quality(&mut out, quality.clamp(1, 100))
        .encode(img.pixels(), img.width(), img.height(), ExtendedColorType::L8)
        .expect("in-memory grayscale JPEG encoding cannot fail");
    out.into_inner()
}

/// Encodes at `quality` and decodes back to grayscale.
pub fn jpeg_roundtrip(img: &RasterImage, quality: u8) -> RasterImage {
    let bytes = encode_jpeg(img, quality);
    let decoded = image::load_from_memory_with_format(&bytes, ImageFormat::Jpeg)
        .expect("decoding our own baseline JPEG");
    RasterImage::from_gray_image(decoded.into_luma8())
}
