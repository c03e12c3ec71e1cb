//! Damage families applied to rendered images, plus Otsu binarization.
//!
//! Every transform keeps the image dimensions and is a pure function of its
//! inputs and seed.

mod jpeg;
mod shepard;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::render::RasterImage;

pub use jpeg::{encode_jpeg, jpeg_roundtrip, quality_scale, quantization_table, BASE_LUMA_TABLE};
pub use shepard::{sample_bilinear, shepards_distort, ControlPair, ShepardField, DEFAULT_POINTS};

/// White margin an image must carry before distortion.
pub const DISTORT_PADDING: u32 = 30;

/// Label of the undamaged subset.
pub const BASE_LABEL: &str = "base";

/// Black overlay at `percent` opacity: `p -> round(p * (100 - percent) / 100)`,
/// halves rounded up.
pub fn blend_black(img: &RasterImage, percent: u8) -> RasterImage {
    let keep = 100 - percent.min(100) as u32;
    img.map(|p| ((p as u32 * keep + 50) / 100) as u8)
}

/// Salt-and-pepper noise: each pixel is replaced with probability
/// `density_percent / 100`, by black or white with equal odds.
pub fn impulse_noise(img: &RasterImage, density_percent: u8, seed: u64) -> RasterImage {
    let p = density_percent.min(100) as f64 / 100.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = img.clone();
    for px in out.pixels_mut() {
        if rng.gen::<f64>() < p {
            *px = if rng.gen_bool(0.5) { 0 } else { 255 };
        }
    }
    out
}

/// Global Otsu threshold: the smallest `t` maximizing between-class variance
/// of the split `{<= t} | {> t}`. `None` when the image has a single level.
pub fn otsu_threshold(img: &RasterImage) -> Option<u8> {
    let mut hist = [0u64; 256];
    for &p in img.pixels() {
        hist[p as usize] += 1;
    }
    let total = img.pixels().len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(v, &c)| v as f64 * c as f64).sum();
    let (mut w0, mut s0) = (0.0, 0.0);
    let mut best: Option<(u8, f64)> = None;
    for t in 0..255usize {
        w0 += hist[t] as f64;
        s0 += t as f64 * hist[t] as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let diff = s0 / w0 - (sum_all - s0) / w1;
        let between = w0 * w1 * diff * diff;
        if best.is_none_or(|(_, b)| between > b) {
            best = Some((t as u8, between));
        }
    }
    best.map(|(t, _)| t)
}

/// Otsu binarization: pixels `<= t` become black, the rest white. A
/// single-level image becomes all white.
pub fn binarize_otsu(img: &RasterImage) -> RasterImage {
    match otsu_threshold(img) {
        Some(t) => img.map(|p| if p <= t { 0 } else { 255 }),
        None => img.map(|_| 255),
    }
}

/// Peak signal-to-noise ratio in dB; infinite for identical images.
pub fn psnr(a: &RasterImage, b: &RasterImage) -> f64 {
    assert_eq!((a.width(), a.height()), (b.width(), b.height()), "size mismatch");
    let se: f64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
        .sum();
    if se == 0.0 {
        return f64::INFINITY;
    }
    let mse = se / a.pixels().len() as f64;
    10.0 * (255.0f64 * 255.0 / mse).log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DamageKind {
    Blend,
    Noise,
    Compress,
    Distort,
}

impl DamageKind {
    pub const ALL: [DamageKind; 4] = [
        DamageKind::Blend,
        DamageKind::Noise,
        DamageKind::Compress,
        DamageKind::Distort,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DamageKind::Blend => "blend",
            DamageKind::Noise => "noise",
            DamageKind::Compress => "compress",
            DamageKind::Distort => "distort",
        }
    }

    /// Default parameter levels.
    pub fn grid(self) -> &'static [u32] {
        match self {
            DamageKind::Blend => &[20, 40, 60, 80],
            DamageKind::Noise => &[5, 10, 15, 20, 25],
            DamageKind::Compress => &[80, 60, 40, 20, 1],
            DamageKind::Distort => &[10, 20, 30, 40, 50],
        }
    }

    fn valid_range(self) -> (u32, u32) {
        match self {
            DamageKind::Compress => (1, 100),
            _ => (0, 100),
        }
    }
}

impl FromStr for DamageKind {
    type Err = DamageError;
    fn from_str(s: &str) -> Result<Self, DamageError> {
        DamageKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| DamageError::BadLabel(s.to_string()))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DamageError {
    #[error("unrecognized damage label {0:?}")]
    BadLabel(String),
    #[error("{kind} parameter {param} is not on the default grid {grid:?} (pass the off-grid override to allow it)")]
    OffGrid {
        kind: &'static str,
        param: u32,
        grid: &'static [u32],
    },
    #[error("{kind} parameter {param} outside {lo}..={hi}")]
    OutOfRange {
        kind: &'static str,
        param: u32,
        lo: u32,
        hi: u32,
    },
}

/// One damage family at one level. `param` is the JPEG quality, blend
/// percent, noise density percent, or distortion scale x 100.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DamageSpec {
    pub kind: DamageKind,
    pub param: u32,
}

impl DamageSpec {
    pub fn new(kind: DamageKind, param: u32, allow_off_grid: bool) -> Result<Self, DamageError> {
        let spec = DamageSpec { kind, param };
        spec.validate(allow_off_grid)?;
        Ok(spec)
    }

    pub fn validate(&self, allow_off_grid: bool) -> Result<(), DamageError> {
        let kind = self.kind.name();
        let (lo, hi) = self.kind.valid_range();
        if !(lo..=hi).contains(&self.param) {
            return Err(DamageError::OutOfRange { kind, param: self.param, lo, hi });
        }
        if !allow_off_grid && !self.kind.grid().contains(&self.param) {
            return Err(DamageError::OffGrid { kind, param: self.param, grid: self.kind.grid() });
        }
        Ok(())
    }

    /// All 19 default specs, in report column order.
    pub fn default_grid() -> Vec<DamageSpec> {
        DamageKind::ALL
            .into_iter()
            .flat_map(|kind| kind.grid().iter().map(move |&param| DamageSpec { kind, param }))
            .collect()
    }

    /// Subset label, e.g. `blend_40`. Compression is labeled by compression
    /// percentage, `100 - quality`, so quality 80 is `compress_20` and
    /// quality 1 is `compress_99`.
    pub fn label(&self) -> String {
        match self.kind {
            DamageKind::Compress => format!("compress_{}", 100 - self.param.min(100)),
            k => format!("{}_{}", k.name(), self.param),
        }
    }

    /// Parses a subset label back into a spec.
    pub fn from_label(label: &str, allow_off_grid: bool) -> Result<Self, DamageError> {
        let bad = || DamageError::BadLabel(label.to_string());
        let (kind, param) = label.split_once('_').ok_or_else(bad)?;
        let kind: DamageKind = kind.parse().map_err(|_| bad())?;
        if param.is_empty() || !param.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let mut param: u32 = param.parse().map_err(|_| bad())?;
        if kind == DamageKind::Compress {
            param = 100u32.checked_sub(param).ok_or_else(bad)?;
        }
        Self::new(kind, param, allow_off_grid)
    }

    /// Applies the damage. `seed` only affects noise and distortion.
    /// Distortion first widens the white margin to [`DISTORT_PADDING`] if
    /// the image carries less.
    pub fn apply(&self, img: &RasterImage, seed: u64) -> RasterImage {
        let p = self.param.min(100);
        match self.kind {
            DamageKind::Blend => blend_black(img, p as u8),
            DamageKind::Noise => impulse_noise(img, p as u8, seed),
            DamageKind::Compress => jpeg_roundtrip(img, p.max(1) as u8),
            DamageKind::Distort => {
                let margin = white_margin(img);
                let padded = if margin < DISTORT_PADDING {
                    img.pad(DISTORT_PADDING - margin)
                } else {
                    img.clone()
                };
                shepards_distort(&padded, p as f64 / 100.0, seed, DEFAULT_POINTS)
            }
        }
    }
}

impl fmt::Display for DamageSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Smallest distance from a non-white pixel to the image border.
fn white_margin(img: &RasterImage) -> u32 {
    match img.ink_bounds(255) {
        None => img.width().min(img.height()),
        Some((x0, y0, x1, y1)) => x0
            .min(y0)
            .min(img.width() - 1 - x1)
            .min(img.height() - 1 - y1),
    }
}
