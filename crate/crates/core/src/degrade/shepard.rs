//! Inverse-distance-weighted (Shepard) image warp.
//!
//! Positions are continuous image coordinates: pixel `(i, j)` has its center
//! at `(i + 0.5, j + 0.5)`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::render::RasterImage;

pub const EPSILON: f64 = 1e-6;
pub const DEFAULT_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlPair {
    pub source: (f64, f64),
    pub destination: (f64, f64),
}

impl ControlPair {
    fn displacement(&self) -> (f64, f64) {
        (
            self.destination.0 - self.source.0,
            self.destination.1 - self.source.1,
        )
    }
}

/// Backward-mapping displacement field.
#[derive(Debug, Clone, PartialEq)]
pub struct ShepardField {
    pairs: Vec<ControlPair>,
}

impl ShepardField {
    pub fn new(pairs: Vec<ControlPair>) -> Self {
        ShepardField { pairs }
    }

    /// `pairs` plus zero-displacement anchors on the four corner pixel
    /// centers.
    pub fn with_corner_anchors(width: u32, height: u32, mut pairs: Vec<ControlPair>) -> Self {
        let (r, b) = (width as f64 - 0.5, height as f64 - 0.5);
        for c in [(0.5, 0.5), (r, 0.5), (0.5, b), (r, b)] {
            pairs.push(ControlPair { source: c, destination: c });
        }
        ShepardField { pairs }
    }

    /// `n_points` random pairs for a `width` x `height` image, plus corner
    /// anchors. Sources lie in the central 0.3–0.7 band of each axis; each
    /// displacement has length `scale * min(W, H) * U[0.5, 1]` in a uniform
    /// direction.
    pub fn random(width: u32, height: u32, scale: f64, n_points: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, h) = (width as f64, height as f64);
        let pairs = (0..n_points)
            .map(|_| {
                let sx = rng.gen_range(0.3..=0.7) * w;
                let sy = rng.gen_range(0.3..=0.7) * h;
                let mag = scale * w.min(h) * rng.gen_range(0.5..=1.0);
                let angle = rng.gen_range(0.0..std::f64::consts::TAU);
                ControlPair {
                    source: (sx, sy),
                    destination: (sx + mag * angle.cos(), sy + mag * angle.sin()),
                }
            })
            .collect();
        Self::with_corner_anchors(width, height, pairs)
    }

    pub fn pairs(&self) -> &[ControlPair] {
        &self.pairs
    }

    /// Position sampled for output position `(x, y)`. At a control
    /// destination the weight is taken as infinite, so the result is exactly
    /// that pair's source (averaged if several destinations coincide).
    pub fn source_of(&self, x: f64, y: f64) -> (f64, f64) {
        let hits: Vec<&ControlPair> = self
            .pairs
            .iter()
            .filter(|p| p.destination == (x, y))
            .collect();
        if !hits.is_empty() {
            let k = hits.len() as f64;
            let (dx, dy) = hits.iter().fold((0.0, 0.0), |(a, b), p| {
                let d = p.displacement();
                (a + d.0, b + d.1)
            });
            return (x - dx / k, y - dy / k);
        }
        let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
        for p in &self.pairs {
            let (ex, ey) = (x - p.destination.0, y - p.destination.1);
            let wgt = 1.0 / (ex * ex + ey * ey + EPSILON);
            let d = p.displacement();
            sw += wgt;
            sx += wgt * d.0;
            sy += wgt * d.1;
        }
        if sw == 0.0 {
            return (x, y);
        }
        (x - sx / sw, y - sy / sw)
    }

    pub fn apply(&self, img: &RasterImage) -> RasterImage {
        let (w, h) = (img.width(), img.height());
        let mut out = Vec::with_capacity(img.pixels().len());
        for j in 0..h {
            for i in 0..w {
                let (sx, sy) = self.source_of(i as f64 + 0.5, j as f64 + 0.5);
                out.push(sample_bilinear(img, sx, sy));
            }
        }
        RasterImage::new(w, h, out).expect("same dimensions")
    }
}

/// Bilinear sample at a continuous position; white outside the pixel-center
/// hull.
pub fn sample_bilinear(img: &RasterImage, x: f64, y: f64) -> u8 {
    let (fx, fy) = (x - 0.5, y - 0.5);
    let (w, h) = (img.width() as f64, img.height() as f64);
    if !(fx >= 0.0 && fy >= 0.0 && fx <= w - 1.0 && fy <= h - 1.0) {
        return 255;
    }
    let (x0, y0) = (fx.floor(), fy.floor());
    let (tx, ty) = (fx - x0, fy - y0);
    let (x0, y0) = (x0 as u32, y0 as u32);
    let x1 = (x0 + 1).min(img.width() - 1);
    let y1 = (y0 + 1).min(img.height() - 1);
    let p = |x, y| img.get(x, y) as f64;
    let top = p(x0, y0) * (1.0 - tx) + p(x1, y0) * tx;
    let bottom = p(x0, y1) * (1.0 - tx) + p(x1, y1) * tx;
    let v = top * (1.0 - ty) + bottom * ty;
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Random Shepard warp with corner anchors.
pub fn shepards_distort(img: &RasterImage, scale: f64, seed: u64, n_points: usize) -> RasterImage {
    ShepardField::random(img.width(), img.height(), scale, n_points, seed).apply(img)
}
