//! Skeletal-formula rasterizer working from the molfile's 2D coordinates.
//!
//! Geometry is scaled so the median bond is `scale` pixels long. Strokes are
//! drawn by testing pixel centers against half-open bands with butt caps, so
//! output is strictly black/white and bit-reproducible.

pub mod font;
mod raster;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chemgraph::element::default_valence;
use crate::chemgraph::{BondOrder, Molecule};

pub use raster::{RasterError, RasterImage};

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("cannot render an empty molecule")]
    Empty,
    #[error("degenerate geometry: all {0} atoms share the same coordinates")]
    Degenerate(usize),
    #[error("invalid render options: {0}")]
    InvalidOptions(String),
    #[error("nothing to draw")]
    NoInk,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderOptions {
    /// Pixels per median bond length.
    pub scale: f64,
    pub stroke_width: f64,
    pub padding: u32,
    /// Leave uncharged, bonded carbons unlabeled.
    pub label_hetero_only: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            scale: 50.0,
            stroke_width: 2.0,
            padding: 30,
            label_hetero_only: true,
        }
    }
}

impl RenderOptions {
    fn validate(&self) -> Result<(), RenderError> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(RenderError::InvalidOptions(format!(
                "scale must be positive, got {}",
                self.scale
            )));
        }
        if !(self.stroke_width.is_finite() && self.stroke_width > 0.0) {
            return Err(RenderError::InvalidOptions(format!(
                "stroke width must be positive, got {}",
                self.stroke_width
            )));
        }
        Ok(())
    }

    /// Side of one font cell in pixels; labels scale with the drawing.
    pub fn font_cell(&self) -> f64 {
        (self.scale * 0.06).max(1.0)
    }
}

#[derive(Debug, Clone, Copy)]
struct Pt {
    x: f64,
    y: f64,
}

impl Pt {
    fn sub(self, o: Pt) -> Pt {
        Pt { x: self.x - o.x, y: self.y - o.y }
    }
    fn add(self, o: Pt) -> Pt {
        Pt { x: self.x + o.x, y: self.y + o.y }
    }
    fn mul(self, k: f64) -> Pt {
        Pt { x: self.x * k, y: self.y * k }
    }
    fn dot(self, o: Pt) -> f64 {
        self.x * o.x + self.y * o.y
    }
    fn len(self) -> f64 {
        self.dot(self).sqrt()
    }
}

/// Axis-aligned box in canvas pixels: `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy)]
struct LabelBox {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

impl LabelBox {
    /// Distance from `p` (inside the box) along unit `u` to the box edge.
    fn exit_distance(&self, p: Pt, u: Pt) -> f64 {
        let along = |lo: f64, hi: f64, c: f64, d: f64| {
            if d > 1e-12 {
                (hi - c) / d
            } else if d < -1e-12 {
                (c - lo) / -d
            } else {
                f64::INFINITY
            }
        };
        along(self.x0, self.x1, p.x, u.x)
            .min(along(self.y0, self.y1, p.y, u.y))
            .max(0.0)
    }
}

/// Primitive in canvas pixels. Everything is rasterized by testing pixel
/// centers, half-open on the far side.
#[derive(Debug, Clone, Copy)]
enum Shape {
    /// Band of width `w` centered on p→q, with butt caps.
    Band { p: Pt, q: Pt, w: f64 },
    Disk { c: Pt, r: f64 },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
}

impl Shape {
    fn bounds(&self) -> (f64, f64, f64, f64) {
        match *self {
            Shape::Band { p, q, w } => {
                let d = q.sub(p);
                let n = Pt { x: -d.y, y: d.x }.mul(w / 2.0 / d.len());
                let corners = [p.add(n), p.sub(n), q.add(n), q.sub(n)];
                corners.iter().fold(
                    (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
                    |(a, b, c, e), k| (a.min(k.x), b.min(k.y), c.max(k.x), e.max(k.y)),
                )
            }
            Shape::Disk { c, r } => (c.x - r, c.y - r, c.x + r, c.y + r),
            Shape::Rect { x0, y0, x1, y1 } => (x0, y0, x1, y1),
        }
    }

    fn translated(&self, o: Pt) -> Shape {
        match *self {
            Shape::Band { p, q, w } => Shape::Band { p: p.add(o), q: q.add(o), w },
            Shape::Disk { c, r } => Shape::Disk { c: c.add(o), r },
            Shape::Rect { x0, y0, x1, y1 } => Shape::Rect {
                x0: x0 + o.x,
                y0: y0 + o.y,
                x1: x1 + o.x,
                y1: y1 + o.y,
            },
        }
    }

    fn covers(&self, c: Pt) -> bool {
        match *self {
            Shape::Band { p, q, w } => {
                let d = q.sub(p);
                let len = d.len();
                let u = d.mul(1.0 / len);
                let n = Pt { x: -u.y, y: u.x };
                let v = c.sub(p);
                let (t, s) = (v.dot(u), v.dot(n));
                (0.0..len).contains(&t) && s >= -w / 2.0 && s < w / 2.0
            }
            Shape::Disk { c: o, r } => {
                let v = c.sub(o);
                v.dot(v) < r * r
            }
            Shape::Rect { x0, y0, x1, y1 } => c.x >= x0 && c.x < x1 && c.y >= y0 && c.y < y1,
        }
    }
}

fn rasterize(shapes: &[Shape], width: u32, height: u32) -> RasterImage {
    let (w, h) = (width as usize, height as usize);
    let mut px = vec![255u8; w * h];
    for s in shapes {
        let (x0, y0, x1, y1) = s.bounds();
        let xa = (x0.floor().max(0.0) as usize).min(w);
        let xb = ((x1.ceil() + 1.0).max(0.0) as usize).min(w);
        let ya = (y0.floor().max(0.0) as usize).min(h);
        let yb = ((y1.ceil() + 1.0).max(0.0) as usize).min(h);
        for y in ya..yb {
            for x in xa..xb {
                if s.covers(Pt { x: x as f64 + 0.5, y: y as f64 + 0.5 }) {
                    px[y * w + x] = 0;
                }
            }
        }
    }
    RasterImage::new(width, height, px).expect("canvas size")
}

/// One filled square per set font bit, `cell` pixels on a side.
fn text_shapes(out: &mut Vec<Shape>, left: f64, top: f64, text: &str, cell: f64) {
    for (i, ch) in text.chars().enumerate() {
        let Some(rows) = font::glyph(ch) else { continue };
        let gx = left + (i as u32 * font::ADVANCE) as f64 * cell;
        for (ry, bits) in rows.iter().enumerate() {
            for cx in 0..font::GLYPH_WIDTH {
                if bits >> (font::GLYPH_WIDTH - 1 - cx) & 1 == 1 {
                    let x0 = gx + cx as f64 * cell;
                    let y0 = top + ry as f64 * cell;
                    out.push(Shape::Rect { x0, y0, x1: x0 + cell, y1: y0 + cell });
                }
            }
        }
    }
}

/// Hydrogens implied by the default valence, adjusted for formal charge.
fn implicit_hydrogens(m: &Molecule, atom: usize, adj: &[Vec<(usize, usize)>]) -> u32 {
    let a = &m.atoms()[atom];
    let Some(v) = default_valence(&a.element) else {
        return 0;
    };
    let c = a.charge as i32;
    let valence = match a.element.as_str() {
        "N" | "P" | "O" | "S" | "Se" | "As" => v as i32 + c,
        _ => v as i32 - c.abs(),
    };
    let half: u32 = adj[atom]
        .iter()
        .map(|&(_, b)| m.bonds()[b].order.half_valence())
        .sum();
    (valence - half.div_ceil(2) as i32).max(0) as u32
}

fn label_text(m: &Molecule, atom: usize, adj: &[Vec<(usize, usize)>]) -> String {
    let a = &m.atoms()[atom];
    let mut s = a.element.clone();
    match implicit_hydrogens(m, atom, adj) {
        0 => {}
        1 => s.push('H'),
        n => {
            s.push('H');
            s.push_str(&n.to_string());
        }
    }
    let c = a.charge;
    if c != 0 {
        if c.abs() > 1 {
            s.push_str(&c.abs().to_string());
        }
        s.push(if c > 0 { '+' } else { '-' });
    }
    s
}

/// Chooses which aromatic bonds to draw as double: a maximum matching on the
/// aromatic subgraph found by bounded backtracking.
fn kekule_doubles(m: &Molecule) -> Vec<bool> {
    let n = m.atom_count();
    let arom: Vec<usize> = (0..m.bond_count())
        .filter(|&i| m.bonds()[i].order == BondOrder::Aromatic)
        .collect();
    let mut doubles = vec![false; m.bond_count()];
    if arom.is_empty() {
        return doubles;
    }
    let mut inc: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &i in &arom {
        inc[m.bonds()[i].a].push(i);
        inc[m.bonds()[i].b].push(i);
    }
    let atoms: Vec<usize> = (0..n).filter(|&v| !inc[v].is_empty()).collect();

    struct Search<'a> {
        m: &'a Molecule,
        inc: &'a [Vec<usize>],
        atoms: &'a [usize],
        used: Vec<bool>,
        chosen: Vec<usize>,
        best: Vec<usize>,
        budget: u32,
    }
    impl Search<'_> {
        fn go(&mut self, k: usize) {
            if self.budget == 0 || self.best.len() * 2 == self.atoms.len() {
                return;
            }
            self.budget -= 1;
            if self.chosen.len() > self.best.len() {
                self.best = self.chosen.clone();
            }
            if k == self.atoms.len() {
                return;
            }
            // bound: can't beat best even matching all remaining atoms
            if self.chosen.len() + (self.atoms.len() - k) / 2 <= self.best.len() {
                return;
            }
            let v = self.atoms[k];
            if !self.used[v] {
                for &b in &self.inc[v] {
                    let w = self.m.bonds()[b].other(v);
                    if !self.used[w] {
                        self.used[v] = true;
                        self.used[w] = true;
                        self.chosen.push(b);
                        self.go(k + 1);
                        self.chosen.pop();
                        self.used[v] = false;
                        self.used[w] = false;
                    }
                }
            }
            self.go(k + 1);
        }
    }

    let mut s = Search {
        m,
        inc: &inc,
        atoms: &atoms,
        used: vec![false; n],
        chosen: Vec::new(),
        best: Vec::new(),
        budget: 200_000,
    };
    s.go(0);
    for b in s.best {
        doubles[b] = true;
    }
    doubles
}

/// Atoms of the smallest ring through bond `bi`, if it is a ring bond.
fn smallest_ring(m: &Molecule, adj: &[Vec<(usize, usize)>], bi: usize) -> Option<Vec<usize>> {
    let bond = &m.bonds()[bi];
    let mut prev = vec![usize::MAX; m.atom_count()];
    prev[bond.a] = bond.a;
    let mut queue = VecDeque::from([bond.a]);
    while let Some(v) = queue.pop_front() {
        for &(w, b) in &adj[v] {
            if b == bi || prev[w] != usize::MAX {
                continue;
            }
            prev[w] = v;
            if w == bond.b {
                let mut ring = vec![w];
                let mut cur = w;
                while cur != bond.a {
                    cur = prev[cur];
                    ring.push(cur);
                }
                return Some(ring);
            }
            queue.push_back(w);
        }
    }
    None
}

fn median_bond_length(m: &Molecule) -> Option<f64> {
    let mut lens: Vec<f64> = m
        .bonds()
        .iter()
        .map(|b| {
            let (p, q) = (&m.atoms()[b.a], &m.atoms()[b.b]);
            ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt()
        })
        .filter(|l| *l > 1e-9)
        .collect();
    if lens.is_empty() {
        return None;
    }
    lens.sort_by(f64::total_cmp);
    Some(lens[(lens.len() - 1) / 2])
}

/// Draws `m` as a black-on-white skeletal formula.
pub fn render(m: &Molecule, opts: &RenderOptions) -> Result<RasterImage, RenderError> {
    opts.validate()?;
    let n = m.atom_count();
    if n == 0 {
        return Err(RenderError::Empty);
    }
    let atoms = m.atoms();
    let (mut minx, mut maxx) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut miny, mut maxy) = (f64::INFINITY, f64::NEG_INFINITY);
    for a in atoms {
        minx = minx.min(a.x);
        maxx = maxx.max(a.x);
        miny = miny.min(a.y);
        maxy = maxy.max(a.y);
    }
    if n > 1 && maxx - minx <= 1e-9 && maxy - miny <= 1e-9 {
        return Err(RenderError::Degenerate(n));
    }
    let f = opts.scale / median_bond_length(m).unwrap_or(1.0);
    let cell = opts.font_cell();
    let w = opts.stroke_width;
    let adj = m.adjacency();

    let labels: Vec<Option<String>> = (0..n)
        .map(|i| {
            let a = &atoms[i];
            let show = !opts.label_hetero_only
                || a.element != "C"
                || a.charge != 0
                || adj[i].is_empty();
            show.then(|| label_text(m, i, &adj))
        })
        .collect();

    let pos: Vec<Pt> = atoms
        .iter()
        .map(|a| Pt {
            x: (a.x - minx) * f,
            y: (maxy - a.y) * f,
        })
        .collect();

    let mut shapes = Vec::new();
    let mut boxes: Vec<Option<LabelBox>> = vec![None; n];
    for i in 0..n {
        let Some(text) = &labels[i] else { continue };
        // first glyph centered on the atom
        let left = pos[i].x - 2.5 * cell;
        let top = pos[i].y - 3.5 * cell;
        text_shapes(&mut shapes, left, top, text, cell);
        boxes[i] = Some(LabelBox {
            x0: left - cell,
            y0: top - cell,
            x1: left + font::text_cells(text) as f64 * cell + cell,
            y1: top + font::GLYPH_HEIGHT as f64 * cell + cell,
        });
    }

    let doubles = kekule_doubles(m);
    for (bi, bond) in m.bonds().iter().enumerate() {
        let (p, q) = (pos[bond.a], pos[bond.b]);
        let d = q.sub(p);
        let len = d.len();
        if len <= 1e-9 {
            continue;
        }
        let u = d.mul(1.0 / len);
        let nrm = Pt { x: -u.y, y: u.x };
        let t0 = boxes[bond.a].map_or(0.0, |b| b.exit_distance(p, u));
        let t1 = len - boxes[bond.b].map_or(0.0, |b| b.exit_distance(q, u.mul(-1.0)));
        let mut line = |off: f64, shrink: f64| {
            let (a, b) = (t0 + shrink, t1 - shrink);
            if b - a > 1e-9 {
                let o = nrm.mul(off);
                shapes.push(Shape::Band {
                    p: p.add(u.mul(a)).add(o),
                    q: p.add(u.mul(b)).add(o),
                    w,
                });
            }
        };
        let order = match bond.order {
            BondOrder::Aromatic if doubles[bi] => BondOrder::Double,
            BondOrder::Aromatic => BondOrder::Single,
            o => o,
        };
        let spacing = 0.15 * len;
        match order {
            BondOrder::Single | BondOrder::Aromatic => line(0.0, 0.0),
            BondOrder::Double => match smallest_ring(m, &adj, bi) {
                Some(ring) => {
                    let c = ring
                        .iter()
                        .fold(Pt { x: 0.0, y: 0.0 }, |acc, &v| acc.add(pos[v]))
                        .mul(1.0 / ring.len() as f64);
                    let side = if c.sub(p).dot(nrm) >= 0.0 { 1.0 } else { -1.0 };
                    line(0.0, 0.0);
                    line(side * spacing, 0.1 * len);
                }
                None => {
                    line(-spacing / 2.0, 0.0);
                    line(spacing / 2.0, 0.0);
                }
            },
            BondOrder::Triple => {
                line(-spacing, 0.0);
                line(0.0, 0.0);
                line(spacing, 0.0);
            }
        }
    }
    for i in 0..n {
        if boxes[i].is_none() && adj[i].len() >= 2 {
            shapes.push(Shape::Disk { c: pos[i], r: w / 2.0 });
        }
    }
    if shapes.is_empty() {
        return Err(RenderError::NoInk);
    }

    // Lay the drawing's exact extent out at `padding` from the top-left
    // corner; the image is that extent rounded up plus padding all round.
    let (x0, y0, x1, y1) = shapes.iter().map(Shape::bounds).fold(
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), (e, g, h, k)| (a.min(e), b.min(g), c.max(h), d.max(k)),
    );
    let pad = opts.padding as f64;
    let offset = Pt { x: pad - x0, y: pad - y0 };
    let width = (x1 - x0).ceil().max(1.0) as u32 + 2 * opts.padding;
    let height = (y1 - y0).ceil().max(1.0) as u32 + 2 * opts.padding;
    let shapes: Vec<Shape> = shapes.iter().map(|s| s.translated(offset)).collect();
    Ok(rasterize(&shapes, width, height))
}
