//! Score heatmaps as binary PPM (`P6`) images.
//!
//! One pixel per lattice cell, north (+y) up, east (+x) right. Scores are
//! scaled to `t ∈ [0, 1]` by a min/max range and colored by linear
//! interpolation between [`RAMP`] control points, a dark-to-light ramp whose
//! relative luminance rises monotonically. Cells without a node are painted
//! [`NO_NODE`], which the ramp never produces. When every score is equal the
//! whole image uses the color at `t = 0.5`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use weathervis_core::{GridSpec, Node};

use crate::config::ScaleMode;
use crate::error::{Error, Result};

pub type Rgb = [u8; 3];

/// `(t, [r, g, b])` control points, placed on exact levels.
pub const RAMP: [(f64, Rgb); 5] = [
    (0.0, [68, 1, 84]),
    (64.0 / 255.0, [59, 82, 139]),
    (128.0 / 255.0, [33, 145, 140]),
    (192.0 / 255.0, [94, 201, 98]),
    (1.0, [253, 231, 37]),
];

pub const NO_NODE: Rgb = [255, 255, 255];

/// Relative luminance weights for sRGB components.
pub fn luminance(c: Rgb) -> f64 {
    0.2126 * c[0] as f64 + 0.7152 * c[1] as f64 + 0.0722 * c[2] as f64
}

/// Number of distinct ramp colors.
pub const LEVELS: usize = 256;

/// Ramp color at `t`, clamped to `[0, 1]` and snapped to one of [`LEVELS`]
/// levels. Luminance never decreases from level to level.
pub fn ramp_color(t: f64) -> Rgb {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    let top = (LEVELS - 1) as f64;
    let t = (t * top).round() / top;
    let k = RAMP
        .windows(2)
        .position(|w| t <= w[1].0)
        .unwrap_or(RAMP.len() - 2);
    let ((t0, c0), (t1, c1)) = (RAMP[k], RAMP[k + 1]);
    let f = (t - t0) / (t1 - t0);
    std::array::from_fn(|i| (c0[i] as f64 + f * (c1[i] as f64 - c0[i] as f64)).round() as u8)
}

/// Min and max over finite values; `(0, 0)` when there are none.
pub fn value_range(values: &[f64]) -> (f64, f64) {
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if lo > hi {
        (0.0, 0.0)
    } else {
        (lo, hi)
    }
}

/// Union of several ranges.
pub fn shared_range(ranges: &[(f64, f64)]) -> (f64, f64) {
    ranges
        .iter()
        .copied()
        .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
        .unwrap_or((0.0, 0.0))
}

pub fn normalize(value: f64, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        (value - lo) / (hi - lo)
    } else {
        0.5
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    /// Row-major from the top (north) row.
    pub pixels: Vec<Rgb>,
}

impl Raster {
    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }
}

/// Image position `(x, y)` of every node. Fails unless each node sits on a
/// distinct lattice point of `spec`.
pub fn lattice_pixels(spec: &GridSpec, nodes: &[Node]) -> Result<Vec<(usize, usize)>> {
    let (w, h) = (spec.columns(), spec.rows());
    let mut taken = vec![false; w * h];
    nodes
        .iter()
        .map(|n| {
            let (col, row) = spec.cell_of(n.position.x, n.position.y).ok_or_else(|| {
                Error::NotLattice(format!(
                    "node {} at ({}, {}) is not a lattice point",
                    n.id, n.position.x, n.position.y
                ))
            })?;
            let (x, y) = (col, h - 1 - row);
            if std::mem::replace(&mut taken[y * w + x], true) {
                return Err(Error::NotLattice(format!(
                    "node {} shares lattice cell ({col}, {row}) with another node",
                    n.id
                )));
            }
            Ok((x, y))
        })
        .collect()
}

pub fn render(spec: &GridSpec, nodes: &[Node], values: &[f64], range: (f64, f64)) -> Result<Raster> {
    if nodes.len() != values.len() {
        return Err(Error::NotLattice(format!(
            "{} scores for {} nodes",
            values.len(),
            nodes.len()
        )));
    }
    let (width, height) = (spec.columns(), spec.rows());
    let mut pixels = vec![NO_NODE; width * height];
    for ((x, y), &v) in lattice_pixels(spec, nodes)?.into_iter().zip(values) {
        pixels[y * width + x] = ramp_color(normalize(v, range));
    }
    Ok(Raster {
        width,
        height,
        pixels,
    })
}

pub fn write_ppm(out: &mut impl Write, raster: &Raster) -> std::io::Result<()> {
    write!(out, "P6\n{} {}\n255\n", raster.width, raster.height)?;
    let bytes: Vec<u8> = raster.pixels.iter().flatten().copied().collect();
    out.write_all(&bytes)
}

/// Reads the `P6` files written by [`write_ppm`] (no comments, maxval 255).
pub fn read_ppm(mut input: impl Read) -> std::io::Result<Raster> {
    let bad = |m: &str| std::io::Error::new(std::io::ErrorKind::InvalidData, m.to_string());
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header"))?.to_string());
    }
    pos += 1;
    if fields[0] != "P6" || fields[3] != "255" {
        return Err(bad("not an 8-bit P6 image"));
    }
    let width: usize = fields[1].parse().map_err(|_| bad("width"))?;
    let height: usize = fields[2].parse().map_err(|_| bad("height"))?;
    let data = bytes.get(pos..).ok_or_else(|| bad("truncated"))?;
    if data.len() != width * height * 3 {
        return Err(bad("pixel data length"));
    }
    Ok(Raster {
        width,
        height,
        pixels: data.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
    })
}

/// Written next to every image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub metric: String,
    pub condition: String,
    pub scale: ScaleMode,
    pub min: f64,
    pub max: f64,
    pub width: usize,
    pub height: usize,
    /// Ground coordinates of the image's south-west corner and the cell size.
    pub origin: [f64; 2],
    pub cell_size: f64,
    pub orientation: String,
    pub ramp: Vec<(f64, Rgb)>,
    pub no_node_color: Rgb,
}

impl Sidecar {
    pub fn new(metric: &str, condition: &str, scale: ScaleMode, range: (f64, f64), spec: &GridSpec) -> Sidecar {
        Sidecar {
            metric: metric.into(),
            condition: condition.into(),
            scale,
            min: range.0,
            max: range.1,
            width: spec.columns(),
            height: spec.rows(),
            origin: [spec.bounds.min_x, spec.bounds.min_y],
            cell_size: spec.spacing,
            orientation: "north-up".into(),
            ramp: RAMP.to_vec(),
            no_node_color: NO_NODE,
        }
    }
}
