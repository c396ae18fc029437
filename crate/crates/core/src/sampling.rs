//! Lattice sampling of walkable surfaces at eye height.
//!
//! Lattice points are cell-centered: along each axis the first sample sits at
//! `min + spacing/2` and samples continue while the whole cell fits inside
//! the bounds. A downward ray from `drop_height` finds the support surface;
//! if that first hit is more than `walkable_cutoff` above the lowest surface
//! in the same column, the point is on top of an obstacle and is skipped.

use alloc::vec::Vec;

use crate::geometry::{Bvh, Ray, Vec3, SELF_INTERSECTION_EPSILON};
use crate::{Error, Result};

/// Observer eye height (m).
pub const DEFAULT_EYE_HEIGHT: f64 = 1.7;
pub const DEFAULT_SPACING: f64 = 1.0;
pub const DEFAULT_WALKABLE_CUTOFF: f64 = 0.5;

/// Cap on surfaces traversed per column while looking for the ground.
const MAX_COLUMN_LAYERS: usize = 256;

/// A graph vertex: a sample point at eye height.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Node {
    pub id: u32,
    pub position: Vec3,
}

/// Axis-aligned rectangle in the ground plane.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bounds2 {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Bounds2 {
    pub const fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Bounds2 {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    pub bounds: Bounds2,
    pub spacing: f64,
    pub eye_height: f64,
    /// Altitude the downward rays start from; `None` means one meter above
    /// the top of the scene.
    pub drop_height: Option<f64>,
    pub walkable_cutoff: f64,
}

impl GridSpec {
    pub fn new(bounds: Bounds2, spacing: f64) -> Self {
        GridSpec {
            bounds,
            spacing,
            eye_height: DEFAULT_EYE_HEIGHT,
            drop_height: None,
            walkable_cutoff: DEFAULT_WALKABLE_CUTOFF,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.bounds;
        if ![b.min_x, b.min_y, b.max_x, b.max_y].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite"));
        }
        if !(b.width() > 0.0 && b.height() > 0.0) {
            return Err(Error::InvalidGrid("bounds must have positive width and height"));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::InvalidGrid("spacing must be positive"));
        }
        if !(self.eye_height >= 0.0 && self.eye_height.is_finite()) {
            return Err(Error::InvalidGrid("eye height must be non-negative"));
        }
        if !(self.walkable_cutoff >= 0.0) {
            return Err(Error::InvalidGrid("walkable cutoff must be non-negative"));
        }
        if self.drop_height.is_some_and(|h| !h.is_finite()) {
            return Err(Error::InvalidGrid("drop height must be finite"));
        }
        if self.columns() == 0 || self.rows() == 0 {
            return Err(Error::InvalidGrid("spacing is larger than the bounds"));
        }
        Ok(())
    }

    pub fn columns(&self) -> usize {
        lattice_count(self.bounds.width(), self.spacing)
    }

    pub fn rows(&self) -> usize {
        lattice_count(self.bounds.height(), self.spacing)
    }

    /// Ground-plane coordinates of lattice point `(col, row)`.
    pub fn lattice_point(&self, col: usize, row: usize) -> (f64, f64) {
        (
            self.bounds.min_x + (col as f64 + 0.5) * self.spacing,
            self.bounds.min_y + (row as f64 + 0.5) * self.spacing,
        )
    }

    /// Lattice cell whose sample point is `(x, y)`, if `(x, y)` is one
    /// (within 10⁻⁶ of the spacing).
    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fx = (x - self.bounds.min_x) / self.spacing - 0.5;
        let fy = (y - self.bounds.min_y) / self.spacing - 0.5;
        let (cx, cy) = (libm::round(fx), libm::round(fy));
        let on_lattice = (fx - cx).abs() <= 1e-6 && (fy - cy).abs() <= 1e-6;
        let in_range = cx >= 0.0
            && cy >= 0.0
            && (cx as usize) < self.columns()
            && (cy as usize) < self.rows();
        (on_lattice && in_range).then_some((cx as usize, cy as usize))
    }

    fn resolved_drop_height(&self, bvh: &Bvh) -> f64 {
        self.drop_height.unwrap_or_else(|| bvh.bounds().max.z + 1.0)
    }
}

fn lattice_count(extent: f64, spacing: f64) -> usize {
    let n = libm::floor(extent / spacing + 1e-9);
    if n.is_finite() && n > 0.0 {
        n as usize
    } else {
        0
    }
}

/// Samples every lattice point in row-major order (rows along +y, columns
/// along +x) and numbers the surviving nodes densely from 0.
pub fn generate_grid(spec: &GridSpec, bvh: &Bvh) -> Result<Vec<Node>> {
    spec.validate()?;
    let positions = (0..spec.rows()).flat_map(|row| sample_row(spec, bvh, row));
    number_nodes(positions)
}

/// Eye-height positions for one lattice row, in column order.
///
/// Rows are independent, so callers may sample them concurrently and pass the
/// concatenation to [`number_nodes`].
pub fn sample_row(spec: &GridSpec, bvh: &Bvh, row: usize) -> Vec<Vec3> {
    let drop = spec.resolved_drop_height(bvh);
    (0..spec.columns())
        .filter_map(|col| {
            let (x, y) = spec.lattice_point(col, row);
            support_height(bvh, x, y, drop, spec.walkable_cutoff)
                .map(|z| Vec3::new(x, y, z + spec.eye_height))
        })
        .collect()
}

/// Assigns dense ids in iteration order; errors if nothing was sampled.
pub fn number_nodes<I: IntoIterator<Item = Vec3>>(positions: I) -> Result<Vec<Node>> {
    let nodes: Vec<Node> = positions
        .into_iter()
        .enumerate()
        .map(|(i, position)| Node {
            id: i as u32,
            position,
        })
        .collect();
    if nodes.is_empty() {
        Err(Error::EmptyGrid)
    } else {
        Ok(nodes)
    }
}

/// Height of the walkable surface under `(x, y)`, or `None` over void or an
/// obstacle top.
pub fn support_height(bvh: &Bvh, x: f64, y: f64, drop_height: f64, cutoff: f64) -> Option<f64> {
    let origin = Vec3::new(x, y, drop_height);
    let first = bvh.closest_hit(&Ray::new(origin, Vec3::DOWN), 0.0, f64::INFINITY)?;
    let top = surface_height(bvh, first.triangle, x, y).unwrap_or(drop_height - first.distance);

    let mut lowest = top;
    let mut z = top;
    for _ in 0..MAX_COLUMN_LAYERS {
        let ray = Ray::new(Vec3::new(x, y, z), Vec3::DOWN);
        match bvh.closest_hit(&ray, SELF_INTERSECTION_EPSILON, f64::INFINITY) {
            Some(hit) => {
                z -= hit.distance;
                lowest = lowest.min(z);
            }
            None => break,
        }
    }
    (top - lowest <= cutoff).then_some(top)
}

/// Height of the plane of `triangle` above `(x, y)`; exact for horizontal
/// triangles. `None` for vertical ones.
fn surface_height(bvh: &Bvh, triangle: u32, x: f64, y: f64) -> Option<f64> {
    let t = bvh.mesh().triangle(triangle as usize);
    let n = (t.b - t.a).cross(t.c - t.a);
    if n.z == 0.0 {
        return None;
    }
    Some(t.a.z - (n.x * (x - t.a.x) + n.y * (y - t.a.y)) / n.z)
}
