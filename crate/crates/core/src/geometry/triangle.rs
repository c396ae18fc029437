use robust::{orient3d, Coord3D};

use super::{Aabb, Vec3};

/// A triangle with its three corner positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub a: Vec3,
    pub b: Vec3,
    pub c: Vec3,
}

impl Triangle {
    pub fn new(a: Vec3, b: Vec3, c: Vec3) -> Self {
        Triangle { a, b, c }
    }

    pub fn area(&self) -> f64 {
        0.5 * (self.b - self.a).cross(self.c - self.a).length()
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::EMPTY.grow(self.a).grow(self.b).grow(self.c)
    }

    pub fn centroid(&self) -> Vec3 {
        (self.a + self.b + self.c) * (1.0 / 3.0)
    }

    /// Watertight ray/triangle test (Woop, Benthin and Wald 2013).
    ///
    /// Returns the hit distance when it lies in `(t_min, t_max]`. Edges shared
    /// by two triangles are reported by at least one of them, so rays cannot
    /// leak through the seams of a closed mesh.
    #[inline]
    pub fn intersect(&self, ray: &Ray, t_min: f64, t_max: f64) -> Option<f64> {
        match self.crossing(ray, t_min, t_max, false) {
            Crossing::Hit(t) => Some(t),
            _ => None,
        }
    }

    /// Like [`Triangle::intersect`], but reports [`Crossing::Uncertain`] when
    /// the ray passes so close to an edge or vertex that rounding could decide
    /// the outcome.
    #[inline]
    pub fn classify(&self, ray: &Ray, t_min: f64, t_max: f64) -> Crossing {
        self.crossing(ray, t_min, t_max, true)
    }

    #[inline]
    fn crossing(&self, ray: &Ray, t_min: f64, t_max: f64, flag_near_edges: bool) -> Crossing {
        let (kx, ky, kz) = (ray.kx, ray.ky, ray.kz);
        let a = self.a - ray.origin;
        let b = self.b - ray.origin;
        let c = self.c - ray.origin;

        let ax = a[kx] - ray.shear_x * a[kz];
        let ay = a[ky] - ray.shear_y * a[kz];
        let bx = b[kx] - ray.shear_x * b[kz];
        let by = b[ky] - ray.shear_y * b[kz];
        let cx = c[kx] - ray.shear_x * c[kz];
        let cy = c[ky] - ray.shear_y * c[kz];

        let u = cx * by - cy * bx;
        let v = ax * cy - ay * cx;
        let w = bx * ay - by * ax;

        if flag_near_edges {
            // an edge function within rounding of zero may take either sign;
            // the rounding scales with the unsheared vertex offsets
            let shear = ray.shear_x.abs() + ray.shear_y.abs();
            let size = |p: Vec3| p[kx].abs() + p[ky].abs() + shear * p[kz].abs();
            let (sa, sb, sc) = (size(a), size(b), size(c));
            let near = |f: f64, s: f64| f.abs() <= EDGE_TOLERANCE * s;
            let nu = near(u, sb * sc);
            let nv = near(v, sa * sc);
            let nw = near(w, sa * sb);
            if nu || nv || nw {
                let clear = [(u, nu), (v, nv), (w, nw)];
                let all_ge = clear.iter().all(|&(f, n)| n || f > 0.0);
                let all_le = clear.iter().all(|&(f, n)| n || f < 0.0);
                return if all_ge || all_le {
                    Crossing::Uncertain
                } else {
                    Crossing::Miss
                };
            }
        }

        if (u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0) {
            return Crossing::Miss;
        }
        let det = u + v + w;
        if det == 0.0 {
            return Crossing::Miss;
        }

        let az = ray.shear_z * a[kz];
        let bz = ray.shear_z * b[kz];
        let cz = ray.shear_z * c[kz];
        let t = (u * az + v * bz + w * cz) / det;
        if t > t_min && t <= t_max {
            Crossing::Hit(t)
        } else {
            Crossing::Miss
        }
    }

    /// Exact test of the segment `p → q` against the closed triangle, using
    /// adaptive-precision orientation predicates on the original
    /// coordinates. The crossing must lie strictly between `t_min` and
    /// `t_max` (distances from `p`); a segment in the triangle's plane does
    /// not count.
    pub fn segment_crosses_exact(&self, p: Vec3, q: Vec3, t_min: f64, t_max: f64) -> bool {
        let o = |a: Vec3, b: Vec3, c: Vec3, d: Vec3| {
            let pt = |v: Vec3| Coord3D { x: v.x, y: v.y, z: v.z };
            orient3d(pt(a), pt(b), pt(c), pt(d))
        };
        let sp = o(self.a, self.b, self.c, p);
        let sq = o(self.a, self.b, self.c, q);
        if (sp > 0.0 && sq > 0.0) || (sp < 0.0 && sq < 0.0) || (sp == 0.0 && sq == 0.0) {
            return false;
        }
        let e1 = o(p, q, self.a, self.b);
        let e2 = o(p, q, self.b, self.c);
        let e3 = o(p, q, self.c, self.a);
        let inside = (e1 >= 0.0 && e2 >= 0.0 && e3 >= 0.0) || (e1 <= 0.0 && e2 <= 0.0 && e3 <= 0.0);
        let t = sp / (sp - sq) * p.distance(q);
        inside && t > t_min && t < t_max
    }
}

/// Relative size below which an edge function is treated as undetermined.
const EDGE_TOLERANCE: f64 = 1e-9;

/// Result of [`Triangle::classify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossing {
    Hit(f64),
    Miss,
    /// Too close to an edge or vertex to decide in floating point.
    Uncertain,
}

/// A ray prepared for repeated triangle and box tests.
#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
    pub(crate) inv_direction: Vec3,
    kx: usize,
    ky: usize,
    kz: usize,
    shear_x: f64,
    shear_y: f64,
    shear_z: f64,
}

impl Ray {
    /// `direction` is expected to be unit length; distances reported by the
    /// intersection routines are in units of `direction`.
    pub fn new(origin: Vec3, direction: Vec3) -> Ray {
        let abs = Vec3::new(direction.x.abs(), direction.y.abs(), direction.z.abs());
        let kz = if abs.x >= abs.y && abs.x >= abs.z {
            0
        } else if abs.y >= abs.z {
            1
        } else {
            2
        };
        let mut kx = (kz + 1) % 3;
        let mut ky = (kx + 1) % 3;
        if direction[kz] < 0.0 {
            core::mem::swap(&mut kx, &mut ky);
        }
        Ray {
            origin,
            direction,
            inv_direction: Vec3::new(1.0 / direction.x, 1.0 / direction.y, 1.0 / direction.z),
            kx,
            ky,
            kz,
            shear_x: direction[kx] / direction[kz],
            shear_y: direction[ky] / direction[kz],
            shear_z: 1.0 / direction[kz],
        }
    }
}
