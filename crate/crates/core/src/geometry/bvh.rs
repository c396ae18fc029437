use alloc::vec::Vec;

use super::{
    Aabb, Crossing, Ray, RayHit, Triangle, TriangleMesh, Vec3, DIRECTION_TOLERANCE,
    SELF_INTERSECTION_EPSILON,
};
use crate::{Error, Result};

const BINS: usize = 16;
const MAX_LEAF: usize = 4;
const MAX_DEPTH: usize = 60;
const TRAVERSAL_COST: f64 = 1.0;

#[derive(Debug, Clone, Copy)]
struct Node {
    bounds: Aabb,
    /// Leaf: first entry in `order`. Interior: index of the second child (the
    /// first child always follows its parent).
    index: u32,
    /// Number of triangles for a leaf, zero for interior nodes.
    count: u32,
}

/// Bounding volume hierarchy over a [`TriangleMesh`].
///
/// Built once with a binned surface-area heuristic, then immutable; every
/// query takes `&self`, so a `Bvh` can be shared freely across threads.
#[derive(Debug, Clone)]
pub struct Bvh {
    mesh: TriangleMesh,
    nodes: Vec<Node>,
    /// Triangle ids in leaf order.
    order: Vec<u32>,
    /// Triangles in leaf order, parallel to `order`.
    triangles: Vec<Triangle>,
}

struct BuildRef {
    bounds: Aabb,
    centroid: Vec3,
    id: u32,
}

impl Bvh {
    pub fn build(mesh: TriangleMesh) -> Result<Bvh> {
        if mesh.triangle_count() == 0 {
            return Err(Error::EmptyMesh);
        }
        let mut refs: Vec<BuildRef> = mesh
            .iter_triangles()
            .enumerate()
            .map(|(i, t)| BuildRef {
                bounds: t.bounds(),
                centroid: t.centroid(),
                id: i as u32,
            })
            .collect();

        let root = refs.iter().fold(Aabb::EMPTY, |b, r| b.union(r.bounds));
        let scale = 1.0 + root.min.x.abs().max(root.min.y.abs()).max(root.min.z.abs())
            + root.max.x.abs().max(root.max.y.abs()).max(root.max.z.abs());
        let mut builder = Builder {
            nodes: Vec::with_capacity(2 * refs.len()),
            pad: 1e-9 * scale,
        };
        let len = refs.len();
        builder.subdivide(&mut refs, 0, len, 0);

        let order: Vec<u32> = refs.iter().map(|r| r.id).collect();
        let triangles = order.iter().map(|&i| mesh.triangle(i as usize)).collect();
        Ok(Bvh {
            mesh,
            nodes: builder.nodes,
            order,
            triangles,
        })
    }

    pub fn mesh(&self) -> &TriangleMesh {
        &self.mesh
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes[0].bounds
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Closest hit with distance in `(ε_self, max_distance]`.
    ///
    /// `direction` must be unit length within 1e-6.
    pub fn raycast(
        &self,
        origin: Vec3,
        direction: Vec3,
        max_distance: Option<f64>,
    ) -> Result<Option<RayHit>> {
        if !origin.is_finite() {
            return Err(Error::NonFiniteOrigin);
        }
        let length = direction.length();
        if !((length - 1.0).abs() <= DIRECTION_TOLERANCE) {
            return Err(Error::NonNormalizedDirection { length });
        }
        let max = max_distance.unwrap_or(f64::INFINITY);
        let ray = Ray::new(origin, direction);
        Ok(self.closest_hit(&ray, SELF_INTERSECTION_EPSILON, max))
    }

    /// Closest hit along a prepared ray in `(t_min, t_max]`, without argument
    /// validation.
    pub fn closest_hit(&self, ray: &Ray, t_min: f64, t_max: f64) -> Option<RayHit> {
        let mut best: Option<RayHit> = None;
        let mut limit = t_max;
        self.traverse(ray, t_min, &mut limit, |slot, limit| {
            let t = self.triangles[slot].intersect(ray, t_min, *limit)?;
            let id = self.order[slot];
            // equal distances (shared edges) resolve to the lowest id
            let better = match best {
                None => true,
                Some(b) => t < b.distance || (t == b.distance && id < b.triangle),
            };
            if better {
                best = Some(RayHit {
                    distance: t,
                    triangle: id,
                });
                *limit = t;
            }
            Some(false)
        });
        best
    }

    /// `true` if any triangle touches the open segment between `p` and `q`,
    /// ignoring `ε_self` at each end. Triangles are closed: a segment that
    /// grazes an edge or vertex is blocked.
    ///
    /// Segments that pass within rounding distance of a triangle edge are
    /// decided by exact predicates on `p` and `q`. The segment is always
    /// tested from its lexicographically smaller endpoint, so
    /// `occluded(p, q) == occluded(q, p)` bit for bit.
    pub fn occluded(&self, p: Vec3, q: Vec3) -> bool {
        let (from, to) = if q.lex_lt(p) { (q, p) } else { (p, q) };
        let delta = to - from;
        let length = delta.length();
        if !(length > 2.0 * SELF_INTERSECTION_EPSILON) {
            return false;
        }
        let ray = Ray::new(from, delta * (1.0 / length));
        let (t_min, t_max) = (SELF_INTERSECTION_EPSILON, length - SELF_INTERSECTION_EPSILON);
        let mut limit = t_max;
        let mut found = false;
        self.traverse(&ray, t_min, &mut limit, |slot, limit| {
            let triangle = &self.triangles[slot];
            let hit = match triangle.classify(&ray, t_min, *limit) {
                Crossing::Hit(_) => true,
                Crossing::Miss => false,
                Crossing::Uncertain => triangle.segment_crosses_exact(from, to, t_min, t_max),
            };
            found |= hit;
            hit.then_some(true)
        });
        found
    }

    /// `true` if any triangle is hit in `(t_min, t_max]`.
    pub fn any_hit(&self, ray: &Ray, t_min: f64, t_max: f64) -> bool {
        let mut limit = t_max;
        let mut found = false;
        self.traverse(ray, t_min, &mut limit, |slot, limit| {
            self.triangles[slot].intersect(ray, t_min, *limit)?;
            found = true;
            Some(true)
        });
        found
    }

    /// Depth-first traversal, near child first. `visit` returns `Some(true)`
    /// to stop early.
    fn traverse<F>(&self, ray: &Ray, t_min: f64, limit: &mut f64, mut visit: F)
    where
        F: FnMut(usize, &mut f64) -> Option<bool>,
    {
        let mut stack = [0u32; MAX_DEPTH + 4];
        let mut top = 0usize;
        let root = &self.nodes[0];
        if root
            .bounds
            .intersect(ray.origin, ray.inv_direction, t_min, *limit)
            .is_none()
        {
            return;
        }
        stack[top] = 0;
        top += 1;
        while top > 0 {
            top -= 1;
            let node = &self.nodes[stack[top] as usize];
            if node.count > 0 {
                let start = node.index as usize;
                for slot in start..start + node.count as usize {
                    if visit(slot, limit) == Some(true) {
                        return;
                    }
                }
                continue;
            }
            let left = stack[top] + 1;
            let right = node.index;
            let hit_left = self.nodes[left as usize].bounds.intersect(
                ray.origin,
                ray.inv_direction,
                t_min,
                *limit,
            );
            let hit_right = self.nodes[right as usize].bounds.intersect(
                ray.origin,
                ray.inv_direction,
                t_min,
                *limit,
            );
            match (hit_left, hit_right) {
                (Some(l), Some(r)) => {
                    let (near, far) = if l <= r { (left, right) } else { (right, left) };
                    stack[top] = far;
                    stack[top + 1] = near;
                    top += 2;
                }
                (Some(_), None) => {
                    stack[top] = left;
                    top += 1;
                }
                (None, Some(_)) => {
                    stack[top] = right;
                    top += 1;
                }
                (None, None) => {}
            }
        }
    }
}

struct Builder {
    nodes: Vec<Node>,
    pad: f64,
}

impl Builder {
    fn subdivide(&mut self, refs: &mut [BuildRef], offset: usize, len: usize, depth: usize) {
        let slice = &mut refs[offset..offset + len];
        let bounds = slice.iter().fold(Aabb::EMPTY, |b, r| b.union(r.bounds));
        let this = self.nodes.len();
        self.nodes.push(Node {
            bounds: bounds.padded(self.pad),
            index: offset as u32,
            count: len as u32,
        });
        if len <= 1 || depth >= MAX_DEPTH {
            return;
        }

        let split = match best_sah_split(slice, &bounds) {
            Some((axis, position, cost)) if cost < len as f64 || len > MAX_LEAF => {
                let mid = partition(slice, |r| r.centroid[axis] < position);
                if mid == 0 || mid == len {
                    None
                } else {
                    Some(mid)
                }
            }
            Some(_) => return,
            None if len <= MAX_LEAF => return,
            None => None,
        };
        let mid = split.unwrap_or_else(|| median_split(slice));

        self.subdivide(refs, offset, mid, depth + 1);
        let right = self.nodes.len() as u32;
        self.subdivide(refs, offset + mid, len - mid, depth + 1);
        self.nodes[this].index = right;
        self.nodes[this].count = 0;
    }
}

/// Best binned SAH split as (axis, plane, cost relative to one triangle test).
fn best_sah_split(refs: &[BuildRef], bounds: &Aabb) -> Option<(usize, f64, f64)> {
    let centroids = refs.iter().fold(Aabb::EMPTY, |b, r| b.grow(r.centroid));
    let parent_area = bounds.surface_area();
    if parent_area <= 0.0 {
        return None;
    }
    let mut best: Option<(usize, f64, f64)> = None;
    for axis in 0..3 {
        let lo = centroids.min[axis];
        let hi = centroids.max[axis];
        if !(hi > lo) {
            continue;
        }
        let mut bin_bounds = [Aabb::EMPTY; BINS];
        let mut bin_counts = [0usize; BINS];
        let scale = BINS as f64 / (hi - lo);
        for r in refs {
            let b = (((r.centroid[axis] - lo) * scale) as usize).min(BINS - 1);
            bin_bounds[b] = bin_bounds[b].union(r.bounds);
            bin_counts[b] += 1;
        }
        let mut right_area = [0.0; BINS];
        let mut right_count = [0usize; BINS];
        let mut acc = Aabb::EMPTY;
        let mut count = 0;
        for b in (1..BINS).rev() {
            acc = acc.union(bin_bounds[b]);
            count += bin_counts[b];
            right_area[b] = acc.surface_area();
            right_count[b] = count;
        }
        let mut acc = Aabb::EMPTY;
        let mut count = 0;
        for b in 0..BINS - 1 {
            acc = acc.union(bin_bounds[b]);
            count += bin_counts[b];
            if count == 0 || right_count[b + 1] == 0 {
                continue;
            }
            let cost = TRAVERSAL_COST
                + (acc.surface_area() * count as f64
                    + right_area[b + 1] * right_count[b + 1] as f64)
                    / parent_area;
            if best.is_none_or(|(_, _, c)| cost < c) {
                let plane = lo + (b + 1) as f64 / scale;
                best = Some((axis, plane, cost));
            }
        }
    }
    best
}

fn partition<F: Fn(&BuildRef) -> bool>(refs: &mut [BuildRef], left: F) -> usize {
    let mut mid = 0;
    for i in 0..refs.len() {
        if left(&refs[i]) {
            refs.swap(i, mid);
            mid += 1;
        }
    }
    mid
}

fn median_split(refs: &mut [BuildRef]) -> usize {
    let centroids = refs.iter().fold(Aabb::EMPTY, |b, r| b.grow(r.centroid));
    let axis = centroids.largest_axis();
    refs.sort_unstable_by(|a, b| {
        a.centroid[axis]
            .total_cmp(&b.centroid[axis])
            .then(a.id.cmp(&b.id))
    });
    refs.len() / 2
}
