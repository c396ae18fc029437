//! Scene geometry: triangle meshes, a bounding volume hierarchy, and the
//! closest-hit / segment-occlusion queries the visibility graph is built on.
//!
//! Units are meters with +z up.

mod aabb;
mod bvh;
mod mesh;
mod triangle;
mod vec3;

pub use self::aabb::Aabb;
pub use self::bvh::Bvh;
pub use self::mesh::TriangleMesh;
pub use self::triangle::{Crossing, Ray, Triangle};
pub use self::vec3::Vec3;

/// Offset applied along a ray at its origin (and at the far end of an
/// occlusion segment) so that points resting on a surface do not hit it.
pub const SELF_INTERSECTION_EPSILON: f64 = 1e-4;

/// Allowed deviation of a ray direction from unit length.
pub const DIRECTION_TOLERANCE: f64 = 1e-6;

/// Closest intersection along a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RayHit {
    /// Distance from the ray origin in meters.
    pub distance: f64,
    /// Index into [`TriangleMesh::triangles`].
    pub triangle: u32,
}
