use alloc::vec::Vec;

use super::{Aabb, Triangle, Vec3};
use crate::{Error, Result};

/// Immutable triangle soup in meters.
///
/// Construction validates indices and coordinates and drops zero-area
/// triangles; [`TriangleMesh::dropped_degenerate`] reports how many.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
    dropped_degenerate: usize,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<TriangleMesh> {
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteVertex(i));
        }
        let vertex_count = vertices.len();
        let mut kept = Vec::with_capacity(triangles.len());
        let mut dropped = 0;
        for (t, tri) in triangles.into_iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i as usize >= vertex_count) {
                return Err(Error::VertexIndexOutOfRange {
                    triangle: t,
                    index,
                    vertex_count,
                });
            }
            let [a, b, c] = tri.map(|i| vertices[i as usize]);
            if is_degenerate(a, b, c) {
                dropped += 1;
            } else {
                kept.push(tri);
            }
        }
        if kept.is_empty() {
            return Err(Error::EmptyMesh);
        }
        Ok(TriangleMesh {
            vertices,
            triangles: kept,
            dropped_degenerate: dropped,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Number of zero-area faces removed at construction.
    pub fn dropped_degenerate(&self) -> usize {
        self.dropped_degenerate
    }

    pub fn triangle(&self, index: usize) -> Triangle {
        let [a, b, c] = self.triangles[index].map(|i| self.vertices[i as usize]);
        Triangle::new(a, b, c)
    }

    pub fn iter_triangles(&self) -> impl ExactSizeIterator<Item = Triangle> + '_ {
        (0..self.triangles.len()).map(move |i| self.triangle(i))
    }

    /// Bounds of the referenced vertices.
    pub fn bounds(&self) -> Aabb {
        self.iter_triangles().fold(Aabb::EMPTY, |b, t| b.union(t.bounds()))
    }
}

fn is_degenerate(a: Vec3, b: Vec3, c: Vec3) -> bool {
    let doubled_area = (b - a).cross(c - a).length();
    let longest = (b - a)
        .dot(b - a)
        .max((c - b).dot(c - b))
        .max((a - c).dot(a - c));
    doubled_area <= f64::EPSILON * longest
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    #[test]
    fn single_triangle() {
        let mesh = TriangleMesh::new(
            vec![v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.0, 1.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert_eq!(mesh.vertices().len(), 3);
        assert_eq!(mesh.triangle_count(), 1);
        assert_eq!(mesh.dropped_degenerate(), 0);
    }

    #[test]
    fn degenerate_faces_are_dropped_and_counted() {
        let mesh = TriangleMesh::new(
            vec![
                v(0.0, 0.0, 0.0),
                v(1.0, 0.0, 0.0),
                v(0.0, 1.0, 0.0),
                v(2.0, 0.0, 0.0),
            ],
            vec![[0, 1, 2], [0, 1, 3], [2, 2, 1]],
        )
        .unwrap();
        assert_eq!(mesh.triangle_count(), 1);
        assert_eq!(mesh.dropped_degenerate(), 2);
    }

    #[test]
    fn all_degenerate_is_empty() {
        let err = TriangleMesh::new(vec![v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0)], vec![[0, 1, 1]])
            .unwrap_err();
        assert_eq!(err, Error::EmptyMesh);
        assert_eq!(TriangleMesh::new(vec![], vec![]).unwrap_err(), Error::EmptyMesh);
    }

    #[test]
    fn rejects_bad_index_and_nan() {
        let err = TriangleMesh::new(vec![v(0.0, 0.0, 0.0)], vec![[0, 1, 2]]).unwrap_err();
        assert!(matches!(err, Error::VertexIndexOutOfRange { index: 1, .. }));
        let err = TriangleMesh::new(vec![v(f64::NAN, 0.0, 0.0)], vec![]).unwrap_err();
        assert_eq!(err, Error::NonFiniteVertex(0));
    }
}
