//! Wavefront OBJ input. Only `v` and `f` records are read; everything else
//! (normals, texture coordinates, groups, materials) is skipped.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use weathervis_core::{TriangleMesh, Vec3};

use crate::error::{Error, Result};

/// A mesh read from disk together with load statistics.
#[derive(Debug, Clone)]
pub struct LoadedMesh {
    pub mesh: TriangleMesh,
    /// Triangles produced by fan triangulation, before degenerate filtering.
    pub authored_triangles: usize,
    pub dropped_degenerate: usize,
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<LoadedMesh> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_obj(BufReader::new(file), path)
}

/// Parses OBJ text. `path` is only used in error messages.
pub fn parse_obj(reader: impl BufRead, path: &Path) -> Result<LoadedMesh> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();
    // (line, 1-based vertex index) for forward references checked at the end
    let mut forward: Vec<(usize, usize)> = Vec::new();

    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let content = line.split('#').next().unwrap_or("");
        let mut fields = content.split_whitespace();
        match fields.next() {
            Some("v") => {
                let mut xyz = [0.0; 3];
                for (k, slot) in xyz.iter_mut().enumerate() {
                    let field = fields.next().ok_or_else(|| {
                        parse_err(line_no, format!("vertex needs 3 coordinates, found {k}"))
                    })?;
                    *slot = field.parse::<f64>().map_err(|_| {
                        parse_err(line_no, format!("invalid coordinate `{field}`"))
                    })?;
                    if !slot.is_finite() {
                        return Err(parse_err(line_no, format!("non-finite coordinate `{field}`")));
                    }
                }
                vertices.push(Vec3::from(xyz));
            }
            Some("f") => {
                let mut face = Vec::new();
                for field in fields {
                    let head = field.split('/').next().unwrap_or("");
                    let raw: i64 = head.parse().map_err(|_| {
                        parse_err(line_no, format!("invalid vertex reference `{field}`"))
                    })?;
                    let resolved = match raw {
                        0 => return Err(parse_err(line_no, "vertex index 0 is not valid".into())),
                        r if r > 0 => (r - 1) as usize,
                        r => {
                            let back = r.unsigned_abs() as usize;
                            if back > vertices.len() {
                                return Err(parse_err(
                                    line_no,
                                    format!("relative index {r} precedes the first vertex"),
                                ));
                            }
                            vertices.len() - back
                        }
                    };
                    if resolved >= vertices.len() {
                        forward.push((line_no, resolved + 1));
                    }
                    let id = u32::try_from(resolved)
                        .map_err(|_| parse_err(line_no, "vertex index too large".into()))?;
                    face.push(id);
                }
                if face.len() < 3 {
                    return Err(parse_err(
                        line_no,
                        format!("face needs at least 3 vertices, found {}", face.len()),
                    ));
                }
                for k in 1..face.len() - 1 {
                    triangles.push([face[0], face[k], face[k + 1]]);
                }
            }
            _ => {}
        }
    }

    if let Some(&(line, idx)) = forward.iter().find(|&&(_, idx)| idx > vertices.len()) {
        return Err(parse_err(
            line,
            format!("vertex {idx} does not exist ({} vertices)", vertices.len()),
        ));
    }
    if triangles.is_empty() {
        return Err(Error::EmptyMesh {
            path: path.to_path_buf(),
        });
    }
    let authored_triangles = triangles.len();
    let mesh = match TriangleMesh::new(vertices, triangles) {
        Ok(mesh) => mesh,
        Err(weathervis_core::Error::EmptyMesh) => {
            return Err(Error::EmptyMesh {
                path: path.to_path_buf(),
            })
        }
        Err(e) => return Err(e.into()),
    };
    Ok(LoadedMesh {
        dropped_degenerate: mesh.dropped_degenerate(),
        authored_triangles,
        mesh,
    })
}

/// Writes vertices and polygon faces (0-based ids) as OBJ text.
pub fn write_obj(out: &mut impl Write, vertices: &[Vec3], faces: &[Vec<u32>]) -> std::io::Result<()> {
    for v in vertices {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for face in faces {
        write!(out, "f")?;
        for id in face {
            write!(out, " {}", id + 1)?;
        }
        writeln!(out)?;
    }
    Ok(())
}
