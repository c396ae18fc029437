//! Procedural test scenes: a flat ground plane plus extruded boxes.
//!
//! The five 50 m × 50 m comparison layouts use 10 m extrusions. `city` is a
//! 160 m × 60 m street-and-plaza layout where the best-connected location in
//! clear weather is not the best under heavy snow.

use std::io::Write;

use weathervis_core::{TriangleMesh, Vec3};

use crate::obj::write_obj;

pub const EXTRUSION_HEIGHT: f64 = 10.0;

/// Names accepted by [`by_name`], in a stable order.
pub const SCENE_NAMES: [&str; 6] = [
    "empty-square",
    "wall",
    "single-box",
    "four-boxes",
    "courtyard",
    "city",
];

/// Polygon soup with authored faces kept as polygons.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub name: &'static str,
    pub vertices: Vec<Vec3>,
    pub faces: Vec<Vec<u32>>,
    /// Ground extent `(min_x, min_y, max_x, max_y)`.
    pub footprint: (f64, f64, f64, f64),
}

impl Scene {
    fn ground(name: &'static str, width: f64, depth: f64) -> Scene {
        let mut s = Scene {
            name,
            vertices: Vec::new(),
            faces: Vec::new(),
            footprint: (0.0, 0.0, width, depth),
        };
        s.quad([
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(width, 0.0, 0.0),
            Vec3::new(width, depth, 0.0),
            Vec3::new(0.0, depth, 0.0),
        ]);
        s
    }

    fn quad(&mut self, corners: [Vec3; 4]) {
        let base = self.vertices.len() as u32;
        self.vertices.extend(corners);
        self.faces.push(vec![base, base + 1, base + 2, base + 3]);
    }

    /// Four walls and a flat top; no bottom face.
    fn block(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, height: f64) {
        let ring = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)];
        for k in 0..4 {
            let (ax, ay) = ring[k];
            let (bx, by) = ring[(k + 1) % 4];
            self.quad([
                Vec3::new(ax, ay, 0.0),
                Vec3::new(bx, by, 0.0),
                Vec3::new(bx, by, height),
                Vec3::new(ax, ay, height),
            ]);
        }
        self.quad(ring.map(|(x, y)| Vec3::new(x, y, height)));
    }

    /// Triangles after fan triangulation of every face.
    pub fn authored_triangle_count(&self) -> usize {
        self.faces.iter().map(|f| f.len() - 2).sum()
    }

    pub fn mesh(&self) -> TriangleMesh {
        let triangles = self
            .faces
            .iter()
            .flat_map(|f| (1..f.len() - 1).map(move |k| [f[0], f[k], f[k + 1]]))
            .collect();
        TriangleMesh::new(self.vertices.clone(), triangles).expect("scenes are well formed")
    }

    pub fn write_obj(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "# {}", self.name)?;
        write_obj(out, &self.vertices, &self.faces)
    }

    pub fn to_obj_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_obj(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }
}

pub fn empty_square() -> Scene {
    Scene::ground("empty-square", 50.0, 50.0)
}

/// A 2 m thick wall across the middle, open at both ends.
pub fn wall() -> Scene {
    let mut s = Scene::ground("wall", 50.0, 50.0);
    s.block(24.0, 10.0, 26.0, 40.0, EXTRUSION_HEIGHT);
    s
}

/// One 16 m box in the center.
pub fn single_box() -> Scene {
    let mut s = Scene::ground("single-box", 50.0, 50.0);
    s.block(17.0, 17.0, 33.0, 33.0, EXTRUSION_HEIGHT);
    s
}

pub fn four_boxes() -> Scene {
    let mut s = Scene::ground("four-boxes", 50.0, 50.0);
    for (x, y) in [(8.0, 8.0), (32.0, 8.0), (8.0, 32.0), (32.0, 32.0)] {
        s.block(x, y, x + 10.0, y + 10.0, EXTRUSION_HEIGHT);
    }
    s
}

/// A closed ring building around a 10 m × 10 m open court.
pub fn courtyard() -> Scene {
    let mut s = Scene::ground("courtyard", 50.0, 50.0);
    let (o0, o1, i0, i1, h) = (10.0, 40.0, 20.0, 30.0, EXTRUSION_HEIGHT);
    // outer and inner walls
    for (a, b) in [(o0, o1), (i0, i1)] {
        let ring = [(a, a), (b, a), (b, b), (a, b)];
        for k in 0..4 {
            let (ax, ay) = ring[k];
            let (bx, by) = ring[(k + 1) % 4];
            s.quad([
                Vec3::new(ax, ay, 0.0),
                Vec3::new(bx, by, 0.0),
                Vec3::new(bx, by, h),
                Vec3::new(ax, ay, h),
            ]);
        }
    }
    // roof ring as four quads
    let roof = |x0: f64, y0: f64, x1: f64, y1: f64| {
        [(x0, y0), (x1, y0), (x1, y1), (x0, y1)].map(|(x, y)| Vec3::new(x, y, h))
    };
    s.quad(roof(o0, o0, o1, i0));
    s.quad(roof(o0, i1, o1, o1));
    s.quad(roof(o0, i0, i0, i1));
    s.quad(roof(i1, i0, o1, i1));
    s
}

/// Query points of the city scene: plaza center, plaza corner, boulevard.
pub const CITY_POINTS: [(&str, f64, f64); 3] =
    [("P1", 40.5, 40.5), ("P2", 22.5, 22.5), ("P3", 100.5, 6.5)];

/// A 12 m boulevard along y = 0..12 lined by 10 m buildings, with a 40 m
/// square plaza behind them reached through a 4 m passage.
///
/// The boulevard sees more locations in total, but most are far away; the
/// plaza's locations are all close.
pub fn city() -> Scene {
    let mut s = Scene::ground("city", 160.0, 60.0);
    let h = EXTRUSION_HEIGHT;
    s.block(0.0, 12.0, 20.0, 60.0, h);
    s.block(60.0, 12.0, 160.0, 60.0, h);
    s.block(20.0, 12.0, 38.0, 20.0, h);
    s.block(42.0, 12.0, 60.0, 20.0, h);
    s
}

pub fn by_name(name: &str) -> Option<Scene> {
    Some(match name {
        "empty-square" => empty_square(),
        "wall" => wall(),
        "single-box" => single_box(),
        "four-boxes" => four_boxes(),
        "courtyard" => courtyard(),
        "city" => city(),
        _ => return None,
    })
}

pub fn all() -> Vec<Scene> {
    SCENE_NAMES.iter().map(|n| by_name(n).unwrap()).collect()
}
