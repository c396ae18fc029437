//! On-disk formats.
//!
//! * `nodes.csv`: header `id,x,y,z`, one row per node in id order.
//! * scores CSV: header `node_id,degree,S_S,S_A`.
//! * edge weights CSV: header `i,j,distance,weight`, one row per undirected
//!   edge with `i < j`.
//! * graph JSON: `{"format", "version", "kind", "nodes", "offsets",
//!   "neighbors", "distances"}` where `nodes` is a list of `[x, y, z]` and the
//!   last three arrays are the compressed sparse rows.
//! * graph binary (`.vgat`), little-endian:
//!   `b"VGAT"`, version `u8` = 1, kind `u8` (0 all-to-all, 1 subset), then
//!   length-prefixed (`u64`) arrays: node coordinates (`3n` × `f64`),
//!   offsets (`u64`), neighbors (`u32`), distances (`f64`), and for subsets
//!   sources (`u32`) and targets (`u32`).
//!
//! Floating-point values are written in Rust's shortest round-trip form, so
//! reading a file back reproduces every value exactly.

use std::io::{BufRead, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use weathervis_core::{EdgeWeights, GraphKind, Node, ScoreField, Vec3, VisibilityGraph};

use crate::config::GraphFormat;
use crate::error::{Error, Result};

pub const NODES_HEADER: &str = "id,x,y,z";
pub const SCORES_HEADER: &str = "node_id,degree,S_S,S_A";
pub const WEIGHTS_HEADER: &str = "i,j,distance,weight";
pub const GRAPH_JSON_FORMAT: &str = "weathervis-graph";
pub const VGAT_MAGIC: &[u8; 4] = b"VGAT";
pub const VGAT_VERSION: u8 = 1;

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

pub fn write_nodes_csv(out: &mut impl Write, nodes: &[Node]) -> std::io::Result<()> {
    writeln!(out, "{NODES_HEADER}")?;
    for n in nodes {
        let p = n.position;
        writeln!(out, "{},{},{},{}", n.id, p.x, p.y, p.z)?;
    }
    Ok(())
}

/// Splits CSV data rows after checking the header; yields `(line, fields)`.
fn csv_rows<R: BufRead>(
    input: R,
    header: &str,
    path: &Path,
) -> Result<Vec<(usize, Vec<String>)>> {
    let mut lines = input.lines();
    let first = lines
        .next()
        .transpose()
        .map_err(|e| Error::io(path, e))?
        .ok_or_else(|| format_err(path, "empty file"))?;
    if first.trim() != header {
        return Err(format_err(path, format!("expected header `{header}`, found `{first}`")));
    }
    let width = header.split(',').count();
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|f| f.trim().to_string()).collect();
        if fields.len() != width {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: k + 2,
                message: format!("expected {width} fields, found {}", fields.len()),
            });
        }
        rows.push((k + 2, fields));
    }
    Ok(rows)
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, text: &str) -> Result<T> {
    text.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("invalid value `{text}`"),
    })
}

pub fn read_nodes_csv(input: impl BufRead, path: &Path) -> Result<Vec<Node>> {
    let rows = csv_rows(input, NODES_HEADER, path)?;
    let mut nodes = Vec::with_capacity(rows.len());
    for (line, f) in rows {
        let id: u32 = field(path, line, &f[0])?;
        if id as usize != nodes.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("ids must be 0, 1, 2, …; found {id}"),
            });
        }
        let position = Vec3::new(
            field(path, line, &f[1])?,
            field(path, line, &f[2])?,
            field(path, line, &f[3])?,
        );
        nodes.push(Node { id, position });
    }
    if nodes.is_empty() {
        return Err(format_err(path, "no nodes"));
    }
    Ok(nodes)
}

pub fn write_scores_csv(out: &mut impl Write, scores: &ScoreField) -> std::io::Result<()> {
    writeln!(out, "{SCORES_HEADER}")?;
    for i in 0..scores.len() {
        writeln!(out, "{},{},{},{}", i, scores.degree[i], scores.sum[i], scores.avg[i])?;
    }
    Ok(())
}

/// One row of a scores file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreRow {
    pub node_id: u32,
    pub degree: u32,
    pub sum: f64,
    pub avg: f64,
}

pub fn read_scores_csv(input: impl BufRead, path: &Path) -> Result<Vec<ScoreRow>> {
    let rows = csv_rows(input, SCORES_HEADER, path)?;
    let mut out = Vec::with_capacity(rows.len());
    for (line, f) in rows {
        let row = ScoreRow {
            node_id: field(path, line, &f[0])?,
            degree: field(path, line, &f[1])?,
            sum: field(path, line, &f[2])?,
            avg: field(path, line, &f[3])?,
        };
        if row.node_id as usize != out.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("node ids must be 0, 1, 2, …; found {}", row.node_id),
            });
        }
        out.push(row);
    }
    Ok(out)
}

pub fn write_weights_csv(
    out: &mut impl Write,
    graph: &VisibilityGraph,
    weights: &EdgeWeights,
) -> std::io::Result<()> {
    writeln!(out, "{WEIGHTS_HEADER}")?;
    let w = weights.as_slice();
    for i in 0..graph.node_count() {
        let start = graph.offsets()[i];
        for (k, (&j, &d)) in graph.neighbors(i).iter().zip(graph.distances(i)).enumerate() {
            if (j as usize) > i {
                writeln!(out, "{i},{j},{d},{}", w[start + k])?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum KindJson {
    AllToAll,
    Subset { sources: Vec<u32>, targets: Vec<u32> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphJson {
    format: String,
    version: u32,
    kind: KindJson,
    nodes: Vec<[f64; 3]>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    distances: Vec<f64>,
}

pub fn write_graph_json(out: &mut impl Write, graph: &VisibilityGraph) -> std::io::Result<()> {
    let doc = GraphJson {
        format: GRAPH_JSON_FORMAT.into(),
        version: 1,
        kind: match graph.kind() {
            GraphKind::AllToAll => KindJson::AllToAll,
            GraphKind::Subset { sources, targets } => KindJson::Subset {
                sources: sources.clone(),
                targets: targets.clone(),
            },
        },
        nodes: graph.positions().iter().map(|p| [p.x, p.y, p.z]).collect(),
        offsets: graph.offsets().to_vec(),
        neighbors: graph.neighbor_array().to_vec(),
        distances: graph.distance_array().to_vec(),
    };
    serde_json::to_writer(&mut *out, &doc)?;
    writeln!(out)
}

pub fn read_graph_json(input: impl Read, path: &Path) -> Result<VisibilityGraph> {
    let doc: GraphJson =
        serde_json::from_reader(input).map_err(|e| format_err(path, e.to_string()))?;
    if doc.format != GRAPH_JSON_FORMAT || doc.version != 1 {
        return Err(format_err(path, format!("unsupported graph format {} v{}", doc.format, doc.version)));
    }
    let kind = match doc.kind {
        KindJson::AllToAll => GraphKind::AllToAll,
        KindJson::Subset { sources, targets } => GraphKind::Subset { sources, targets },
    };
    let positions = doc.nodes.into_iter().map(Vec3::from).collect();
    VisibilityGraph::from_parts(positions, doc.offsets, doc.neighbors, doc.distances, kind)
        .map_err(|e| format_err(path, e.to_string()))
}

pub fn write_graph_binary(out: &mut impl Write, graph: &VisibilityGraph) -> std::io::Result<()> {
    fn len(out: &mut impl Write, n: usize) -> std::io::Result<()> {
        out.write_all(&(n as u64).to_le_bytes())
    }
    out.write_all(VGAT_MAGIC)?;
    out.write_all(&[VGAT_VERSION])?;
    let kind = match graph.kind() {
        GraphKind::AllToAll => 0u8,
        GraphKind::Subset { .. } => 1u8,
    };
    out.write_all(&[kind])?;
    len(out, graph.node_count() * 3)?;
    for p in graph.positions() {
        for c in [p.x, p.y, p.z] {
            out.write_all(&c.to_le_bytes())?;
        }
    }
    len(out, graph.offsets().len())?;
    for &o in graph.offsets() {
        out.write_all(&(o as u64).to_le_bytes())?;
    }
    len(out, graph.neighbor_array().len())?;
    for &j in graph.neighbor_array() {
        out.write_all(&j.to_le_bytes())?;
    }
    len(out, graph.distance_array().len())?;
    for &d in graph.distance_array() {
        out.write_all(&d.to_le_bytes())?;
    }
    if let GraphKind::Subset { sources, targets } = graph.kind() {
        for ids in [sources, targets] {
            len(out, ids.len())?;
            for &i in ids {
                out.write_all(&i.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    path: &'a Path,
}

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        if self.bytes.len() < N {
            return Err(format_err(self.path, "truncated file"));
        }
        let (head, rest) = self.bytes.split_at(N);
        self.bytes = rest;
        Ok(head.try_into().expect("length checked"))
    }

    fn len(&mut self, item_size: usize) -> Result<usize> {
        let n = u64::from_le_bytes(self.take()?);
        let n = usize::try_from(n).map_err(|_| format_err(self.path, "array too long"))?;
        if n.checked_mul(item_size).is_none_or(|b| b > self.bytes.len()) {
            return Err(format_err(self.path, "truncated file"));
        }
        Ok(n)
    }

    fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.len(8)?;
        (0..n).map(|_| Ok(f64::from_le_bytes(self.take()?))).collect()
    }

    fn u32s(&mut self) -> Result<Vec<u32>> {
        let n = self.len(4)?;
        (0..n).map(|_| Ok(u32::from_le_bytes(self.take()?))).collect()
    }

    fn u64s(&mut self) -> Result<Vec<usize>> {
        let n = self.len(8)?;
        (0..n)
            .map(|_| {
                usize::try_from(u64::from_le_bytes(self.take()?))
                    .map_err(|_| format_err(self.path, "offset too large"))
            })
            .collect()
    }
}

pub fn read_graph_binary(bytes: &[u8], path: &Path) -> Result<VisibilityGraph> {
    let mut c = Cursor { bytes, path };
    if &c.take::<4>()? != VGAT_MAGIC {
        return Err(format_err(path, "missing VGAT magic bytes"));
    }
    let [version] = c.take::<1>()?;
    if version != VGAT_VERSION {
        return Err(format_err(path, format!("unsupported VGAT version {version}")));
    }
    let [kind] = c.take::<1>()?;
    let coords = c.f64s()?;
    if coords.len() % 3 != 0 {
        return Err(format_err(path, "node coordinate count is not a multiple of 3"));
    }
    let positions = coords.chunks_exact(3).map(|p| Vec3::new(p[0], p[1], p[2])).collect();
    let offsets = c.u64s()?;
    let neighbors = c.u32s()?;
    let distances = c.f64s()?;
    let kind = match kind {
        0 => GraphKind::AllToAll,
        1 => GraphKind::Subset {
            sources: c.u32s()?,
            targets: c.u32s()?,
        },
        k => return Err(format_err(path, format!("unknown graph kind {k}"))),
    };
    if !c.bytes.is_empty() {
        return Err(format_err(path, "trailing bytes"));
    }
    VisibilityGraph::from_parts(positions, offsets, neighbors, distances, kind)
        .map_err(|e| format_err(path, e.to_string()))
}

pub fn write_graph(out: &mut impl Write, graph: &VisibilityGraph, format: GraphFormat) -> std::io::Result<()> {
    match format {
        GraphFormat::Json => write_graph_json(out, graph),
        GraphFormat::Binary => write_graph_binary(out, graph),
    }
}

/// Reads either graph format, telling them apart by the magic bytes.
pub fn read_graph_file(path: impl AsRef<Path>) -> Result<VisibilityGraph> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(VGAT_MAGIC) {
        read_graph_binary(&bytes, path)
    } else {
        read_graph_json(bytes.as_slice(), path)
    }
}

pub fn read_nodes_file(path: impl AsRef<Path>) -> Result<Vec<Node>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_nodes_csv(std::io::BufReader::new(file), path)
}

pub fn read_scores_file(path: impl AsRef<Path>) -> Result<Vec<ScoreRow>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_scores_csv(std::io::BufReader::new(file), path)
}
