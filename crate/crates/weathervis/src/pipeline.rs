//! End-to-end runs: mesh → grid → graph → per-condition scores → files.
//!
//! Everything is computed in memory first; files are written by one writer
//! at the end, and if any write fails every file written so far is removed.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use weathervis_core::visgraph::{weight_edges, GraphOptions};
use weathervis_core::{
    resolve_condition_with, AttenuationCoefficient, Bvh, GridSpec, Node, ScoreField,
    VisibilityGraph, WeatherCondition,
};

use crate::config::{condition_label, Metric, RunConfig, ScaleMode};
use crate::error::{Error, Result};
use crate::formats::{write_graph, write_nodes_csv, write_scores_csv};
use crate::heatmap::{render, shared_range, value_range, write_ppm, Sidecar};
use crate::obj::LoadedMesh;
use crate::parallel;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedCondition {
    pub label: String,
    pub condition: WeatherCondition,
    pub sigma: f64,
    /// Koschmieder distance; absent when σ = 0.
    pub visibility_distance_m: Option<f64>,
}

impl ResolvedCondition {
    pub fn coefficient(&self) -> AttenuationCoefficient {
        AttenuationCoefficient {
            sigma: self.sigma,
            condition: self.condition,
        }
    }
}

pub fn resolve_conditions(config: &RunConfig) -> Result<Vec<ResolvedCondition>> {
    config.validate_conditions()?;
    let attenuation = config.attenuation();
    config
        .conditions
        .iter()
        .map(|c| {
            let k = resolve_condition_with(c, &attenuation)?;
            Ok(ResolvedCondition {
                label: condition_label(c),
                condition: *c,
                sigma: k.sigma,
                visibility_distance_m: k.visibility_distance(),
            })
        })
        .collect()
}

/// The loaded scene and the lattice it is sampled on.
pub struct Scene {
    pub mesh_path: PathBuf,
    pub mesh_sha256: String,
    pub authored_triangles: usize,
    pub dropped_degenerate: usize,
    pub bvh: Bvh,
    pub spec: GridSpec,
}

pub fn load_scene(config: &RunConfig) -> Result<Scene> {
    let path = &config.mesh;
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let LoadedMesh {
        mesh,
        authored_triangles,
        dropped_degenerate,
    } = crate::obj::parse_obj(bytes.as_slice(), path)?;
    let mut spec = config.grid.spec_for(mesh.bounds());
    let bvh = Bvh::build(mesh)?;
    spec.drop_height = Some(spec.drop_height.unwrap_or(bvh.bounds().max.z + 1.0));
    Ok(Scene {
        mesh_path: path.clone(),
        mesh_sha256: sha256_hex(&bytes),
        authored_triangles,
        dropped_degenerate,
        bvh,
        spec,
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Id of the node nearest to `point` (`[x, y]` or `[x, y, z]`) among those
/// within `radius` horizontally. Ties go to the lower id.
pub fn snap_to_node(nodes: &[Node], point: &[f64], radius: f64) -> Result<u32> {
    let (x, y) = (point[0], point[1]);
    let horizontal = |n: &Node| ((n.position.x - x).powi(2) + (n.position.y - y).powi(2)).sqrt();
    let key = |n: &Node| match point.get(2) {
        Some(z) => (horizontal(n).powi(2) + (n.position.z - z).powi(2)).sqrt(),
        None => horizontal(n),
    };
    nodes
        .iter()
        .filter(|n| horizontal(n) <= radius * (1.0 + 1e-9))
        .min_by(|a, b| key(a).total_cmp(&key(b)).then(a.id.cmp(&b.id)))
        .map(|n| n.id)
        .ok_or(Error::NoNodeNear { x, y, radius })
}

/// All in-memory results of a run.
pub struct Analysis {
    pub scene: Scene,
    pub nodes: Vec<Node>,
    /// Snapped subset targets, in config order.
    pub targets: Option<Vec<u32>>,
    pub graph: VisibilityGraph,
    pub conditions: Vec<ResolvedCondition>,
    pub scores: Vec<ScoreField>,
}

pub fn analyze(config: &RunConfig) -> Result<Analysis> {
    config.validate().map_err(|e| e.in_stage("config"))?;
    let conditions = resolve_conditions(config).map_err(|e| e.in_stage("attenuation"))?;
    let scene = load_scene(config).map_err(|e| e.in_stage("mesh"))?;
    parallel::with_threads(config.threads, || analyze_scene(config, scene, conditions))?
}

fn analyze_scene(
    config: &RunConfig,
    scene: Scene,
    conditions: Vec<ResolvedCondition>,
) -> Result<Analysis> {
    let nodes = parallel::generate_grid(&scene.spec, &scene.bvh).map_err(|e| e.in_stage("grid"))?;
    let options = GraphOptions {
        max_distance: config.max_los,
    };
    let (graph, targets) = match &config.subset {
        None => {
            let g = parallel::build_visibility_graph(&nodes, &scene.bvh, &options);
            (g.map_err(|e| e.in_stage("graph"))?, None)
        }
        Some(subset) => {
            let radius = scene.spec.spacing / 2.0;
            let targets = subset
                .targets
                .iter()
                .map(|p| snap_to_node(&nodes, p, radius))
                .collect::<Result<Vec<u32>>>()
                .map_err(|e| e.in_stage("subset"))?;
            let sources: Vec<u32> = (0..nodes.len() as u32).collect();
            let g = parallel::build_subset_graph(&nodes, &sources, &targets, &scene.bvh, &options);
            (g.map_err(|e| e.in_stage("graph"))?, Some(targets))
        }
    };
    let scores = conditions
        .iter()
        .map(|c| {
            let weights = weight_edges(&graph, &c.coefficient());
            ScoreField::compute(&graph, &weights, config.average).map_err(Error::from)
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("score"))?;
    Ok(Analysis {
        scene,
        nodes,
        targets,
        graph,
        conditions,
        scores,
    })
}

pub fn metric_values(scores: &ScoreField, metric: Metric) -> Vec<f64> {
    match metric {
        Metric::Degree => scores.degree.iter().map(|&d| d as f64).collect(),
        Metric::Sum => scores.sum.clone(),
        Metric::Avg => scores.avg.clone(),
    }
}

/// Color range for each `(condition, metric)`, indexed `[condition][metric]`.
pub fn heatmap_ranges(scores: &[ScoreField], metrics: &[Metric], mode: ScaleMode) -> Vec<Vec<(f64, f64)>> {
    let values: Vec<Vec<Vec<f64>>> = scores
        .iter()
        .map(|s| metrics.iter().map(|&m| metric_values(s, m)).collect())
        .collect();
    ranges_of(&values, mode)
}

/// Like [`heatmap_ranges`], from values indexed `[condition][metric][node]`.
pub fn ranges_of(values: &[Vec<Vec<f64>>], mode: ScaleMode) -> Vec<Vec<(f64, f64)>> {
    let metrics = values.first().map_or(0, |v| v.len());
    let own: Vec<Vec<(f64, f64)>> = values
        .iter()
        .map(|per_metric| per_metric.iter().map(|v| value_range(v)).collect())
        .collect();
    match mode {
        ScaleMode::PerRun => own,
        ScaleMode::Shared => {
            let shared: Vec<(f64, f64)> = (0..metrics)
                .map(|k| shared_range(&own.iter().map(|r| r[k]).collect::<Vec<_>>()))
                .collect();
            vec![shared; values.len()]
        }
    }
}

/// Files produced by a run, in write order.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: String, write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) {
        let mut buf = Vec::new();
        write(&mut buf).expect("writing to memory cannot fail");
        self.files.push((name, buf));
    }

    /// Adds an image and its sidecar; returns both file names.
    #[allow(clippy::too_many_arguments)]
    pub fn add_heatmap(
        &mut self,
        spec: &GridSpec,
        nodes: &[Node],
        label: &str,
        metric: Metric,
        values: &[f64],
        range: (f64, f64),
        scale: ScaleMode,
    ) -> Result<(String, String)> {
        let raster = render(spec, nodes, values, range)?;
        let file = heatmap_file_name(label, metric);
        let sidecar_file = file.replace(".ppm", ".json");
        let sidecar = Sidecar::new(metric.name(), label, scale, range, spec);
        self.add(file.clone(), |w| write_ppm(w, &raster));
        self.add(sidecar_file.clone(), |w| {
            serde_json::to_writer_pretty(&mut *w, &sidecar)?;
            writeln!(w)
        });
        Ok((file, sidecar_file))
    }

    /// Writes every file into `dir`. On failure, removes what was written
    /// (and `dir` itself if this call created it).
    pub fn commit(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let existed = dir.exists();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            if let Err(e) = std::fs::write(&path, bytes) {
                for p in &written {
                    let _ = std::fs::remove_file(p);
                }
                let _ = std::fs::remove_file(&path);
                if !existed {
                    let _ = std::fs::remove_dir(dir);
                }
                return Err(Error::io(&path, e));
            }
            written.push(path);
        }
        Ok(written)
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    mesh: MeshEntry<'a>,
    grid: GridEntry,
    nodes: usize,
    edges: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    subset_targets: Option<Vec<TargetEntry>>,
    conditions: Vec<ConditionEntry<'a>>,
    heatmaps: Vec<HeatmapEntry>,
    files: Vec<String>,
}

#[derive(Debug, Serialize)]
struct MeshEntry<'a> {
    path: &'a Path,
    sha256: &'a str,
    triangles: usize,
    authored_triangles: usize,
    dropped_degenerate: usize,
}

#[derive(Debug, Serialize)]
struct GridEntry {
    bounds: [f64; 4],
    spacing: f64,
    eye_height: f64,
    walkable_cutoff: f64,
    drop_height: f64,
    columns: usize,
    rows: usize,
}

#[derive(Debug, Serialize)]
struct TargetEntry {
    requested: Vec<f64>,
    node_id: u32,
    position: [f64; 3],
}

#[derive(Debug, Serialize)]
struct ConditionEntry<'a> {
    #[serde(flatten)]
    resolved: &'a ResolvedCondition,
    scores_file: String,
}

#[derive(Debug, Serialize)]
struct HeatmapEntry {
    file: String,
    sidecar: String,
    metric: &'static str,
    condition: String,
    min: f64,
    max: f64,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const NODES_FILE: &str = "nodes.csv";

pub fn scores_file_name(label: &str) -> String {
    format!("scores-{label}.csv")
}

pub fn heatmap_file_name(label: &str, metric: Metric) -> String {
    format!("heatmap-{label}-{}.ppm", metric.name())
}

/// Serializes a finished analysis.
pub fn artifacts(config: &RunConfig, a: &Analysis) -> Result<Artifacts> {
    let mut out = Artifacts::default();
    out.add(NODES_FILE.into(), |w| write_nodes_csv(w, &a.nodes));
    out.add(config.graph_format.file_name().into(), |w| {
        write_graph(w, &a.graph, config.graph_format)
    });
    for (c, s) in a.conditions.iter().zip(&a.scores) {
        out.add(scores_file_name(&c.label), |w| write_scores_csv(w, s));
    }

    let ranges = heatmap_ranges(&a.scores, &config.metrics, config.scale);
    let mut heatmaps = Vec::new();
    for ((c, s), ranges) in a.conditions.iter().zip(&a.scores).zip(&ranges) {
        for (&metric, &range) in config.metrics.iter().zip(ranges) {
            let (file, sidecar_file) = out
                .add_heatmap(&a.scene.spec, &a.nodes, &c.label, metric, &metric_values(s, metric), range, config.scale)
                .map_err(|e| e.in_stage("heatmap"))?;
            heatmaps.push(HeatmapEntry {
                file,
                sidecar: sidecar_file,
                metric: metric.name(),
                condition: c.label.clone(),
                min: range.0,
                max: range.1,
            });
        }
    }

    let spec = &a.scene.spec;
    let b = spec.bounds;
    let mut files: Vec<String> = out.files.iter().map(|(n, _)| n.clone()).collect();
    files.push(MANIFEST_FILE.into());
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config,
        mesh: MeshEntry {
            path: &a.scene.mesh_path,
            sha256: &a.scene.mesh_sha256,
            triangles: a.scene.bvh.mesh().triangle_count(),
            authored_triangles: a.scene.authored_triangles,
            dropped_degenerate: a.scene.dropped_degenerate,
        },
        grid: GridEntry {
            bounds: [b.min_x, b.min_y, b.max_x, b.max_y],
            spacing: spec.spacing,
            eye_height: spec.eye_height,
            walkable_cutoff: spec.walkable_cutoff,
            drop_height: spec.drop_height.expect("resolved when the scene is loaded"),
            columns: spec.columns(),
            rows: spec.rows(),
        },
        nodes: a.nodes.len(),
        edges: a.graph.edge_count(),
        subset_targets: a.targets.as_ref().map(|t| {
            let requested = &config.subset.as_ref().expect("targets imply subset").targets;
            t.iter()
                .zip(requested)
                .map(|(&id, r)| {
                    let p = a.nodes[id as usize].position;
                    TargetEntry {
                        requested: r.clone(),
                        node_id: id,
                        position: [p.x, p.y, p.z],
                    }
                })
                .collect()
        }),
        conditions: a
            .conditions
            .iter()
            .map(|c| ConditionEntry {
                resolved: c,
                scores_file: scores_file_name(&c.label),
            })
            .collect(),
        heatmaps,
        files,
    };
    out.add(MANIFEST_FILE.into(), |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest)?;
        writeln!(w)
    });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub nodes: usize,
    pub edges: usize,
    pub conditions: Vec<ResolvedCondition>,
}

pub fn run_pipeline(config: &RunConfig) -> Result<RunSummary> {
    let analysis = analyze(config)?;
    let artifacts = artifacts(config, &analysis)?;
    let files = artifacts
        .commit(&config.out)
        .map_err(|e| e.in_stage("write"))?;
    Ok(RunSummary {
        out_dir: config.out.clone(),
        files,
        nodes: analysis.nodes.len(),
        edges: analysis.graph.edge_count(),
        conditions: analysis.conditions,
    })
}

/// One queried location.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueriedPoint {
    pub name: String,
    pub requested: Vec<f64>,
    pub node_id: u32,
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryEntry {
    pub point: String,
    pub degree: u32,
    #[serde(rename = "S_S")]
    pub sum: f64,
    #[serde(rename = "S_A")]
    pub avg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryCondition {
    #[serde(flatten)]
    pub resolved: ResolvedCondition,
    /// Highest `S_S` first; ties keep query order.
    pub ranking: Vec<QueryEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryReport {
    pub points: Vec<QueriedPoint>,
    pub conditions: Vec<QueryCondition>,
}

/// Subset graph with one queried node as the only target, and the score
/// field of every node under each condition.
pub struct PointAnalysis {
    pub node_id: u32,
    pub graph: VisibilityGraph,
    pub fields: Vec<ScoreField>,
}

pub struct QueryResult {
    pub report: QueryReport,
    pub nodes: Vec<Node>,
    pub spec: GridSpec,
    pub points: Vec<PointAnalysis>,
}

/// Scores named points, each against the whole grid in its own subset
/// graph, and ranks them per condition by `S_S`.
pub fn query_points(config: &RunConfig, points: &[(String, Vec<f64>)]) -> Result<QueryResult> {
    if points.is_empty() {
        return Err(Error::Config("no query points given".into()));
    }
    for (name, p) in points {
        if !(p.len() == 2 || p.len() == 3) || !p.iter().all(|v| v.is_finite()) {
            return Err(Error::Config(format!("point {name}: expected x,y or x,y,z")));
        }
    }
    config.validate().map_err(|e| e.in_stage("config"))?;
    let conditions = resolve_conditions(config).map_err(|e| e.in_stage("attenuation"))?;
    let scene = load_scene(config).map_err(|e| e.in_stage("mesh"))?;
    parallel::with_threads(config.threads, || {
        let nodes =
            parallel::generate_grid(&scene.spec, &scene.bvh).map_err(|e| e.in_stage("grid"))?;
        let radius = scene.spec.spacing / 2.0;
        let options = GraphOptions {
            max_distance: config.max_los,
        };
        let sources: Vec<u32> = (0..nodes.len() as u32).collect();
        let mut queried = Vec::new();
        let mut analyses = Vec::new();
        for (name, p) in points {
            let id = snap_to_node(&nodes, p, radius).map_err(|e| e.in_stage("query"))?;
            let graph = parallel::build_subset_graph(&nodes, &sources, &[id], &scene.bvh, &options)
                .map_err(|e| e.in_stage("graph"))?;
            let fields = conditions
                .iter()
                .map(|c| {
                    let w = weight_edges(&graph, &c.coefficient());
                    ScoreField::compute(&graph, &w, config.average).map_err(Error::from)
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.in_stage("score"))?;
            let pos = nodes[id as usize].position;
            queried.push(QueriedPoint {
                name: name.clone(),
                requested: p.clone(),
                node_id: id,
                position: [pos.x, pos.y, pos.z],
            });
            analyses.push(PointAnalysis {
                node_id: id,
                graph,
                fields,
            });
        }
        let conditions = conditions
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let mut ranking: Vec<QueryEntry> = queried
                    .iter()
                    .zip(&analyses)
                    .map(|(q, a)| {
                        let i = a.node_id as usize;
                        QueryEntry {
                            point: q.name.clone(),
                            degree: a.fields[k].degree[i],
                            sum: a.fields[k].sum[i],
                            avg: a.fields[k].avg[i],
                        }
                    })
                    .collect();
                ranking.sort_by(|a, b| b.sum.total_cmp(&a.sum));
                QueryCondition {
                    resolved: c.clone(),
                    ranking,
                }
            })
            .collect();
        Ok(QueryResult {
            report: QueryReport {
                points: queried,
                conditions,
            },
            nodes,
            spec: scene.spec,
            points: analyses,
        })
    })?
}

/// Files for a query: the report plus one score field per point and
/// condition.
pub fn query_artifacts(result: &QueryResult) -> Artifacts {
    let mut out = Artifacts::default();
    out.add("query.json".into(), |w| {
        serde_json::to_writer_pretty(&mut *w, &result.report)?;
        writeln!(w)
    });
    out.add(NODES_FILE.into(), |w| write_nodes_csv(w, &result.nodes));
    for (q, a) in result.report.points.iter().zip(&result.points) {
        for (c, f) in result.report.conditions.iter().zip(&a.fields) {
            let name = format!("field-{}-{}.csv", q.name, c.resolved.label);
            out.add(name, |w| write_scores_csv(w, f));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: u32, x: f64, y: f64, z: f64) -> Node {
        Node {
            id,
            position: weathervis_core::Vec3::new(x, y, z),
        }
    }

    #[test]
    fn snapping() {
        let nodes = [node(0, 0.5, 0.5, 1.7), node(1, 1.5, 0.5, 1.7), node(2, 1.5, 0.5, 11.7)];
        assert_eq!(snap_to_node(&nodes, &[0.6, 0.4], 0.5).unwrap(), 0);
        assert_eq!(snap_to_node(&nodes, &[1.0, 0.5], 0.5).unwrap(), 0);
        assert_eq!(snap_to_node(&nodes, &[1.5, 0.5, 12.0], 0.5).unwrap(), 2);
        assert_eq!(snap_to_node(&nodes, &[1.5, 0.5, 0.0], 0.5).unwrap(), 1);
        assert!(matches!(
            snap_to_node(&nodes, &[5.0, 5.0], 0.5),
            Err(Error::NoNodeNear { .. })
        ));
    }

    #[test]
    fn commit_cleans_up_on_failure() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        let mut a = Artifacts::default();
        a.add("a.txt".into(), |w| w.write_all(b"a"));
        a.add("missing/b.txt".into(), |w| w.write_all(b"b"));
        assert!(a.commit(&out).is_err());
        assert!(!out.exists());
    }

}
