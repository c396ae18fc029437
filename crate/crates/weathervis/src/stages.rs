//! Single pipeline steps, each reading the files the previous step wrote:
//! `grid` → `nodes.csv` + `grid.json`, `graph` → graph file, `weight` →
//! `weights-<label>.csv`, `score` → `scores-<label>.csv`, `heatmap` → images.

use std::io::Write;
use std::path::Path;

use weathervis_core::visgraph::{weight_edges, GraphOptions};
use weathervis_core::{GridSpec, Node, ScoreField, VisibilityGraph};

use crate::config::{Metric, RunConfig, ScaleMode};
use crate::error::{Error, Result};
use crate::formats::{
    read_graph_file, read_nodes_file, read_scores_file, write_graph, write_nodes_csv,
    write_scores_csv, write_weights_csv, ScoreRow,
};
use crate::parallel;
use crate::pipeline::{
    load_scene, ranges_of, resolve_conditions, snap_to_node, Artifacts, ResolvedCondition,
    NODES_FILE,
};

pub const GRID_FILE: &str = "grid.json";

pub fn weights_file_name(label: &str) -> String {
    format!("weights-{label}.csv")
}

/// Samples the lattice and records the resolved grid spec.
pub fn grid(config: &RunConfig) -> Result<Artifacts> {
    config.validate_scene().map_err(|e| e.in_stage("config"))?;
    let scene = load_scene(config).map_err(|e| e.in_stage("mesh"))?;
    let nodes = parallel::with_threads(config.threads, || {
        parallel::generate_grid(&scene.spec, &scene.bvh)
    })?
    .map_err(|e| e.in_stage("grid"))?;
    let mut out = Artifacts::default();
    out.add(NODES_FILE.into(), |w| write_nodes_csv(w, &nodes));
    out.add(GRID_FILE.into(), |w| {
        serde_json::to_writer_pretty(&mut *w, &scene.spec)?;
        writeln!(w)
    });
    Ok(out)
}

pub fn read_grid_file(path: impl AsRef<Path>) -> Result<GridSpec> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Format {
        path: path.into(),
        message: e.to_string(),
    })
}

/// Builds the graph over `nodes` (or a freshly sampled grid), all-to-all or
/// toward the configured subset targets.
pub fn graph(config: &RunConfig, nodes: Option<&Path>) -> Result<Artifacts> {
    config.validate_scene().map_err(|e| e.in_stage("config"))?;
    let scene = load_scene(config).map_err(|e| e.in_stage("mesh"))?;
    let graph = parallel::with_threads(config.threads, || -> Result<VisibilityGraph> {
        let nodes = match nodes {
            Some(path) => read_nodes_file(path).map_err(|e| e.in_stage("nodes"))?,
            None => parallel::generate_grid(&scene.spec, &scene.bvh)
                .map_err(|e| e.in_stage("grid"))?,
        };
        let options = GraphOptions {
            max_distance: config.max_los,
        };
        let graph = match &config.subset {
            None => parallel::build_visibility_graph(&nodes, &scene.bvh, &options),
            Some(subset) => {
                let radius = scene.spec.spacing / 2.0;
                let targets = subset
                    .targets
                    .iter()
                    .map(|p| snap_to_node(&nodes, p, radius))
                    .collect::<Result<Vec<u32>>>()
                    .map_err(|e| e.in_stage("subset"))?;
                let sources: Vec<u32> = (0..nodes.len() as u32).collect();
                parallel::build_subset_graph(&nodes, &sources, &targets, &scene.bvh, &options)
            }
        };
        graph.map_err(|e| e.in_stage("graph"))
    })??;
    let mut out = Artifacts::default();
    out.add(config.graph_format.file_name().into(), |w| {
        write_graph(w, &graph, config.graph_format)
    });
    Ok(out)
}

fn graph_and_conditions(
    config: &RunConfig,
    graph: &Path,
) -> Result<(VisibilityGraph, Vec<ResolvedCondition>)> {
    let conditions = resolve_conditions(config).map_err(|e| e.in_stage("attenuation"))?;
    let graph = read_graph_file(graph).map_err(|e| e.in_stage("graph"))?;
    Ok((graph, conditions))
}

/// Per-edge weights under each condition.
pub fn weight(config: &RunConfig, graph: &Path) -> Result<Artifacts> {
    let (graph, conditions) = graph_and_conditions(config, graph)?;
    let mut out = Artifacts::default();
    for c in &conditions {
        let w = weight_edges(&graph, &c.coefficient());
        out.add(weights_file_name(&c.label), |out| write_weights_csv(out, &graph, &w));
    }
    Ok(out)
}

/// Node scores under each condition.
pub fn score(config: &RunConfig, graph: &Path) -> Result<Artifacts> {
    let (graph, conditions) = graph_and_conditions(config, graph)?;
    let mut out = Artifacts::default();
    for c in &conditions {
        let w = weight_edges(&graph, &c.coefficient());
        let field = ScoreField::compute(&graph, &w, config.average).map_err(|e| Error::from(e).in_stage("score"))?;
        out.add(crate::pipeline::scores_file_name(&c.label), |out| write_scores_csv(out, &field));
    }
    Ok(out)
}

/// Condition label of a `scores-<label>.csv` path, or its file stem.
pub fn label_of_scores_file(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    stem.strip_prefix("scores-").map(str::to_owned).unwrap_or(stem)
}

fn row_values(rows: &[ScoreRow], metric: Metric) -> Vec<f64> {
    rows.iter()
        .map(|r| match metric {
            Metric::Degree => r.degree as f64,
            Metric::Sum => r.sum,
            Metric::Avg => r.avg,
        })
        .collect()
}

/// Images for score files that belong to `nodes` on the lattice `grid`.
pub fn heatmap(
    grid: &Path,
    nodes: &Path,
    scores: &[&Path],
    metrics: &[Metric],
    scale: ScaleMode,
) -> Result<Artifacts> {
    if scores.is_empty() || metrics.is_empty() {
        return Err(Error::Config("heatmap needs at least one score file and metric".into()));
    }
    let spec = read_grid_file(grid)?;
    let nodes: Vec<Node> = read_nodes_file(nodes)?;
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for &path in scores {
        let rows = read_scores_file(path)?;
        let aligned = rows.len() == nodes.len()
            && rows.iter().enumerate().all(|(i, r)| r.node_id as usize == i);
        if !aligned {
            return Err(Error::Format {
                path: path.into(),
                message: format!("expected one row per node, ids 0..{}", nodes.len()),
            });
        }
        labels.push(label_of_scores_file(path));
        values.push(metrics.iter().map(|&m| row_values(&rows, m)).collect::<Vec<_>>());
    }
    let ranges = ranges_of(&values, scale);
    let mut out = Artifacts::default();
    for ((label, per_metric), ranges) in labels.iter().zip(&values).zip(&ranges) {
        for ((&metric, v), &range) in metrics.iter().zip(per_metric).zip(ranges) {
            out.add_heatmap(&spec, &nodes, label, metric, v, range, scale)
                .map_err(|e| e.in_stage("heatmap"))?;
        }
    }
    Ok(out)
}
