use alloc::vec;
use alloc::vec::Vec;

use super::{GraphKind, VisibilityGraph};
use crate::geometry::{Bvh, Vec3};
use crate::sampling::Node;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GraphOptions {
    /// Skip pairs farther apart than this (m). `None` tests every pair.
    pub max_distance: Option<f64>,
}

/// The set of node pairs to test, enumerated row by row as `(i, j > i)`.
#[derive(Debug, Clone)]
pub enum PairPlan {
    AllToAll { nodes: usize },
    Subset {
        sources: Vec<u32>,
        targets: Vec<u32>,
        in_sources: Vec<bool>,
        in_targets: Vec<bool>,
    },
}

impl PairPlan {
    pub fn all_to_all(nodes: usize) -> PairPlan {
        PairPlan::AllToAll { nodes }
    }

    /// Sorts and deduplicates both id lists.
    pub fn subset(nodes: usize, sources: &[u32], targets: &[u32]) -> Result<PairPlan> {
        let normalize = |ids: &[u32]| -> Result<Vec<u32>> {
            if let Some(&bad) = ids.iter().find(|&&i| i as usize >= nodes) {
                return Err(Error::NodeOutOfRange(bad));
            }
            let mut v = ids.to_vec();
            v.sort_unstable();
            v.dedup();
            Ok(v)
        };
        let sources = normalize(sources)?;
        let targets = normalize(targets)?;
        if sources.is_empty() || targets.is_empty() {
            return Err(Error::InvalidArgument {
                name: "subset",
                reason: "source and target sets must be non-empty",
            });
        }
        let mut in_sources = vec![false; nodes];
        let mut in_targets = vec![false; nodes];
        sources.iter().for_each(|&i| in_sources[i as usize] = true);
        targets.iter().for_each(|&i| in_targets[i as usize] = true);
        Ok(PairPlan::Subset {
            sources,
            targets,
            in_sources,
            in_targets,
        })
    }

    pub fn node_count(&self) -> usize {
        match self {
            PairPlan::AllToAll { nodes } => *nodes,
            PairPlan::Subset { in_sources, .. } => in_sources.len(),
        }
    }

    pub fn kind(&self) -> GraphKind {
        match self {
            PairPlan::AllToAll { .. } => GraphKind::AllToAll,
            PairPlan::Subset {
                sources, targets, ..
            } => GraphKind::Subset {
                sources: sources.clone(),
                targets: targets.clone(),
            },
        }
    }

    /// Ascending partners `j > i` that row `i` must test.
    pub fn partners_after(&self, i: usize) -> Vec<u32> {
        match self {
            PairPlan::AllToAll { nodes } => (i as u32 + 1..*nodes as u32).collect(),
            PairPlan::Subset {
                sources,
                targets,
                in_sources,
                in_targets,
            } => {
                let above = |ids: &[u32]| -> Vec<u32> {
                    let start = ids.partition_point(|&j| j as usize <= i);
                    ids[start..].to_vec()
                };
                match (in_sources[i], in_targets[i]) {
                    (true, true) => {
                        let mut merged = above(targets);
                        merged.extend(above(sources));
                        merged.sort_unstable();
                        merged.dedup();
                        merged
                    }
                    (true, false) => above(targets),
                    (false, true) => above(sources),
                    (false, false) => Vec::new(),
                }
            }
        }
    }
}

/// Visible partners `j > i` of node `i` with their distances.
///
/// This is the unit of work for parallel drivers: rows are independent and
/// [`VisibilityGraph::from_upper_rows`] merges them in index order, so the
/// result does not depend on how rows were scheduled.
pub fn visible_row(
    plan: &PairPlan,
    i: usize,
    positions: &[Vec3],
    bvh: &Bvh,
    options: &GraphOptions,
) -> Vec<(u32, f64)> {
    let p = positions[i];
    let max = options.max_distance.unwrap_or(f64::INFINITY);
    plan.partners_after(i)
        .into_iter()
        .filter_map(|j| {
            let q = positions[j as usize];
            let d = p.distance(q);
            (d <= max && !bvh.occluded(p, q)).then_some((j, d))
        })
        .collect()
}

pub(crate) fn positions_of(nodes: &[Node]) -> Result<Vec<Vec3>> {
    if let Some(n) = nodes.iter().enumerate().find(|(i, n)| n.id as usize != *i) {
        return Err(Error::NodeOutOfRange(n.1.id));
    }
    if nodes.iter().any(|n| !n.position.is_finite()) {
        return Err(Error::InvalidArgument {
            name: "nodes",
            reason: "node positions must be finite",
        });
    }
    Ok(nodes.iter().map(|n| n.position).collect())
}

/// All-to-all visibility graph: an edge for every unobstructed pair.
pub fn build_visibility_graph(nodes: &[Node], bvh: &Bvh) -> Result<VisibilityGraph> {
    build_visibility_graph_with(nodes, bvh, &GraphOptions::default())
}

pub fn build_visibility_graph_with(
    nodes: &[Node],
    bvh: &Bvh,
    options: &GraphOptions,
) -> Result<VisibilityGraph> {
    if nodes.len() < 2 {
        return Err(Error::TooFewNodes {
            required: 2,
            actual: nodes.len(),
        });
    }
    let plan = PairPlan::all_to_all(nodes.len());
    build_with_plan(nodes, bvh, &plan, options)
}

/// Subset graph: edges only between `sources` and `targets` members.
pub fn build_subset_graph(
    nodes: &[Node],
    sources: &[u32],
    targets: &[u32],
    bvh: &Bvh,
) -> Result<VisibilityGraph> {
    build_subset_graph_with(nodes, sources, targets, bvh, &GraphOptions::default())
}

pub fn build_subset_graph_with(
    nodes: &[Node],
    sources: &[u32],
    targets: &[u32],
    bvh: &Bvh,
    options: &GraphOptions,
) -> Result<VisibilityGraph> {
    let plan = PairPlan::subset(nodes.len(), sources, targets)?;
    build_with_plan(nodes, bvh, &plan, options)
}

fn build_with_plan(
    nodes: &[Node],
    bvh: &Bvh,
    plan: &PairPlan,
    options: &GraphOptions,
) -> Result<VisibilityGraph> {
    let positions = positions_of(nodes)?;
    let rows = (0..positions.len())
        .map(|i| visible_row(plan, i, &positions, bvh, options))
        .collect();
    VisibilityGraph::from_upper_rows(positions, rows, plan.kind())
}
