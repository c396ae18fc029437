//! Multi-threaded drivers for grid sampling and graph construction.
//!
//! Work is split by lattice row or by graph row and reassembled in index
//! order, so results are identical to the sequential core functions for any
//! thread count.

use rayon::prelude::*;
use weathervis_core::sampling::{number_nodes, sample_row};
use weathervis_core::visgraph::{visible_row, GraphOptions, PairPlan};
use weathervis_core::{Bvh, GridSpec, Node, VisibilityGraph};

use crate::error::{Error, Result};

/// Runs `f` on a pool with `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Config("thread count must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

pub fn generate_grid(spec: &GridSpec, bvh: &Bvh) -> Result<Vec<Node>> {
    spec.validate()?;
    let rows: Vec<_> = (0..spec.rows())
        .into_par_iter()
        .map(|row| sample_row(spec, bvh, row))
        .collect();
    Ok(number_nodes(rows.into_iter().flatten())?)
}

pub fn build_graph(
    plan: &PairPlan,
    nodes: &[Node],
    bvh: &Bvh,
    options: &GraphOptions,
) -> Result<VisibilityGraph> {
    if nodes.len() != plan.node_count() {
        return Err(Error::Config(format!(
            "pair plan covers {} nodes but {} were given",
            plan.node_count(),
            nodes.len()
        )));
    }
    if let Some((_, n)) = nodes.iter().enumerate().find(|(i, n)| n.id as usize != *i) {
        return Err(weathervis_core::Error::NodeOutOfRange(n.id).into());
    }
    let positions: Vec<_> = nodes.iter().map(|n| n.position).collect();
    let rows: Vec<_> = (0..positions.len())
        .into_par_iter()
        .map(|i| visible_row(plan, i, &positions, bvh, options))
        .collect();
    Ok(VisibilityGraph::from_upper_rows(positions, rows, plan.kind())?)
}

pub fn build_visibility_graph(
    nodes: &[Node],
    bvh: &Bvh,
    options: &GraphOptions,
) -> Result<VisibilityGraph> {
    if nodes.len() < 2 {
        return Err(weathervis_core::Error::TooFewNodes {
            required: 2,
            actual: nodes.len(),
        }
        .into());
    }
    build_graph(&PairPlan::all_to_all(nodes.len()), nodes, bvh, options)
}

pub fn build_subset_graph(
    nodes: &[Node],
    sources: &[u32],
    targets: &[u32],
    bvh: &Bvh,
    options: &GraphOptions,
) -> Result<VisibilityGraph> {
    let plan = PairPlan::subset(nodes.len(), sources, targets)?;
    build_graph(&plan, nodes, bvh, options)
}
