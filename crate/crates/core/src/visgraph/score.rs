use alloc::vec::Vec;

use super::VisibilityGraph;
use crate::attenuation::AttenuationCoefficient;
use crate::{Error, Result};

/// Per-edge contrast ratios `exp(−σ·d)`, aligned with
/// [`VisibilityGraph::neighbor_array`].
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights {
    weights: Vec<f64>,
    coefficient: AttenuationCoefficient,
}

impl EdgeWeights {
    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn coefficient(&self) -> &AttenuationCoefficient {
        &self.coefficient
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Weights of the edges incident to `node`.
    pub fn of_node<'a>(&'a self, graph: &VisibilityGraph, node: usize) -> &'a [f64] {
        let offsets = graph.offsets();
        &self.weights[offsets[node]..offsets[node + 1]]
    }

    fn check(&self, graph: &VisibilityGraph) -> Result<()> {
        if self.weights.len() == graph.neighbor_array().len() {
            Ok(())
        } else {
            Err(Error::WeightMismatch {
                weights: self.weights.len(),
                edges: graph.neighbor_array().len(),
            })
        }
    }
}

/// Applies one attenuation coefficient to every stored edge distance. The
/// graph is only read, so several conditions can share it.
pub fn weight_edges(graph: &VisibilityGraph, coefficient: &AttenuationCoefficient) -> EdgeWeights {
    let sigma = coefficient.sigma;
    EdgeWeights {
        weights: graph
            .distance_array()
            .iter()
            .map(|&d| libm::exp(-sigma * d))
            .collect(),
        coefficient: *coefficient,
    }
}

/// Number of visible nodes per node.
pub fn degree(graph: &VisibilityGraph) -> Vec<u32> {
    (0..graph.node_count())
        .map(|i| graph.degree_of(i) as u32)
        .collect()
}

/// `S_S`: sum of incident edge weights, accumulated in neighbor-id order.
pub fn score_sum(graph: &VisibilityGraph, weights: &EdgeWeights) -> Result<Vec<f64>> {
    weights.check(graph)?;
    Ok((0..graph.node_count())
        .map(|i| weights.of_node(graph, i).iter().sum())
        .collect())
}

/// `S_A`: mean incident edge weight; 0 for isolated nodes.
pub fn score_avg(graph: &VisibilityGraph, weights: &EdgeWeights) -> Result<Vec<f64>> {
    let sums = score_sum(graph, weights)?;
    Ok(sums
        .into_iter()
        .enumerate()
        .map(|(i, s)| mean(s, graph.degree_of(i)))
        .collect())
}

/// Variant of [`score_avg`] that divides by the number of candidate nodes
/// tested against each node (see [`VisibilityGraph::candidate_counts`])
/// instead of the number of visible ones.
pub fn score_avg_over_candidates(
    graph: &VisibilityGraph,
    weights: &EdgeWeights,
) -> Result<Vec<f64>> {
    let sums = score_sum(graph, weights)?;
    Ok(sums
        .into_iter()
        .zip(graph.candidate_counts())
        .map(|(s, c)| mean(s, c))
        .collect())
}

fn mean(sum: f64, count: usize) -> f64 {
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Divisor used for `S_A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum AverageNormalization {
    /// Visible neighbors, `|N(v)|`.
    #[default]
    Neighbors,
    /// Every node tested against `v`, visible or not.
    Candidates,
}

/// Scores of every node under one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreField {
    pub degree: Vec<u32>,
    pub sum: Vec<f64>,
    pub avg: Vec<f64>,
    pub coefficient: AttenuationCoefficient,
    pub normalization: AverageNormalization,
}

impl ScoreField {
    pub fn compute(
        graph: &VisibilityGraph,
        weights: &EdgeWeights,
        normalization: AverageNormalization,
    ) -> Result<ScoreField> {
        let avg = match normalization {
            AverageNormalization::Neighbors => score_avg(graph, weights)?,
            AverageNormalization::Candidates => score_avg_over_candidates(graph, weights)?,
        };
        Ok(ScoreField {
            degree: degree(graph),
            sum: score_sum(graph, weights)?,
            avg,
            coefficient: *weights.coefficient(),
            normalization,
        })
    }

    pub fn len(&self) -> usize {
        self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }
}
