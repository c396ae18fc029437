//! Visibility graphs and their weather-dependent scores.
//!
//! A [`VisibilityGraph`] stores, for every mutually visible node pair, the
//! Euclidean distance between the two nodes. Weights are never stored in
//! the graph: [`weight_edges`] maps distances to contrast ratios for one
//! attenuation coefficient, so any number of conditions can be applied to a
//! single set of raycasts.

mod build;
mod graph;
mod score;

pub use self::build::{
    build_subset_graph, build_subset_graph_with, build_visibility_graph,
    build_visibility_graph_with, visible_row, GraphOptions, PairPlan,
};
pub use self::graph::{GraphKind, VisibilityGraph};
pub use self::score::{
    degree, score_avg, score_avg_over_candidates, score_sum, weight_edges, AverageNormalization,
    EdgeWeights, ScoreField,
};
