use thiserror::Error;

/// Errors reported by the core algorithms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mesh has no usable triangles")]
    EmptyMesh,

    #[error("triangle {triangle} references vertex {index} but the mesh has {vertex_count} vertices")]
    VertexIndexOutOfRange {
        triangle: usize,
        index: u32,
        vertex_count: usize,
    },

    #[error("vertex {0} has a non-finite coordinate")]
    NonFiniteVertex(usize),

    #[error("ray direction must be unit length (|d| = {length})")]
    NonNormalizedDirection { length: f64 },

    #[error("ray origin must be finite")]
    NonFiniteOrigin,

    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("no lattice point landed on a walkable surface")]
    EmptyGrid,

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument {
        name: &'static str,
        reason: &'static str,
    },

    #[error("visibility graph needs at least {required} nodes, got {actual}")]
    TooFewNodes { required: usize, actual: usize },

    #[error("node id {0} is out of range")]
    NodeOutOfRange(u32),

    #[error("Mie series did not converge for x = {size_parameter} (last term {last_term:e})")]
    MieNonConvergence { size_parameter: f64, last_term: f64 },

    #[error(
        "quadrature did not reach tolerance: estimate {estimate:e}, error estimate {error:e} after {intervals} intervals"
    )]
    QuadratureNonConvergence {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("weights do not match the graph ({weights} weights for {edges} stored edges)")]
    WeightMismatch { weights: usize, edges: usize },
}
