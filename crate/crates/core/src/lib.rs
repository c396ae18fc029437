//! Weather-weighted visibility graphs.
//!
//! This crate is the allocation-only core: triangle meshes and a bounding
//! volume hierarchy for line-of-sight queries, lattice sampling of walkable
//! surfaces, visibility graphs stored as distances in compressed sparse form,
//! and atmospheric attenuation coefficients (clear air, rain, snow, and fog via
//! Mie scattering) that turn those distances into contrast-ratio edge weights.
//!
//! Everything here is a pure function of its inputs. File formats, the CLI
//! and parallel drivers live in the `weathervis` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod attenuation;
pub mod geometry;
pub mod quadrature;
pub mod sampling;
pub mod visgraph;

mod error;

pub use crate::error::Error;

pub use crate::attenuation::{
    contrast_ratio, koschmieder_distance, resolve_condition, resolve_condition_with,
    sigma_fog, sigma_rain, sigma_snow, AttenuationCoefficient, AttenuationConfig,
    ConditionKind, FogProfile, SnowKind, WeatherCondition,
};
pub use crate::geometry::{Aabb, Bvh, RayHit, TriangleMesh, Vec3, SELF_INTERSECTION_EPSILON};
pub use crate::sampling::{generate_grid, GridSpec, Node};
pub use crate::visgraph::{
    build_subset_graph, build_visibility_graph, EdgeWeights, GraphKind, ScoreField,
    VisibilityGraph,
};

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = core::result::Result<T, E>;
