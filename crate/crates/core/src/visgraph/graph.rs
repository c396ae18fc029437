use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::Vec3;
use crate::{Error, Result};

/// Which node pairs were tested when the graph was built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphKind {
    /// Every unordered pair of distinct nodes.
    AllToAll,
    /// Pairs with one node in `sources` and the other in `targets`. Both
    /// lists are sorted and deduplicated.
    Subset { sources: Vec<u32>, targets: Vec<u32> },
}

/// Undirected visibility graph in compressed sparse row form.
///
/// Each undirected edge is stored twice (once per endpoint) with the same
/// distance; neighbor lists are sorted by id and never contain the node
/// itself.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityGraph {
    positions: Vec<Vec3>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    distances: Vec<f64>,
    kind: GraphKind,
}

/// Distances read back from storage may differ from recomputed ones by at
/// most this much (m).
const DISTANCE_TOLERANCE: f64 = 1e-6;

impl VisibilityGraph {
    /// Assembles a graph from per-node upper-triangle rows: `rows[i]` lists
    /// `(j, distance)` for visible partners `j > i`, in ascending `j`.
    pub fn from_upper_rows(
        positions: Vec<Vec3>,
        rows: Vec<Vec<(u32, f64)>>,
        kind: GraphKind,
    ) -> Result<VisibilityGraph> {
        let n = positions.len();
        if rows.len() != n {
            return Err(Error::InvalidArgument {
                name: "rows",
                reason: "need exactly one row per node",
            });
        }
        let mut degree = vec![0usize; n];
        for (i, row) in rows.iter().enumerate() {
            let mut prev = i as u32;
            for &(j, _) in row {
                if j <= prev || j as usize >= n {
                    return Err(Error::InvalidArgument {
                        name: "rows",
                        reason: "row entries must be ascending ids above the row index",
                    });
                }
                prev = j;
                degree[i] += 1;
                degree[j as usize] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let total = offsets[n];
        let mut neighbors = vec![0u32; total];
        let mut distances = vec![0.0f64; total];
        let mut cursor: Vec<usize> = offsets[..n].to_vec();
        // Processing rows in ascending i leaves every neighbor list sorted:
        // partners below k arrive first, in order, then row k itself.
        for (i, row) in rows.into_iter().enumerate() {
            for (j, d) in row {
                let j = j as usize;
                neighbors[cursor[i]] = j as u32;
                distances[cursor[i]] = d;
                cursor[i] += 1;
                neighbors[cursor[j]] = i as u32;
                distances[cursor[j]] = d;
                cursor[j] += 1;
            }
        }
        Ok(VisibilityGraph {
            positions,
            offsets,
            neighbors,
            distances,
            kind,
        })
    }

    /// Rebuilds a graph from its stored arrays, checking every structural
    /// invariant.
    pub fn from_parts(
        positions: Vec<Vec3>,
        offsets: Vec<usize>,
        neighbors: Vec<u32>,
        distances: Vec<f64>,
        kind: GraphKind,
    ) -> Result<VisibilityGraph> {
        let n = positions.len();
        let bad = |reason: &'static str| Error::InvalidArgument {
            name: "graph",
            reason,
        };
        if offsets.len() != n + 1 || offsets[0] != 0 {
            return Err(bad("offset array must have n + 1 entries starting at 0"));
        }
        if offsets.windows(2).any(|w| w[0] > w[1]) || offsets[n] != neighbors.len() {
            return Err(bad("offsets must be non-decreasing and end at the edge count"));
        }
        if distances.len() != neighbors.len() {
            return Err(bad("distance and neighbor arrays differ in length"));
        }
        if let GraphKind::Subset { sources, targets } = &kind {
            let ok = |ids: &Vec<u32>| {
                !ids.is_empty()
                    && ids.windows(2).all(|w| w[0] < w[1])
                    && ids.iter().all(|&i| (i as usize) < n)
            };
            if !ok(sources) || !ok(targets) {
                return Err(bad("subset ids must be sorted, unique, and in range"));
            }
        }
        let graph = VisibilityGraph {
            positions,
            offsets,
            neighbors,
            distances,
            kind,
        };
        for i in 0..n {
            let ns = graph.neighbors(i);
            if ns.windows(2).any(|w| w[0] >= w[1]) {
                return Err(bad("neighbor lists must be strictly ascending"));
            }
            for (&j, &d) in ns.iter().zip(graph.distances(i)) {
                let j = j as usize;
                if j >= n || j == i {
                    return Err(bad("neighbor id out of range or a self-edge"));
                }
                let expected = graph.positions[i].distance(graph.positions[j]);
                if !((d - expected).abs() <= DISTANCE_TOLERANCE) {
                    return Err(bad("stored distance disagrees with node positions"));
                }
                match graph.neighbors(j).binary_search(&(i as u32)) {
                    Ok(k) if graph.distances(j)[k] == d => {}
                    _ => return Err(bad("adjacency is not symmetric")),
                }
            }
        }
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn kind(&self) -> &GraphKind {
        &self.kind
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// All neighbor ids, row by row.
    pub fn neighbor_array(&self) -> &[u32] {
        &self.neighbors
    }

    /// All edge distances, aligned with [`VisibilityGraph::neighbor_array`].
    pub fn distance_array(&self) -> &[f64] {
        &self.distances
    }

    pub fn neighbors(&self, node: usize) -> &[u32] {
        &self.neighbors[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn distances(&self, node: usize) -> &[f64] {
        &self.distances[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn degree_of(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    /// Distance of edge `(i, j)` if present.
    pub fn edge(&self, i: usize, j: usize) -> Option<f64> {
        let k = self.neighbors(i).binary_search(&(j as u32)).ok()?;
        Some(self.distances(i)[k])
    }

    /// Undirected edges `(i, j, distance)` with `i < j`, in row order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        (0..self.node_count()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .zip(self.distances(i))
                .filter(move |(&j, _)| j as usize > i)
                .map(move |(&j, &d)| (i as u32, j, d))
        })
    }

    /// Number of nodes each node was tested against: `n − 1` for an
    /// all-to-all graph, the size of the opposite set (minus itself) for a
    /// subset graph, and 0 for nodes outside both sets.
    pub fn candidate_counts(&self) -> Vec<usize> {
        let n = self.node_count();
        match &self.kind {
            GraphKind::AllToAll => vec![n.saturating_sub(1); n],
            GraphKind::Subset { sources, targets } => {
                let mut in_a = vec![false; n];
                let mut in_b = vec![false; n];
                sources.iter().for_each(|&i| in_a[i as usize] = true);
                targets.iter().for_each(|&i| in_b[i as usize] = true);
                let union = (0..n).filter(|&i| in_a[i] || in_b[i]).count();
                (0..n)
                    .map(|v| match (in_a[v], in_b[v]) {
                        (true, true) => union - 1,
                        (true, false) => targets.len(),
                        (false, true) => sources.len(),
                        (false, false) => 0,
                    })
                    .collect()
            }
        }
    }
}
