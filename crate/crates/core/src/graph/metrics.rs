use std::collections::VecDeque;

use serde::Serialize;

use super::{GraphError, GraphPath, IncidenceGraph, VertexId};

pub(crate) const UNREACHED: usize = usize::MAX;

/// Breadth-first distances from `src`; unreachable vertices hold [`UNREACHED`].
pub(crate) fn bfs(g: &IncidenceGraph, src: usize) -> Vec<usize> {
    bfs_within(g, src, None)
}

/// BFS restricted to vertices with `mask[v]` set (when a mask is given).
pub(crate) fn bfs_within(g: &IncidenceGraph, src: usize, mask: Option<&[bool]>) -> Vec<usize> {
    let mut dist = vec![UNREACHED; g.vertex_count()];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(v) = queue.pop_front() {
        for &w in g.neighbors(v) {
            if dist[w] == UNREACHED && mask.is_none_or(|m| m[w]) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

pub(crate) fn all_pairs(g: &IncidenceGraph) -> Vec<Vec<usize>> {
    (0..g.vertex_count()).map(|s| bfs(g, s)).collect()
}

fn finite(d: usize) -> Option<usize> {
    (d != UNREACHED).then_some(d)
}

/// Shortest-path length between two vertices; `None` means infinite.
pub fn distance(g: &IncidenceGraph, a: &VertexId, b: &VertexId) -> Result<Option<usize>, GraphError> {
    let (i, j) = (g.require(a)?, g.require(b)?);
    Ok(finite(bfs(g, i)[j]))
}

/// Length of a shortest cycle; `None` for forests.
pub fn girth(g: &IncidenceGraph) -> Option<usize> {
    super::shortest_cycle(g).map(|c| c.len())
}

/// Largest distance over all vertex pairs; `None` when disconnected.
/// The empty graph has diameter 0.
pub fn diameter(g: &IncidenceGraph) -> Option<usize> {
    let mut best = 0;
    for s in 0..g.vertex_count() {
        for d in bfs(g, s) {
            if d == UNREACHED {
                return None;
            }
            best = best.max(d);
        }
    }
    Some(best)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Geodesics {
    /// Number of shortest paths, saturating at `u64::MAX`.
    pub count: u64,
    pub unique: bool,
    /// Lexicographically least shortest path (by vertex order).
    pub witness: GraphPath,
}

/// Counts shortest `a`–`b` paths and returns one of them.
pub fn geodesics(g: &IncidenceGraph, a: &VertexId, b: &VertexId) -> Result<Geodesics, GraphError> {
    let (i, j) = (g.require(a)?, g.require(b)?);
    geodesics_idx(g, i, j).ok_or_else(|| GraphError::Disconnected(a.clone(), b.clone()))
}

pub(crate) fn geodesics_idx(g: &IncidenceGraph, a: usize, b: usize) -> Option<Geodesics> {
    let (count, path) = geodesic_count_and_path(g, a, b, None)?;
    Some(Geodesics {
        count,
        unique: count == 1,
        witness: GraphPath(path.into_iter().map(|v| g.id(v).clone()).collect()),
    })
}

/// Path count and lexicographically least geodesic, optionally inside a mask.
pub(crate) fn geodesic_count_and_path(
    g: &IncidenceGraph,
    a: usize,
    b: usize,
    mask: Option<&[bool]>,
) -> Option<(u64, Vec<usize>)> {
    let from_a = bfs_within(g, a, mask);
    if from_a[b] == UNREACHED {
        return None;
    }
    let from_b = bfs_within(g, b, mask);
    let mut order: Vec<usize> = (0..g.vertex_count()).filter(|&v| from_a[v] != UNREACHED).collect();
    order.sort_by_key(|&v| from_a[v]);
    let mut count = vec![0u64; g.vertex_count()];
    count[a] = 1;
    for &v in &order {
        if v == a {
            continue;
        }
        let mut c = 0u64;
        for &w in g.neighbors(v) {
            if from_a[w] != UNREACHED && from_a[w] + 1 == from_a[v] {
                c = c.saturating_add(count[w]);
            }
        }
        count[v] = c;
    }
    let mut path = vec![a];
    let mut cur = a;
    while cur != b {
        cur = *g
            .neighbors(cur)
            .iter()
            .find(|&&w| from_b[w] != UNREACHED && from_b[w] + 1 == from_b[cur])
            .expect("a geodesic continues towards b");
        path.push(cur);
    }
    Some((count[b], path))
}
