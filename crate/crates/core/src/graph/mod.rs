//! Finite bipartite incidence graphs.
//!
//! An [`IncidenceGraph`] is an immutable value: vertices are kept sorted by
//! id, adjacency lists are sorted index vectors, and every edge joins a
//! point to a line. Graphs are assembled through [`GraphBuilder`]; all
//! operations that "modify" a graph return a new one.

mod cycles;
mod embed;
mod io;
pub(crate) mod metrics;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cycles::{long_cycle_exists, shortest_cycle, CycleSearch};
pub(crate) use cycles::two_core;
pub use embed::{find_embedding, is_automorphism, isomorphic};
pub use io::{parse_gon, serialize_gon, ParseError, ParseErrorKind};
pub use metrics::{diameter, distance, geodesics, girth, Geodesics};

/// The two sides of the bipartition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Part {
    Point,
    Line,
}

impl Part {
    pub fn opposite(self) -> Part {
        match self {
            Part::Point => Part::Line,
            Part::Line => Part::Point,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Part::Point => 'P',
            Part::Line => 'L',
        }
    }

    /// Part reached after walking `steps` edges from `self`.
    pub fn after(self, steps: usize) -> Part {
        if steps % 2 == 0 {
            self
        } else {
            self.opposite()
        }
    }
}

/// Vertex identifier: a nonempty ASCII token without whitespace.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct VertexId(String);

impl VertexId {
    pub fn new(token: impl Into<String>) -> Result<Self, GraphError> {
        let token = token.into();
        if token.is_empty()
            || !token.is_ascii()
            || token.chars().any(|c| c.is_ascii_whitespace() || c.is_ascii_control())
        {
            return Err(GraphError::InvalidId(token));
        }
        Ok(VertexId(token))
    }

    /// For ids assembled from already valid tokens.
    pub(crate) fn from_valid(token: String) -> Self {
        debug_assert!(VertexId::new(token.clone()).is_ok(), "invalid id {token:?}");
        VertexId(token)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for VertexId {
    type Error = GraphError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        VertexId::new(value)
    }
}

impl From<VertexId> for String {
    fn from(v: VertexId) -> String {
        v.0
    }
}

impl std::str::FromStr for VertexId {
    type Err = GraphError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VertexId::new(s)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Where a vertex came from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    #[default]
    Seed,
    /// Interior vertex of a clean arc added at `stage`; `position` counts from
    /// the first endpoint and lies in `1..=n-2`.
    Arc {
        stage: usize,
        endpoints: (VertexId, VertexId),
        position: usize,
    },
    /// Loose end attached at `stage`.
    Loose { stage: usize, attach: VertexId },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("invalid vertex id {0:?}")]
    InvalidId(String),
    #[error("gonality must be at least 3, got {0}")]
    InvalidGonality(usize),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("duplicate vertex {0}")]
    DuplicateVertex(VertexId),
    #[error("self-loop at {0}")]
    SelfLoop(VertexId),
    #[error("edge {0} {1} joins two vertices of the same part")]
    SamePart(VertexId, VertexId),
    #[error("duplicate edge {0} {1}")]
    DuplicateEdge(VertexId, VertexId),
    #[error("{0} and {1} lie in different components")]
    Disconnected(VertexId, VertexId),
}

/// Finite bipartite graph with point/line parts and per-vertex provenance.
#[derive(Clone, PartialEq, Eq)]
pub struct IncidenceGraph {
    n: usize,
    ids: Vec<VertexId>,
    parts: Vec<Part>,
    provenance: Vec<Provenance>,
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

impl fmt::Debug for IncidenceGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IncidenceGraph(n={}, |V|={}, |E|={}) {{", self.n, self.ids.len(), self.edge_count)?;
        for (i, j) in self.edges() {
            write!(f, " {}-{}", self.ids[i], self.ids[j])?;
        }
        write!(f, " }}")
    }
}

impl IncidenceGraph {
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        GraphBuilder::new(n).map(GraphBuilder::build)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Vertex ids in ascending order; position = vertex index.
    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> &VertexId {
        &self.ids[index]
    }

    pub fn index_of(&self, id: &VertexId) -> Option<usize> {
        self.ids.binary_search(id).ok()
    }

    pub fn index_of_str(&self, id: &str) -> Option<usize> {
        self.ids.binary_search_by(|v| v.as_str().cmp(id)).ok()
    }

    pub(crate) fn require(&self, id: &VertexId) -> Result<usize, GraphError> {
        self.index_of(id).ok_or_else(|| GraphError::UnknownVertex(id.clone()))
    }

    pub fn contains(&self, id: &VertexId) -> bool {
        self.index_of(id).is_some()
    }

    pub fn part(&self, index: usize) -> Part {
        self.parts[index]
    }

    pub fn part_of(&self, id: &VertexId) -> Option<Part> {
        self.index_of(id).map(|i| self.parts[i])
    }

    pub fn provenance(&self, index: usize) -> &Provenance {
        &self.provenance[index]
    }

    /// Sorted neighbour indices.
    pub fn neighbors(&self, index: usize) -> &[usize] {
        &self.adj[index]
    }

    pub fn degree(&self, index: usize) -> usize {
        self.adj[index].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn has_edge_ids(&self, a: &VertexId, b: &VertexId) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.has_edge(i, j),
            _ => false,
        }
    }

    /// Edges as index pairs `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn vertex_set(&self) -> BTreeSet<VertexId> {
        self.ids.iter().cloned().collect()
    }

    pub fn ids_of(&self, indices: impl IntoIterator<Item = usize>) -> BTreeSet<VertexId> {
        indices.into_iter().map(|i| self.ids[i].clone()).collect()
    }

    pub fn indices_of<'a>(
        &self,
        ids: impl IntoIterator<Item = &'a VertexId>,
    ) -> Result<Vec<usize>, GraphError> {
        ids.into_iter().map(|v| self.require(v)).collect()
    }

    /// Membership mask for a set of ids; unknown ids are an error.
    pub fn mask_of<'a>(
        &self,
        ids: impl IntoIterator<Item = &'a VertexId>,
    ) -> Result<Vec<bool>, GraphError> {
        let mut mask = vec![false; self.vertex_count()];
        for v in ids {
            mask[self.require(v)?] = true;
        }
        Ok(mask)
    }

    /// Same graph read with a different gonality parameter.
    pub fn with_n(&self, n: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::InvalidGonality(n));
        }
        let mut g = self.clone();
        g.n = n;
        Ok(g)
    }

    /// Induced subgraph on the vertices selected by `mask`.
    pub fn induced_mask(&self, mask: &[bool]) -> IncidenceGraph {
        let mut remap = vec![usize::MAX; self.vertex_count()];
        let mut ids = Vec::new();
        let mut parts = Vec::new();
        let mut provenance = Vec::new();
        for (i, &keep) in mask.iter().enumerate() {
            if keep {
                remap[i] = ids.len();
                ids.push(self.ids[i].clone());
                parts.push(self.parts[i]);
                provenance.push(self.provenance[i].clone());
            }
        }
        let mut adj = vec![Vec::new(); ids.len()];
        let mut edge_count = 0;
        for (i, nb) in self.adj.iter().enumerate() {
            if !mask[i] {
                continue;
            }
            for &j in nb {
                if mask[j] {
                    adj[remap[i]].push(remap[j]);
                    if j > i {
                        edge_count += 1;
                    }
                }
            }
        }
        IncidenceGraph { n: self.n, ids, parts, provenance, adj, edge_count }
    }

    /// Induced subgraph on a set of ids.
    pub fn induced<'a>(
        &self,
        ids: impl IntoIterator<Item = &'a VertexId>,
    ) -> Result<IncidenceGraph, GraphError> {
        Ok(self.induced_mask(&self.mask_of(ids)?))
    }

    /// Induced subgraph on the complement of `ids`.
    pub fn without<'a>(
        &self,
        ids: impl IntoIterator<Item = &'a VertexId>,
    ) -> Result<IncidenceGraph, GraphError> {
        let mask: Vec<bool> = self.mask_of(ids)?.into_iter().map(|b| !b).collect();
        Ok(self.induced_mask(&mask))
    }

    /// Builder pre-loaded with this graph.
    pub fn to_builder(&self) -> GraphBuilder {
        let mut b = GraphBuilder { n: self.n, vertices: BTreeMap::new(), edges: BTreeSet::new() };
        for i in 0..self.vertex_count() {
            b.vertices.insert(self.ids[i].clone(), (self.parts[i], self.provenance[i].clone()));
        }
        for (i, j) in self.edges() {
            b.edges.insert((self.ids[i].clone(), self.ids[j].clone()));
        }
        b
    }

    /// Whether vertex and edge sets agree, ignoring provenance and `n`.
    pub fn same_shape(&self, other: &IncidenceGraph) -> bool {
        self.ids == other.ids && self.parts == other.parts && self.adj == other.adj
    }

    /// Whether `self` is a subgraph of `other` on identical ids.
    pub fn is_subgraph_of(&self, other: &IncidenceGraph) -> bool {
        self.ids.iter().enumerate().all(|(i, v)| {
            other.index_of(v).is_some_and(|oi| other.parts[oi] == self.parts[i])
        }) && self.edges().all(|(i, j)| other.has_edge_ids(&self.ids[i], &self.ids[j]))
    }

    /// Connected components as sorted index lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.vertex_count()];
        let mut out = Vec::new();
        for s in 0..self.vertex_count() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut k = 0;
            while k < comp.len() {
                let v = comp[k];
                k += 1;
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Disjoint union; ids must not collide.
    pub fn disjoint_union(&self, other: &IncidenceGraph) -> Result<IncidenceGraph, GraphError> {
        let mut b = self.to_builder();
        b.absorb(other)?;
        Ok(b.build())
    }

    /// Graphviz rendering; points are circles, lines are boxes.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph gon {\n");
        for (i, v) in self.ids.iter().enumerate() {
            let shape = match self.parts[i] {
                Part::Point => "circle",
                Part::Line => "box",
            };
            s.push_str(&format!("  \"{v}\" [shape={shape}];\n"));
        }
        for (i, j) in self.edges() {
            s.push_str(&format!("  \"{}\" -- \"{}\";\n", self.ids[i], self.ids[j]));
        }
        s.push_str("}\n");
        s
    }
}

/// Single-owner builder for [`IncidenceGraph`].
#[derive(Clone, Debug)]
pub struct GraphBuilder {
    n: usize,
    vertices: BTreeMap<VertexId, (Part, Provenance)>,
    edges: BTreeSet<(VertexId, VertexId)>,
}

impl GraphBuilder {
    pub fn new(n: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::InvalidGonality(n));
        }
        Ok(GraphBuilder { n, vertices: BTreeMap::new(), edges: BTreeSet::new() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, id: &VertexId) -> bool {
        self.vertices.contains_key(id)
    }

    pub fn part_of(&self, id: &VertexId) -> Option<Part> {
        self.vertices.get(id).map(|(p, _)| *p)
    }

    pub fn vertex(&mut self, id: VertexId, part: Part) -> Result<&mut Self, GraphError> {
        self.vertex_with(id, part, Provenance::Seed)
    }

    pub fn vertex_with(
        &mut self,
        id: VertexId,
        part: Part,
        provenance: Provenance,
    ) -> Result<&mut Self, GraphError> {
        if self.vertices.contains_key(&id) {
            return Err(GraphError::DuplicateVertex(id));
        }
        self.vertices.insert(id, (part, provenance));
        Ok(self)
    }

    pub fn edge(&mut self, a: &VertexId, b: &VertexId) -> Result<&mut Self, GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(a.clone()));
        }
        let pa = self.part_of(a).ok_or_else(|| GraphError::UnknownVertex(a.clone()))?;
        let pb = self.part_of(b).ok_or_else(|| GraphError::UnknownVertex(b.clone()))?;
        if pa == pb {
            return Err(GraphError::SamePart(a.clone(), b.clone()));
        }
        let key = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        if !self.edges.insert(key) {
            return Err(GraphError::DuplicateEdge(a.clone(), b.clone()));
        }
        Ok(self)
    }

    pub fn remove_vertex(&mut self, id: &VertexId) -> bool {
        if self.vertices.remove(id).is_none() {
            return false;
        }
        self.edges.retain(|(a, b)| a != id && b != id);
        true
    }

    /// Copies every vertex and edge of `g`; shared ids must agree on part.
    /// Existing edges are kept once.
    pub fn absorb(&mut self, g: &IncidenceGraph) -> Result<&mut Self, GraphError> {
        for i in 0..g.vertex_count() {
            match self.vertices.get(g.id(i)) {
                Some((p, _)) if *p != g.part(i) => {
                    return Err(GraphError::DuplicateVertex(g.id(i).clone()))
                }
                Some(_) => {}
                None => {
                    self.vertices.insert(g.id(i).clone(), (g.part(i), g.provenance(i).clone()));
                }
            }
        }
        for (i, j) in g.edges() {
            self.edges.insert((g.id(i).clone(), g.id(j).clone()));
        }
        Ok(self)
    }

    pub fn build(self) -> IncidenceGraph {
        let mut ids = Vec::with_capacity(self.vertices.len());
        let mut parts = Vec::with_capacity(self.vertices.len());
        let mut provenance = Vec::with_capacity(self.vertices.len());
        for (id, (part, prov)) in self.vertices {
            ids.push(id);
            parts.push(part);
            provenance.push(prov);
        }
        let mut adj = vec![Vec::new(); ids.len()];
        let idx = |v: &VertexId| ids.binary_search(v).expect("edge endpoint registered");
        let mut edge_count = 0;
        for (a, b) in &self.edges {
            let (i, j) = (idx(a), idx(b));
            adj[i].push(j);
            adj[j].push(i);
            edge_count += 1;
        }
        for nb in &mut adj {
            nb.sort_unstable();
        }
        IncidenceGraph { n: self.n, ids, parts, provenance, adj, edge_count }
    }
}

/// Simple path (or, for cycles, the cyclic vertex order) as a vertex sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphPath(pub Vec<VertexId>);

impl GraphPath {
    pub fn len_edges(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    /// Consecutive vertices adjacent and no repetition.
    pub fn is_simple_path_in(&self, g: &IncidenceGraph) -> bool {
        let set: BTreeSet<_> = self.0.iter().collect();
        set.len() == self.0.len() && self.0.windows(2).all(|w| g.has_edge_ids(&w[0], &w[1]))
    }

    /// Closed walk through all vertices in order, returning to the start.
    pub fn is_simple_cycle_in(&self, g: &IncidenceGraph) -> bool {
        self.0.len() >= 4
            && self.is_simple_path_in(g)
            && g.has_edge_ids(&self.0[0], &self.0[self.0.len() - 1])
    }
}

impl fmt::Display for GraphPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self.0.iter().map(VertexId::as_str).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Shorthand constructors used across the crate and its tests.
pub mod shapes {
    use super::*;

    fn id(s: String) -> VertexId {
        VertexId::from_valid(s)
    }

    /// Path `x0 - x1 - ... - xk`, `x0` a point.
    pub fn path(n: usize, k: usize) -> IncidenceGraph {
        path_named(n, k, "x")
    }

    pub fn path_named(n: usize, k: usize, prefix: &str) -> IncidenceGraph {
        let mut b = GraphBuilder::new(n).expect("n >= 3");
        for i in 0..=k {
            b.vertex(id(format!("{prefix}{i}")), Part::Point.after(i)).unwrap();
        }
        for i in 0..k {
            b.edge(&id(format!("{prefix}{i}")), &id(format!("{prefix}{}", i + 1))).unwrap();
        }
        b.build()
    }

    /// Cycle `x0 .. x{len-1}`; `len` must be even and at least 4.
    pub fn cycle(n: usize, len: usize) -> IncidenceGraph {
        cycle_named(n, len, "x")
    }

    pub fn cycle_named(n: usize, len: usize, prefix: &str) -> IncidenceGraph {
        assert!(len >= 4 && len % 2 == 0, "cycle length must be even and >= 4");
        let mut b = GraphBuilder::new(n).expect("n >= 3");
        for i in 0..len {
            b.vertex(id(format!("{prefix}{i}")), Part::Point.after(i)).unwrap();
        }
        for i in 0..len {
            b.edge(&id(format!("{prefix}{i}")), &id(format!("{prefix}{}", (i + 1) % len)))
                .unwrap();
        }
        b.build()
    }

    /// Incidence graph of the Fano plane: points `p0..p6`, lines `l0..l6`,
    /// line `li = {p_i, p_{i+1}, p_{i+3}}` (indices mod 7).
    pub fn fano() -> IncidenceGraph {
        let mut b = GraphBuilder::new(3).unwrap();
        for i in 0..7 {
            b.vertex(id(format!("p{i}")), Part::Point).unwrap();
            b.vertex(id(format!("l{i}")), Part::Line).unwrap();
        }
        for i in 0..7 {
            for d in [0, 1, 3] {
                b.edge(&id(format!("l{i}")), &id(format!("p{}", (i + d) % 7))).unwrap();
            }
        }
        b.build()
    }

    /// Two hexagons `x0..x5` and `x0 x1 y2 y3 y4 y5` sharing the edge `x0 x1`.
    pub fn two_hexagons() -> IncidenceGraph {
        let mut b = cycle(3, 6).to_builder();
        for i in 2..6 {
            b.vertex(id(format!("y{i}")), Part::Point.after(i)).unwrap();
        }
        let chain = ["x1", "y2", "y3", "y4", "y5", "x0"];
        for w in chain.windows(2) {
            b.edge(&id(w[0].to_string()), &id(w[1].to_string())).unwrap();
        }
        b.build()
    }
}
