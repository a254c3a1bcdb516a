//! Free amalgams B ⊗_A C and truncated canonical amalgams F(B ⊗_A C).

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::completion::{complete, geodesic_closure, CompletionError, CompletionTrace};
use crate::graph::{GraphBuilder, GraphError, IncidenceGraph, VertexId};
use crate::polygon::{check_nondegenerate, is_open_over, Nondegenerate, PolygonError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    B,
    C,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::B => "B",
            Side::C => "C",
        })
    }
}

#[derive(Debug, Error)]
pub enum AmalgamError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Polygon(#[from] PolygonError),
    #[error(transparent)]
    Completion(#[from] CompletionError),
    #[error("map A -> {0} is not an embedding: {1}")]
    NotEmbedding(Side, String),
    #[error("A is not open in {0}; stuck on {1:?}")]
    NotOpen(Side, BTreeSet<VertexId>),
    #[error("A must equal B ∩ C")]
    NotIntersection,
    #[error("line {0}: {1}")]
    MapSyntax(usize, String),
}

/// Two induced embeddings of `a` into `b` and `c`.
#[derive(Clone, Debug)]
pub struct AmalgamSpec {
    pub a: IncidenceGraph,
    pub b: IncidenceGraph,
    pub c: IncidenceGraph,
    pub emb_b: BTreeMap<VertexId, VertexId>,
    pub emb_c: BTreeMap<VertexId, VertexId>,
}

impl AmalgamSpec {
    /// Spec where `a` sits inside `b` and `c` under its own ids.
    pub fn by_identity(a: IncidenceGraph, b: IncidenceGraph, c: IncidenceGraph) -> Self {
        let id: BTreeMap<VertexId, VertexId> = a.ids().iter().map(|v| (v.clone(), v.clone())).collect();
        AmalgamSpec { a, b, c, emb_b: id.clone(), emb_c: id }
    }

    fn check(&self) -> Result<(), AmalgamError> {
        for (side, g, m) in [(Side::B, &self.b, &self.emb_b), (Side::C, &self.c, &self.emb_c)] {
            let bad = |r: String| Err(AmalgamError::NotEmbedding(side, r));
            if m.len() != self.a.vertex_count() || !self.a.ids().iter().all(|v| m.contains_key(v)) {
                return bad("map must be defined exactly on A".into());
            }
            let image: BTreeSet<&VertexId> = m.values().collect();
            if image.len() != m.len() {
                return bad("map is not injective".into());
            }
            for (s, t) in m {
                if g.part_of(t) != self.a.part_of(s) {
                    return bad(format!("{s} -> {t} changes part or leaves the target"));
                }
            }
            for (s1, t1) in m {
                for (s2, t2) in m {
                    if s1 < s2 && self.a.has_edge_ids(s1, s2) != g.has_edge_ids(t1, t2) {
                        return bad(format!("adjacency of {s1},{s2} not preserved"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Amalgam {
    #[serde(skip)]
    pub graph: IncidenceGraph,
    /// Vertex of B (resp. C) to its id in the amalgam.
    pub b_map: BTreeMap<VertexId, VertexId>,
    pub c_map: BTreeMap<VertexId, VertexId>,
    pub connected: bool,
}

fn prefixed(p: &str, v: &VertexId) -> VertexId {
    VertexId::new(format!("{p}.{v}")).expect("prefixing keeps ids valid")
}

/// Pushout of `b ← a → c`: ids `a.*` for the shared copy, `b.*` and `c.*`
/// for the rest, no edges between `b.*` and `c.*`.
pub fn free_amalgam(spec: &AmalgamSpec) -> Result<Amalgam, AmalgamError> {
    spec.check()?;
    let mut builder = GraphBuilder::new(spec.b.n())?;
    let mut maps = [BTreeMap::new(), BTreeMap::new()];
    let mut edges = BTreeSet::new();
    for (k, (g, m, p)) in
        [(&spec.b, &spec.emb_b, "b"), (&spec.c, &spec.emb_c, "c")].into_iter().enumerate()
    {
        let back: BTreeMap<&VertexId, &VertexId> = m.iter().map(|(s, t)| (t, s)).collect();
        for (i, v) in g.ids().iter().enumerate() {
            let new = match back.get(v) {
                Some(a) => prefixed("a", a),
                None => prefixed(p, v),
            };
            if !builder.contains(&new) {
                builder.vertex(new.clone(), g.part(i))?;
            }
            maps[k].insert(v.clone(), new);
        }
        for (i, j) in g.edges() {
            let (x, y) = (maps[k][g.id(i)].clone(), maps[k][g.id(j)].clone());
            edges.insert(if x < y { (x, y) } else { (y, x) });
        }
    }
    for (x, y) in &edges {
        builder.edge(x, y)?;
    }
    let graph = builder.build();
    let [b_map, c_map] = maps;
    Ok(Amalgam { connected: graph.is_connected(), graph, b_map, c_map })
}

#[derive(Clone, Debug, Serialize)]
pub struct CanonicalAmalgam {
    pub amalgam: Amalgam,
    pub trace: CompletionTrace,
    /// Geodesic closure of A's image is A itself in B (resp. C). Recorded only.
    pub geodesically_closed_b: bool,
    pub geodesically_closed_c: bool,
    /// B (resp. C) stays relatively open in the last snapshot.
    pub b_open_in_result: bool,
    pub c_open_in_result: bool,
    pub nondegenerate: bool,
}

/// The completion trace of B ⊗_A C, with A ≤_o B and A ≤_o C required.
pub fn canonical_amalgam(
    spec: &AmalgamSpec,
    stages: usize,
    budget: u64,
) -> Result<CanonicalAmalgam, AmalgamError> {
    spec.check()?;
    let mut closed = [false; 2];
    for (k, (side, g, m)) in
        [(Side::B, &spec.b, &spec.emb_b), (Side::C, &spec.c, &spec.emb_c)].into_iter().enumerate()
    {
        let image: BTreeSet<VertexId> = m.values().cloned().collect();
        let rest: BTreeSet<VertexId> = g.vertex_set().difference(&image).cloned().collect();
        let r = is_open_over(&rest, &image, g)?;
        if !r.open {
            return Err(AmalgamError::NotOpen(side, r.stuck.unwrap_or_default()));
        }
        closed[k] = geodesic_closure(g, &image)? == image;
    }
    let amalgam = free_amalgam(spec)?;
    let trace = complete(&amalgam.graph, stages)?;
    let last = trace.last();
    let open_in = |map: &BTreeMap<VertexId, VertexId>| -> Result<bool, AmalgamError> {
        let part: BTreeSet<VertexId> = map.values().cloned().collect();
        let rest: BTreeSet<VertexId> = last.vertex_set().difference(&part).cloned().collect();
        Ok(is_open_over(&rest, &part, last)?.open)
    };
    let b_open_in_result = open_in(&amalgam.b_map)?;
    let c_open_in_result = open_in(&amalgam.c_map)?;
    let nondegenerate = matches!(check_nondegenerate(&amalgam.graph, budget), Nondegenerate::Yes(_));
    Ok(CanonicalAmalgam {
        amalgam,
        trace,
        geodesically_closed_b: closed[0],
        geodesically_closed_c: closed[1],
        b_open_in_result,
        c_open_in_result,
        nondegenerate,
    })
}

/// Whether `g[b ∪ c]` has no edge between `b ∖ a` and `c ∖ a`; `a` must be `b ∩ c`.
pub fn is_free_amalgam_inside(
    g: &IncidenceGraph,
    a: &BTreeSet<VertexId>,
    b: &BTreeSet<VertexId>,
    c: &BTreeSet<VertexId>,
) -> Result<bool, AmalgamError> {
    let meet: BTreeSet<VertexId> = b.intersection(c).cloned().collect();
    if &meet != a {
        return Err(AmalgamError::NotIntersection);
    }
    let bm = g.mask_of(b)?;
    let cm = g.mask_of(c)?;
    let am = g.mask_of(a)?;
    let only_b = |v: usize| bm[v] && !am[v];
    let only_c = |v: usize| cm[v] && !am[v];
    Ok(!g.edges().any(|(i, j)| only_b(i) && only_c(j) || only_c(i) && only_b(j)))
}

/// Parses a map file of `m <src> <dst>` lines.
pub fn parse_map(text: &str) -> Result<BTreeMap<VertexId, VertexId>, AmalgamError> {
    let mut out = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 3 || t[0] != "m" {
            return Err(AmalgamError::MapSyntax(k + 1, "expected 'm <src> <dst>'".into()));
        }
        let id = |s: &str| VertexId::new(s).map_err(|e| AmalgamError::MapSyntax(k + 1, e.to_string()));
        if out.insert(id(t[1])?, id(t[2])?).is_some() {
            return Err(AmalgamError::MapSyntax(k + 1, format!("{} mapped twice", t[1])));
        }
    }
    Ok(out)
}
