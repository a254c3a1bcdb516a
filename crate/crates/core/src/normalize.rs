//! Free-equivalence transforms, hat-rack normal forms and the δ-based
//! classification of finitely generated free n-gons.
//!
//! Every transform records a certificate step: `after` embeds into a
//! bounded-stage completion of `before` and vice versa, and δ_n agrees.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use crate::completion::{complete, CompletionError, CompletionTrace};
use crate::graph::metrics::{bfs, bfs_within, geodesic_count_and_path, UNREACHED};
use crate::graph::{
    find_embedding, serialize_gon, shapes, shortest_cycle, two_core, GraphBuilder, GraphError, IncidenceGraph,
    Part, VertexId,
};
use crate::polygon::{check_nondegenerate, clean_arcs, is_open, CleanArc, Nondegenerate};
use crate::rank::delta;

#[derive(Debug, Error)]
pub enum NormalizeError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Completion(#[from] CompletionError),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("NOT_OPEN: the strip got stuck on {0:?}")]
    NotOpen(BTreeSet<VertexId>),
    #[error("DEGENERATE: no cycle of length >= 2n+2 and no pair at distance n+3")]
    Degenerate,
    #[error("graph is empty or not connected")]
    NotConnected,
    #[error("girth {0} is below 2n")]
    Girth(usize),
    #[error("the graph contains a cycle")]
    Cyclic,
    #[error("no simple path of length n+3 (longest has length {0})")]
    NoLongPath(usize),
    #[error("not a clean arc with loose ends only on its interior: {0}")]
    NotCleanArc(String),
    #[error("no 2n-cycle through the arc {0} .. {1}")]
    NoCycle(VertexId, VertexId),
    #[error("{0} is not a loose end")]
    NotLoose(VertexId),
    #[error("d({a}, {b}) = {found:?}, expected n+1")]
    Distance { a: VertexId, b: VertexId, found: Option<usize> },
    #[error("normalization stuck: {0}")]
    Stuck(String),
    #[error("no embedding within {0} stages for a {1} step")]
    Evidence(usize, StepKind),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NormalizeOptions {
    /// Completion stages searched for embedding evidence.
    pub stage_budget: usize,
    /// Expansion budget for the non-degeneracy check.
    pub budget: u64,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions { stage_budget: 2, budget: 1_000_000 }
    }
}

/// A path `x_0 .. x_k` with pendant neighbours on interior positions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HatRack {
    pub n: usize,
    pub k: usize,
    /// Part of `x_0`.
    pub start: Part,
    /// Pendant count per interior spine position; zero counts are omitted.
    pub pendants: BTreeMap<usize, usize>,
}

impl HatRack {
    pub fn path(n: usize, k: usize) -> HatRack {
        HatRack { n, k, start: Part::Point, pendants: BTreeMap::new() }
    }

    pub fn pendant_total(&self) -> usize {
        self.pendants.values().sum()
    }

    pub fn delta(&self) -> i64 {
        (self.n - 1 + self.k + self.pendant_total()) as i64
    }

    /// Spine `x0..xk`, pendants `x{i}p{j}`.
    pub fn realize(&self) -> IncidenceGraph {
        let mut b = shapes::path(self.n, self.k).to_builder();
        let spine = |i: usize| VertexId::from_valid(format!("x{i}"));
        if self.start == Part::Line {
            b = crate::graph::GraphBuilder::new(self.n).expect("n >= 3");
            for i in 0..=self.k {
                b.vertex(spine(i), Part::Line.after(i)).unwrap();
                if i > 0 {
                    b.edge(&spine(i - 1), &spine(i)).unwrap();
                }
            }
        }
        for (&i, &count) in &self.pendants {
            for j in 0..count {
                let p = VertexId::from_valid(format!("x{i}p{j}"));
                b.vertex(p.clone(), self.start.after(i + 1)).unwrap();
                b.edge(&spine(i), &p).unwrap();
            }
        }
        b.build()
    }

    /// Reads a hat-rack off a tree whose non-spine vertices are all pendants
    /// of interior vertices of the spine (the lexicographically least longest
    /// path).
    pub fn from_graph(g: &IncidenceGraph) -> Option<HatRack> {
        if g.is_empty() || !g.is_connected() || g.edge_count() + 1 != g.vertex_count() {
            return None;
        }
        let spine = spine_of_tree(g);
        let k = spine.len() - 1;
        let pos: BTreeMap<usize, usize> = spine.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut pendants = BTreeMap::new();
        for v in 0..g.vertex_count() {
            if pos.contains_key(&v) {
                continue;
            }
            if g.degree(v) != 1 {
                return None;
            }
            let i = *pos.get(&g.neighbors(v)[0])?;
            if i == 0 || i == k {
                return None;
            }
            *pendants.entry(i).or_insert(0) += 1;
        }
        Some(HatRack { n: g.n(), k, start: g.part(spine[0]), pendants })
    }
}

impl fmt::Display for HatRack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "hat-rack n={} k={} start={}", self.n, self.k, self.start.letter())?;
        if self.pendants.is_empty() {
            return write!(f, " pendants none");
        }
        let list: Vec<String> = self.pendants.iter().map(|(i, c)| format!("{i}:{c}")).collect();
        write!(f, " pendants {}", list.join(","))
    }
}

/// Vertices of a path between `a` and `b` in a tree (or any BFS path).
fn bfs_path(g: &IncidenceGraph, a: usize, b: usize) -> Vec<usize> {
    let mut parent = vec![usize::MAX; g.vertex_count()];
    parent[a] = a;
    let mut queue = VecDeque::from([a]);
    while let Some(v) = queue.pop_front() {
        if v == b {
            break;
        }
        for &w in g.neighbors(v) {
            if parent[w] == usize::MAX {
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![b];
    let mut cur = b;
    while cur != a {
        cur = parent[cur];
        path.push(cur);
    }
    path.reverse();
    path
}

/// Lexicographically least (by id sequence) longest path of a tree.
fn spine_of_tree(g: &IncidenceGraph) -> Vec<usize> {
    let dist: Vec<Vec<usize>> = (0..g.vertex_count()).map(|v| bfs(g, v)).collect();
    let longest = dist.iter().flatten().filter(|&&d| d != UNREACHED).copied().max().unwrap_or(0);
    let mut best: Option<(Vec<&VertexId>, Vec<usize>)> = None;
    for a in 0..g.vertex_count() {
        for b in 0..g.vertex_count() {
            if dist[a][b] != longest || (best.is_some() && g.id(a) > best.as_ref().unwrap().0[0]) {
                continue;
            }
            let path = bfs_path(g, a, b);
            let key: Vec<&VertexId> = path.iter().map(|&v| g.id(v)).collect();
            if best.as_ref().is_none_or(|(k, _)| key < *k) {
                best = Some((key, path));
            }
        }
    }
    best.map(|(_, p)| p).unwrap_or_default()
}

fn longest_path_len(g: &IncidenceGraph) -> usize {
    (0..g.vertex_count())
        .flat_map(|v| bfs(g, v))
        .filter(|&d| d != UNREACHED)
        .max()
        .unwrap_or(0)
}

/// Distance to `base` and the BFS parent towards it.
fn hang_depths(g: &IncidenceGraph, base: &[bool]) -> (Vec<usize>, Vec<usize>) {
    let nv = g.vertex_count();
    let mut depth = vec![UNREACHED; nv];
    let mut parent = vec![usize::MAX; nv];
    let mut queue = VecDeque::new();
    for v in (0..nv).filter(|&v| base[v]) {
        depth[v] = 0;
        queue.push_back(v);
    }
    while let Some(v) = queue.pop_front() {
        for &w in g.neighbors(v) {
            if depth[w] == UNREACHED {
                depth[w] = depth[v] + 1;
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    (depth, parent)
}

/// Deepest vertex at depth at least 2 (least index on ties).
fn deepest(depth: &[usize]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (v, &d) in depth.iter().enumerate() {
        if d != UNREACHED && d >= 2 && best.is_none_or(|b| d > depth[b]) {
            best = Some(v);
        }
    }
    best
}

/// Path of gamma_k: `x0 .. xk`, `x0` a point.
pub fn gamma_k(n: usize, k: usize) -> Result<IncidenceGraph, NormalizeError> {
    if n < 3 || k < 1 {
        return Err(NormalizeError::Precondition(format!("gamma_k needs n >= 3 and k >= 1 (n={n}, k={k})")));
    }
    Ok(shapes::path(n, k))
}

/// Truncated completion of `gamma_k(n, k)`.
pub fn free_gon(n: usize, k: usize, stages: usize) -> Result<CompletionTrace, NormalizeError> {
    if k < n + 3 {
        return Err(NormalizeError::Precondition(format!("free_gon needs k >= n+3 = {} (k={k})", n + 3)));
    }
    Ok(complete(&gamma_k(n, k)?, stages)?)
}

// ---------------------------------------------------------------------------
// Certificates

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StepKind {
    ChangeOrder,
    PendantHop,
    ArcIntroduce,
    ArcRemove,
    /// Replaces a short tree by another tree of the same size that it
    /// generates within a few stages and that generates it back.
    Regenerate,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepKind::ChangeOrder => "CHANGE_ORDER",
            StepKind::PendantHop => "PENDANT_HOP",
            StepKind::ArcIntroduce => "ARC_INTRODUCE",
            StepKind::ArcRemove => "ARC_REMOVE",
            StepKind::Regenerate => "REGENERATE",
        })
    }
}

/// Embedding into a completion of the other side. Shared ids map to
/// themselves; `map` lists the rest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Embedding {
    pub stages: usize,
    pub map: BTreeMap<VertexId, VertexId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertStep {
    pub kind: StepKind,
    #[serde(skip)]
    pub before: IncidenceGraph,
    #[serde(skip)]
    pub after: IncidenceGraph,
    pub delta: i64,
    /// `after` inside a completion of `before`.
    pub forward: Embedding,
    /// `before` inside a completion of `after`.
    pub backward: Embedding,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FreeEquivalenceCertificate {
    pub n: usize,
    pub steps: Vec<CertStep>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("step {index}: {reason}")]
pub struct CertificateFailure {
    pub index: usize,
    pub reason: String,
}

impl FreeEquivalenceCertificate {
    pub fn is_identity(&self) -> bool {
        self.steps.is_empty()
    }

    /// Re-checks every step: δ equality, both embeddings (against freshly
    /// computed completions), and that consecutive steps chain.
    pub fn verify(&self) -> Result<(), CertificateFailure> {
        for (index, s) in self.steps.iter().enumerate() {
            let fail = |reason: String| CertificateFailure { index, reason };
            if delta(&s.before) != delta(&s.after) || delta(&s.before) != s.delta {
                return Err(fail(format!(
                    "delta {} -> {} (recorded {})",
                    delta(&s.before),
                    delta(&s.after),
                    s.delta
                )));
            }
            check_embedding(&s.after, &s.before, &s.forward).map_err(|r| fail(format!("forward: {r}")))?;
            check_embedding(&s.before, &s.after, &s.backward).map_err(|r| fail(format!("backward: {r}")))?;
            if index > 0 && !self.steps[index - 1].after.same_shape(&s.before) {
                return Err(fail("does not continue the previous step".into()));
            }
        }
        Ok(())
    }

    /// Text log: one block per step, graphs in GON, maps inline.
    pub fn to_text(&self) -> String {
        let mut out = format!("certificate n {} steps {}\n", self.n, self.steps.len());
        let map_line = |e: &Embedding| {
            let pairs: Vec<String> = e.map.iter().map(|(a, b)| format!("{a}={b}")).collect();
            format!("{} {}", e.stages, pairs.join(" ")).trim_end().to_string()
        };
        for (i, s) in self.steps.iter().enumerate() {
            let _ = writeln!(out, "step {} {} delta {}", i + 1, s.kind, s.delta);
            let _ = writeln!(out, "note {}", s.note);
            out.push_str("before\n");
            out.push_str(&serialize_gon(&s.before));
            out.push_str("after\n");
            out.push_str(&serialize_gon(&s.after));
            let _ = writeln!(out, "forward {}", map_line(&s.forward));
            let _ = writeln!(out, "backward {}", map_line(&s.backward));
            out.push_str("end\n");
        }
        out
    }
}

/// Checks that `emb` is an induced, part-preserving embedding of `src` into
/// the `emb.stages`-stage completion of `host`.
fn check_embedding(src: &IncidenceGraph, host: &IncidenceGraph, emb: &Embedding) -> Result<(), String> {
    let trace = complete(host, emb.stages).map_err(|e| e.to_string())?;
    let big = trace.last();
    let mut image = Vec::with_capacity(src.vertex_count());
    for v in src.ids() {
        let t = match emb.map.get(v) {
            Some(t) => t,
            None if host.contains(v) => v,
            None => return Err(format!("{v} has no image")),
        };
        image.push(big.index_of(t).ok_or_else(|| format!("image {t} of {v} is not in the completion"))?);
    }
    if image.iter().collect::<BTreeSet<_>>().len() != image.len() {
        return Err("map is not injective".into());
    }
    for i in 0..src.vertex_count() {
        if src.part(i) != big.part(image[i]) {
            return Err(format!("{} changes part", src.id(i)));
        }
        for j in i + 1..src.vertex_count() {
            if src.has_edge(i, j) != big.has_edge(image[i], image[j]) {
                return Err(format!("adjacency of {} and {} not preserved", src.id(i), src.id(j)));
            }
        }
    }
    Ok(())
}

fn find_evidence(
    src: &IncidenceGraph,
    host: &IncidenceGraph,
    max_stages: usize,
) -> Result<Option<Embedding>, CompletionError> {
    let fixed: BTreeMap<VertexId, VertexId> =
        src.ids().iter().filter(|v| host.contains(v)).map(|v| (v.clone(), v.clone())).collect();
    for stages in 0..=max_stages {
        let trace = complete(host, stages)?;
        if let Some(map) = find_embedding(src, trace.last(), &fixed) {
            let map = map.into_iter().filter(|(k, _)| !host.contains(k)).collect();
            return Ok(Some(Embedding { stages, map }));
        }
        if trace.complete_at.is_some() {
            break;
        }
    }
    Ok(None)
}

/// Builds a certificate step, searching both embeddings within `max_stages`.
pub fn certify(
    kind: StepKind,
    before: &IncidenceGraph,
    after: &IncidenceGraph,
    max_stages: usize,
    note: String,
) -> Result<CertStep, NormalizeError> {
    if delta(before) != delta(after) {
        return Err(NormalizeError::Precondition(format!(
            "{kind} changes delta {} -> {}",
            delta(before),
            delta(after)
        )));
    }
    let forward = find_evidence(after, before, max_stages)?.ok_or(NormalizeError::Evidence(max_stages, kind))?;
    let backward = find_evidence(before, after, max_stages)?.ok_or(NormalizeError::Evidence(max_stages, kind))?;
    Ok(CertStep {
        kind,
        before: before.clone(),
        after: after.clone(),
        delta: delta(before),
        forward,
        backward,
        note,
    })
}

// ---------------------------------------------------------------------------
// Transforms on graphs

fn require_distance(g: &IncidenceGraph, a: usize, b: usize) -> Result<(), NormalizeError> {
    let d = bfs(g, a)[b];
    if d != g.n() + 1 {
        return Err(NormalizeError::Distance {
            a: g.id(a).clone(),
            b: g.id(b).clone(),
            found: (d != UNREACHED).then_some(d),
        });
    }
    Ok(())
}

/// Replaces the loose end `a` by a fresh neighbour `new` of `x`, where
/// d(a, x) = n+1.
pub fn pendant_hop_graph(
    g: &IncidenceGraph,
    a: &VertexId,
    x: &VertexId,
    new: VertexId,
) -> Result<IncidenceGraph, NormalizeError> {
    let (ai, xi) = (g.require(a)?, g.require(x)?);
    if g.degree(ai) > 1 {
        return Err(NormalizeError::NotLoose(a.clone()));
    }
    require_distance(g, ai, xi)?;
    let mut b = g.to_builder();
    b.remove_vertex(a);
    b.vertex(new.clone(), g.part(xi).opposite())?;
    b.edge(x, &new)?;
    Ok(b.build())
}

/// Adds a clean arc with the given interior ids between `a` and `b`, which
/// must be at distance n+1.
pub fn arc_introduce_graph(
    g: &IncidenceGraph,
    a: &VertexId,
    b: &VertexId,
    interior: Vec<VertexId>,
) -> Result<(IncidenceGraph, CleanArc), NormalizeError> {
    let (ai, bi) = (g.require(a)?, g.require(b)?);
    require_distance(g, ai, bi)?;
    if interior.len() != g.n() - 2 {
        return Err(NormalizeError::Precondition(format!("an arc needs {} interior ids", g.n() - 2)));
    }
    let mut builder = g.to_builder();
    let mut prev = a.clone();
    for (pos, v) in interior.iter().enumerate() {
        builder.vertex(v.clone(), g.part(ai).after(pos + 1))?;
        builder.edge(&prev, v)?;
        prev = v.clone();
    }
    builder.edge(&prev, b)?;
    let arc = if a < b {
        CleanArc { a: a.clone(), interior, b: b.clone() }
    } else {
        let mut interior = interior;
        interior.reverse();
        CleanArc { a: b.clone(), interior, b: a.clone() }
    };
    Ok((builder.build(), arc))
}

/// Paths of length n+1 from `from` to `to` inside `keep`, in order of their
/// index sequences, at most `limit` of them.
fn routes_within(g: &IncidenceGraph, from: usize, to: usize, keep: &[bool], limit: usize) -> Vec<Vec<usize>> {
    let d = bfs_within(g, to, Some(keep));
    let mut out = Vec::new();
    if d[from] != g.n() + 1 {
        return out;
    }
    fn walk(g: &IncidenceGraph, d: &[usize], path: &mut Vec<usize>, to: usize, limit: usize, out: &mut Vec<Vec<usize>>) {
        let cur = *path.last().expect("nonempty");
        if cur == to {
            out.push(path.clone());
            return;
        }
        for &w in g.neighbors(cur) {
            if out.len() >= limit {
                return;
            }
            if d[w] != UNREACHED && d[w] + 1 == d[cur] {
                path.push(w);
                walk(g, d, path, to, limit, out);
                path.pop();
            }
        }
    }
    walk(g, &d, &mut vec![from], to, limit, &mut out);
    out
}

/// Closing geodesics available to a change of order across `arc`: paths of
/// length n+1 between its ends avoiding the interior and its loose ends.
pub fn closing_routes(g: &IncidenceGraph, arc: &CleanArc, limit: usize) -> Result<Vec<Vec<VertexId>>, NormalizeError> {
    let mut keep = vec![true; g.vertex_count()];
    for v in &arc.interior {
        let x = g.require(v)?;
        keep[x] = false;
        for &z in g.neighbors(x) {
            if g.degree(z) == 1 {
                keep[z] = false;
            }
        }
    }
    let routes = routes_within(g, g.require(&arc.b)?, g.require(&arc.a)?, &keep, limit);
    Ok(routes.into_iter().map(|p| p.into_iter().map(|v| g.id(v).clone()).collect()).collect())
}

/// Change of order across a 2n-cycle through `arc`: the loose ends hanging
/// on the interior move to fresh neighbours of the opposite vertices and the
/// interior is deleted. Without loose ends this is plain arc removal.
/// `route` picks the closing geodesic (in order, see [`closing_routes`]);
/// `fresh` supplies ids not yet in `g`.
pub fn change_order_graph(
    g: &IncidenceGraph,
    arc: &CleanArc,
    route: usize,
    fresh: &mut dyn FnMut() -> VertexId,
) -> Result<(IncidenceGraph, StepKind), NormalizeError> {
    let n = g.n();
    let bad = |why: &str| NormalizeError::NotCleanArc(format!("{} .. {}: {why}", arc.a, arc.b));
    if arc.interior.len() != n - 2 {
        return Err(bad("wrong length"));
    }
    let ai = g.require(&arc.a)?;
    let bi = g.require(&arc.b)?;
    let interior: Vec<usize> = arc.interior.iter().map(|v| g.require(v)).collect::<Result<_, _>>()?;
    let mut walk = vec![ai];
    walk.extend(&interior);
    walk.push(bi);
    if walk.windows(2).any(|w| !g.has_edge(w[0], w[1])) || walk.iter().collect::<BTreeSet<_>>().len() != n {
        return Err(bad("not a path"));
    }
    let mut removed = vec![false; g.vertex_count()];
    let mut pendants = Vec::new();
    for (j, &x) in interior.iter().enumerate() {
        removed[x] = true;
        for &z in g.neighbors(x) {
            if z == walk[j] || z == walk[j + 2] {
                continue;
            }
            if g.degree(z) != 1 {
                return Err(bad(&format!("{} has valency > 2 beyond loose ends", g.id(x))));
            }
            removed[z] = true;
            pendants.push((z, j + 1));
        }
    }
    let keep: Vec<bool> = removed.iter().map(|&r| !r).collect();
    let geo = routes_within(g, bi, ai, &keep, route + 1)
        .into_iter()
        .nth(route)
        .ok_or_else(|| NormalizeError::NoCycle(arc.a.clone(), arc.b.clone()))?;
    // Cycle: a = c_0, interior c_1..c_{n-2}, b = c_{n-1} = geo[0], then
    // geo[i] = c_{n-1+i}; the opposite of c_j is c_{j+n} = geo[j+1].
    let mut b = g.to_builder();
    for v in (0..g.vertex_count()).filter(|&v| removed[v]) {
        b.remove_vertex(g.id(v));
    }
    for &(z, j) in &pendants {
        let host = geo[j + 1];
        let id = fresh();
        b.vertex(id.clone(), g.part(host).opposite())?;
        b.edge(g.id(host), &id)?;
        debug_assert_eq!(g.part(z), g.part(walk[j]).opposite());
    }
    let kind = if pendants.is_empty() { StepKind::ArcRemove } else { StepKind::ChangeOrder };
    Ok((b.build(), kind))
}

/// Certified change of order; fresh ids are `h1, h2, ...` (skipping ids in
/// use).
pub fn change_order_transform(
    g: &IncidenceGraph,
    arc: &CleanArc,
    opts: &NormalizeOptions,
) -> Result<(IncidenceGraph, CertStep), NormalizeError> {
    let mut run = Run::new(g.clone(), *opts);
    run.change_order(arc, 0)?;
    let step = run.steps.pop().expect("one step recorded");
    Ok((run.cur, step))
}

// ---------------------------------------------------------------------------
// The normalization driver

#[derive(Clone, Debug)]
enum Move {
    Hop(VertexId, VertexId),
    Arc(VertexId, VertexId),
}

#[derive(Clone)]
struct Run {
    n: usize,
    opts: NormalizeOptions,
    cur: IncidenceGraph,
    steps: Vec<CertStep>,
    counter: usize,
    /// Planning mode: transforms apply without certification.
    dry: bool,
}

impl Run {
    fn new(g: IncidenceGraph, opts: NormalizeOptions) -> Run {
        Run { n: g.n(), opts, cur: g, steps: Vec::new(), counter: 0, dry: false }
    }

    fn fresh_in(counter: &mut usize, g: &IncidenceGraph, taken: &BTreeSet<VertexId>) -> VertexId {
        loop {
            *counter += 1;
            let id = VertexId::from_valid(format!("h{counter}"));
            if !g.contains(&id) && !taken.contains(&id) {
                return id;
            }
        }
    }

    fn fresh(&mut self) -> VertexId {
        Run::fresh_in(&mut self.counter, &self.cur, &BTreeSet::new())
    }

    fn record(&mut self, kind: StepKind, after: IncidenceGraph, note: String) -> Result<(), NormalizeError> {
        if self.dry {
            self.cur = after;
            return Ok(());
        }
        let step = certify(kind, &self.cur, &after, self.opts.stage_budget, note)?;
        self.steps.push(step);
        self.cur = after;
        Ok(())
    }

    fn hop(&mut self, a: usize, x: usize) -> Result<VertexId, NormalizeError> {
        let (a, x) = (self.cur.id(a).clone(), self.cur.id(x).clone());
        let new = self.fresh();
        let after = pendant_hop_graph(&self.cur, &a, &x, new.clone())?;
        self.record(StepKind::PendantHop, after, format!("{a} -> {new} on {x}"))?;
        Ok(new)
    }

    fn introduce(&mut self, a: usize, b: usize) -> Result<CleanArc, NormalizeError> {
        let (a, b) = (self.cur.id(a).clone(), self.cur.id(b).clone());
        let mut taken = BTreeSet::new();
        for _ in 0..self.n - 2 {
            let id = Run::fresh_in(&mut self.counter, &self.cur, &taken);
            taken.insert(id);
        }
        let ids: Vec<VertexId> = {
            let mut v: Vec<VertexId> = taken.into_iter().collect();
            v.sort_by_key(|id| id.as_str()[1..].parse::<usize>().unwrap_or(0));
            v
        };
        let (after, arc) = arc_introduce_graph(&self.cur, &a, &b, ids)?;
        self.record(StepKind::ArcIntroduce, after, format!("arc {a} .. {b}"))?;
        Ok(arc)
    }

    fn change_order(&mut self, arc: &CleanArc, route: usize) -> Result<(), NormalizeError> {
        let cur = self.cur.clone();
        let counter = &mut self.counter;
        let mut issued = BTreeSet::new();
        let mut fresh = || {
            let id = Run::fresh_in(counter, &cur, &issued);
            issued.insert(id.clone());
            id
        };
        let (after, kind) = change_order_graph(&cur, arc, route, &mut fresh)?;
        self.record(kind, after, format!("arc {} .. {}", arc.a, arc.b))
    }

    /// Moves every hanging tree vertex at depth >= 2 over the 2-core onto
    /// the core, deepest first.
    fn flatten(&mut self) -> Result<(), NormalizeError> {
        let n = self.n;
        loop {
            let core = two_core(&self.cur);
            if !core.iter().any(|&c| c) {
                return Ok(());
            }
            let (depth, parent) = hang_depths(&self.cur, &core);
            let Some(a) = deepest(&depth) else { return Ok(()) };
            let t = depth[a];
            let target = if t <= n + 1 {
                let d = bfs(&self.cur, a);
                (0..self.cur.vertex_count()).find(|&y| core[y] && d[y] == n + 1)
            } else {
                let mut x = a;
                for _ in 0..n + 1 {
                    x = parent[x];
                }
                Some(x)
            };
            let x = target.ok_or_else(|| {
                NormalizeError::Stuck(format!("no core vertex at distance n+1 from {}", self.cur.id(a)))
            })?;
            self.hop(a, x)?;
        }
    }

    fn arc_gap(&self, arc: &CleanArc) -> Option<usize> {
        let g = &self.cur;
        let mut keep = vec![true; g.vertex_count()];
        for v in &arc.interior {
            keep[g.index_of(v)?] = false;
        }
        let d = bfs_within(g, g.index_of(&arc.a)?, Some(&keep))[g.index_of(&arc.b)?];
        (d != UNREACHED).then_some(d)
    }

    /// Flattens, then lists the clean arcs of the 2-core that do not
    /// separate, by gap (distance between the ends once the interior is
    /// gone). `None` once the graph is a tree.
    fn cycle_candidates(&mut self) -> Result<Option<Vec<(usize, CleanArc, usize)>>, NormalizeError> {
        self.flatten()?;
        let core = two_core(&self.cur);
        if !core.iter().any(|&c| c) {
            return Ok(None);
        }
        let core_graph = self.cur.induced_mask(&core);
        let mut arcs: Vec<(usize, CleanArc)> =
            clean_arcs(&core_graph).into_iter().filter_map(|arc| Some((self.arc_gap(&arc)?, arc))).collect();
        arcs.sort();
        let mut out = Vec::new();
        for (gap, arc) in arcs {
            let loaded = arc.interior.iter().any(|v| self.cur.degree(self.cur.index_of(v).expect("arc in graph")) > 2);
            let routes = if gap == self.n + 1 && loaded { closing_routes(&self.cur, &arc, 4)?.len() } else { 1 };
            for route in 0..routes.max(1) {
                out.push((gap, arc.clone(), route));
            }
        }
        if out.is_empty() {
            return Err(NormalizeError::Stuck("every clean arc of the 2-core separates the graph".into()));
        }
        Ok(Some(out))
    }

    /// Removes the arc, first walking it down to gap n+1 by introducing a
    /// parallel arc and changing order across the new 2n-cycle.
    fn remove_cycle(&mut self, mut gap: usize, mut arc: CleanArc, route: usize) -> Result<(), NormalizeError> {
        let n = self.n;
        while gap > n + 1 {
            let g = &self.cur;
            let mut keep = vec![true; g.vertex_count()];
            for v in &arc.interior {
                keep[g.require(v)?] = false;
            }
            let (_, path) =
                geodesic_count_and_path(g, g.require(&arc.a)?, g.require(&arc.b)?, Some(&keep)).expect("finite gap");
            let next = self.introduce(path[1], path[gap - 1])?;
            self.change_order(&arc, 0)?;
            arc = next;
            let shorter = self.arc_gap(&arc).filter(|&d| d + 2 == gap);
            gap = shorter.ok_or_else(|| NormalizeError::Stuck("arc gap did not shrink".into()))?;
        }
        self.change_order(&arc, route)
    }

    /// Depth-first search over which arc to remove at each cycle step,
    /// scored by the longest path of the resulting tree. Stops at the first
    /// plan reaching n+3.
    fn plan(&self, budget: &mut usize) -> Result<(usize, Vec<usize>), NormalizeError> {
        let mut r = self.clone();
        r.dry = true;
        r.steps.clear();
        let Some(cands) = r.cycle_candidates()? else {
            return Ok((longest_path_len(&r.cur), Vec::new()));
        };
        let mut best: Option<(usize, Vec<usize>)> = None;
        for (i, (gap, arc, route)) in cands.into_iter().enumerate() {
            if *budget == 0 && best.is_some() {
                break;
            }
            *budget = budget.saturating_sub(1);
            let mut next = r.clone();
            if next.remove_cycle(gap, arc, route).is_err() {
                continue;
            }
            let (score, mut rest) = next.plan(budget)?;
            if best.as_ref().is_none_or(|(b, _)| score > *b) {
                rest.insert(0, i);
                let done = score >= self.n + 3;
                best = Some((score, rest));
                if done {
                    break;
                }
            }
        }
        best.ok_or_else(|| NormalizeError::Stuck("no cycle removal applies".into()))
    }

    /// Removes all cycles following a plan.
    fn cycle_phase(&mut self) -> Result<(), NormalizeError> {
        let (_, choices) = self.plan(&mut 4000)?;
        for i in choices {
            let cands = self.cycle_candidates()?.expect("plan matches the run");
            let (gap, arc, route) = cands[i].clone();
            self.remove_cycle(gap, arc, route)?;
        }
        if self.cycle_candidates()?.is_some() {
            return Err(NormalizeError::Stuck("cycles left after the plan".into()));
        }
        Ok(())
    }

    fn apply(&mut self, mv: &Move) -> Result<(), NormalizeError> {
        let g = &self.cur;
        match mv {
            Move::Hop(a, x) => {
                let (a, x) = (g.require(a)?, g.require(x)?);
                self.hop(a, x).map(|_| ())
            }
            Move::Arc(a, b) => {
                let (a, b) = (g.require(a)?, g.require(b)?);
                self.introduce(a, b).map(|_| ())
            }
        }
    }

    /// Removes all cycles so that the resulting tree has a path of length
    /// n+3. When no removal order gets there, beam search over short
    /// sequences of pendant hops and auxiliary arcs first, each candidate
    /// scored by the best cycle-removal plan.
    fn lengthen(&mut self) -> Result<(), NormalizeError> {
        const BEAM: usize = 12;
        const LEVELS: usize = 4;
        let n = self.n;
        let (start, _) = self.plan(&mut 4000)?;
        if start >= n + 3 {
            return self.cycle_phase();
        }
        let mut tree = self.clone();
        tree.cycle_phase()?;
        if tree.lift()? {
            *self = tree;
            return Ok(());
        }
        let mut root = self.clone();
        root.dry = true;
        root.steps.clear();
        let mut beam: Vec<(Run, Vec<Move>)> = vec![(root, Vec::new())];
        for _ in 0..LEVELS {
            let mut next: Vec<((usize, usize), Run, Vec<Move>)> = Vec::new();
            for (state, moves) in &beam {
                let g = &state.cur;
                let mut options = Vec::new();
                for a in 0..g.vertex_count() {
                    let d = bfs(g, a);
                    for x in (0..g.vertex_count()).filter(|&x| d[x] == n + 1) {
                        if g.degree(a) == 1 {
                            options.push(Move::Hop(g.id(a).clone(), g.id(x).clone()));
                        }
                        if a < x {
                            options.push(Move::Arc(g.id(a).clone(), g.id(x).clone()));
                        }
                    }
                }
                for mv in options {
                    let mut s = state.clone();
                    if s.apply(&mv).is_err() {
                        continue;
                    }
                    let mut m = moves.clone();
                    m.push(mv);
                    let Ok((score, _)) = s.plan(&mut 200) else { continue };
                    if score >= n + 3 {
                        for mv in &m {
                            self.apply(mv)?;
                        }
                        return self.cycle_phase();
                    }
                    let spread: usize = (0..s.cur.vertex_count())
                        .map(|v| bfs(&s.cur, v).into_iter().filter(|&e| e != UNREACHED).max().unwrap_or(0))
                        .sum();
                    next.push(((score, spread), s, m));
                }
            }
            next.sort_by(|x, y| y.0.cmp(&x.0));
            next.truncate(BEAM);
            beam = next.into_iter().map(|(_, s, m)| (s, m)).collect();
        }
        Err(NormalizeError::NoLongPath(start))
    }

    /// Swaps a tree without a path of length n+3 for a tree of the same size
    /// inside its first completion stages that contains such a path and
    /// generates the original back.
    fn lift(&mut self) -> Result<bool, NormalizeError> {
        const PATHS: usize = 400;
        let n = self.n;
        let t = self.cur.clone();
        for stages in 1..=self.opts.stage_budget.max(1) {
            let trace = complete(&t, stages)?;
            let host = trace.last();
            let mut paths = Vec::new();
            simple_paths(host, n + 3, PATHS, &mut paths);
            for path in paths {
                for prefer_seed in [true, false] {
                    let Some(q) = grow_tree(host, &t, &path, prefer_seed) else { continue };
                    let mut taken = BTreeSet::new();
                    let mut b = GraphBuilder::new(n)?;
                    let mut rename = BTreeMap::new();
                    for v in 0..q.vertex_count() {
                        let id = q.id(v).clone();
                        let id = if t.contains(&id) {
                            id
                        } else {
                            let fresh = Run::fresh_in(&mut self.counter, &t, &taken);
                            taken.insert(fresh.clone());
                            fresh
                        };
                        b.vertex(id.clone(), q.part(v))?;
                        rename.insert(v, id);
                    }
                    for (x, y) in q.edges() {
                        b.edge(&rename[&x], &rename[&y])?;
                    }
                    let q = b.build();
                    let Ok(step) = certify(StepKind::Regenerate, &t, &q, self.opts.stage_budget, String::new()) else {
                        continue;
                    };
                    if !self.dry {
                        self.steps.push(step);
                    }
                    self.cur = q;
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// The tree lemma: pull every vertex at depth >= 2 over the spine to a
    /// pendant of a spine vertex.
    fn tree_phase(&mut self) -> Result<(), NormalizeError> {
        let n = self.n;
        let mut spine: Vec<VertexId> = spine_of_tree(&self.cur).into_iter().map(|v| self.cur.id(v).clone()).collect();
        loop {
            let snapshot = self.cur.clone();
            let g = &snapshot;
            let k = spine.len() - 1;
            let mask = g.mask_of(&spine)?;
            let (depth, parent) = hang_depths(g, &mask);
            let Some(a) = deepest(&depth) else { break };
            let t = depth[a];
            let mut root = a;
            while !mask[root] {
                root = parent[root];
            }
            let r = spine.iter().position(|v| v == g.id(root)).expect("root on spine");
            if t >= n + 1 {
                let mut x = a;
                for _ in 0..n + 1 {
                    x = parent[x];
                }
                self.hop(a, x)?;
                continue;
            }
            let m = n + 1 - t;
            let mut options: Vec<usize> = Vec::new();
            if r + m <= k {
                options.push(r + m);
            }
            if r >= m {
                options.push(r - m);
            }
            options.sort_by_key(|&s| s == 0 || s == k);
            if let Some(&s) = options.first() {
                let x = g.require(&spine[s])?;
                let new = self.hop(a, x)?;
                if s == 0 {
                    spine.insert(0, new);
                } else if s == k {
                    spine.push(new);
                }
                continue;
            }
            // No spine vertex at distance n+1: route through the arc
            // x_0 .. x_{n+1}, hop onto it, then change order across it.
            let (x0, xn1) = (g.require(&spine[0])?, g.require(&spine[n + 1])?);
            let arc = self.introduce(x0, xn1)?;
            let mut through: Vec<VertexId> = arc.interior.clone();
            if arc.a != spine[0] {
                through.reverse();
            }
            let j = m - r;
            let target = self.cur.require(&through[j - 1])?;
            let a_now = self.cur.require(g.id(a))?;
            self.hop(a_now, target)?;
            self.change_order(&arc, 0)?;
        }
        Ok(())
    }

    fn finish(self) -> Result<Normalized, NormalizeError> {
        let hat_rack = HatRack::from_graph(&self.cur)
            .ok_or_else(|| NormalizeError::Stuck("result is not a hat-rack".into()))?;
        Ok(Normalized {
            hat_rack,
            graph: self.cur,
            certificate: FreeEquivalenceCertificate { n: self.n, steps: self.steps },
        })
    }
}

/// Up to `limit` simple paths with `len` edges, each listed once.
fn simple_paths(g: &IncidenceGraph, len: usize, limit: usize, out: &mut Vec<Vec<usize>>) {
    fn walk(g: &IncidenceGraph, path: &mut Vec<usize>, on: &mut [bool], len: usize, limit: usize, out: &mut Vec<Vec<usize>>) {
        if out.len() >= limit {
            return;
        }
        if path.len() == len + 1 {
            if path[0] < path[len] {
                out.push(path.clone());
            }
            return;
        }
        let v = *path.last().expect("non-empty");
        for &w in g.neighbors(v) {
            if !on[w] {
                on[w] = true;
                path.push(w);
                walk(g, path, on, len, limit, out);
                path.pop();
                on[w] = false;
            }
        }
    }
    let mut on = vec![false; g.vertex_count()];
    for v in 0..g.vertex_count() {
        on[v] = true;
        walk(g, &mut vec![v], &mut on, len, limit, out);
        on[v] = false;
    }
}

/// Grows `path` inside `host` to an induced tree with as many vertices as
/// `tree`, adding one neighbour at a time.
fn grow_tree(host: &IncidenceGraph, tree: &IncidenceGraph, path: &[usize], prefer_seed: bool) -> Option<IncidenceGraph> {
    let want = tree.vertex_count();
    if path.len() > want {
        return None;
    }
    let mut inside = vec![false; host.vertex_count()];
    for &v in path {
        inside[v] = true;
    }
    for _ in path.len()..want {
        let next = (0..host.vertex_count())
            .filter(|&v| !inside[v] && host.neighbors(v).iter().filter(|&&w| inside[w]).count() == 1)
            .min_by_key(|&v| (prefer_seed && !tree.contains(host.id(v)), v))?;
        inside[next] = true;
    }
    let q = host.induced_mask(&inside);
    (q.edge_count() + 1 == q.vertex_count()).then_some(q)
}

/// Result of a normalization: the hat-rack, the concrete final graph and
/// the certificate leading to it.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub hat_rack: HatRack,
    pub graph: IncidenceGraph,
    pub certificate: FreeEquivalenceCertificate,
}

fn require_connected_partial(g: &IncidenceGraph) -> Result<(), NormalizeError> {
    if g.is_empty() || !g.is_connected() {
        return Err(NormalizeError::NotConnected);
    }
    if let Some(c) = shortest_cycle(g) {
        if c.len() < 2 * g.n() {
            return Err(NormalizeError::Girth(c.len()));
        }
    }
    Ok(())
}

/// Hat-rack free-equivalent to a finite tree with a path of length n+3.
pub fn tree_to_hatrack(g: &IncidenceGraph, opts: &NormalizeOptions) -> Result<Normalized, NormalizeError> {
    require_connected_partial(g)?;
    if g.edge_count() + 1 != g.vertex_count() {
        return Err(NormalizeError::Cyclic);
    }
    let longest = longest_path_len(g);
    if longest < g.n() + 3 {
        return Err(NormalizeError::NoLongPath(longest));
    }
    let mut run = Run::new(g.clone(), *opts);
    run.tree_phase()?;
    run.finish()
}

/// Hat-rack free-equivalent to a finite connected open non-degenerate
/// partial n-gon, with a certificate.
pub fn normalize_to_hatrack(g: &IncidenceGraph, opts: &NormalizeOptions) -> Result<Normalized, NormalizeError> {
    require_connected_partial(g)?;
    let open = is_open(g);
    if !open.open {
        return Err(NormalizeError::NotOpen(open.stuck.unwrap_or_default()));
    }
    if check_nondegenerate(g, opts.budget) == Nondegenerate::No {
        return Err(NormalizeError::Degenerate);
    }
    let mut run = Run::new(g.clone(), *opts);
    run.lengthen()?;
    run.tree_phase()?;
    run.finish()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// `F(A) ≅ Γ^k`.
    Free { k: usize, statement: String },
    Diagnostic { delta: i64, k: i64, reason: String },
}

/// `k = δ_n(A) − n + 1` when that reading applies, a diagnostic otherwise.
pub fn classify_free(g: &IncidenceGraph, budget: u64) -> Result<Classification, NormalizeError> {
    require_connected_partial(g)?;
    let open = is_open(g);
    if !open.open {
        return Err(NormalizeError::NotOpen(open.stuck.unwrap_or_default()));
    }
    let n = g.n();
    let d = delta(g);
    let k = d - n as i64 + 1;
    if check_nondegenerate(g, budget) == Nondegenerate::No {
        return Ok(Classification::Diagnostic {
            delta: d,
            k,
            reason: "generator is degenerate: its completion is not a non-degenerate n-gon".into(),
        });
    }
    if k < (n + 3) as i64 {
        return Ok(Classification::Diagnostic { delta: d, k, reason: format!("k = {k} is below n+3 = {}", n + 3) });
    }
    let k = k as usize;
    Ok(Classification::Free { k, statement: format!("F(A) ≅ Γ^{k}") })
}
