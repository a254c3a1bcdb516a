//! Truncated free n-completions with stage provenance, opposites in
//! 2n-cycles, geodesic closure and generated sub-n-gons inside a trace.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::graph::metrics::{all_pairs, geodesic_count_and_path, UNREACHED};
use crate::graph::{
    isomorphic, parse_gon, serialize_gon, shortest_cycle, GraphError, GraphPath, IncidenceGraph,
    ParseError, Provenance, VertexId,
};
use crate::polygon::{check_nondegenerate, is_open_over, Nondegenerate, PolygonError};

#[derive(Debug, Error)]
pub enum CompletionError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Polygon(#[from] PolygonError),
    #[error("girth {girth} is below 2n = {}", 2 * .n)]
    Girth { girth: usize, n: usize, cycle: Vec<VertexId> },
    #[error("DEGENERATE_SEED: the seed has no cycle of length >= 2n+2 and no pair at distance n+3")]
    DegenerateSeed,
    #[error("NOT_STRONGLY_EMBEDDED: the seed is not open over the given set (stuck on {0:?})")]
    NotStronglyEmbedded(BTreeSet<VertexId>),
    #[error("{0} is not on the cycle")]
    NotOnCycle(VertexId),
    #[error("not a simple cycle of the graph: {0}")]
    BadCycle(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no path of length n-1 from {0} to {1} and building is disabled")]
    MissingArc(VertexId, VertexId),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// A clean arc added by a completion stage.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct AddedArc {
    pub a: VertexId,
    pub b: VertexId,
    pub interior: Vec<VertexId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stage {
    #[serde(skip)]
    pub graph: IncidenceGraph,
    pub arcs: Vec<AddedArc>,
}

/// Snapshots `Γ_0 ⊆ Γ_1 ⊆ ...` of a free completion; stage 0 is the seed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompletionTrace {
    pub n: usize,
    pub stages: Vec<Stage>,
    /// First snapshot without pairs at distance n+1, if reached.
    pub complete_at: Option<usize>,
}

impl CompletionTrace {
    pub fn seed(&self) -> &IncidenceGraph {
        &self.stages[0].graph
    }

    pub fn last(&self) -> &IncidenceGraph {
        &self.stages.last().expect("trace has a seed").graph
    }

    pub fn snapshot(&self, i: usize) -> Option<&IncidenceGraph> {
        self.stages.get(i).map(|s| &s.graph)
    }

    /// Number of completion stages beyond the seed.
    pub fn depth(&self) -> usize {
        self.stages.len() - 1
    }
}

fn require_partial(g: &IncidenceGraph) -> Result<(), CompletionError> {
    if let Some(c) = shortest_cycle(g) {
        if c.len() < 2 * g.n() {
            return Err(CompletionError::Girth {
                girth: c.len(),
                n: g.n(),
                cycle: c.iter().map(|&v| g.id(v).clone()).collect(),
            });
        }
    }
    Ok(())
}

/// Pairs `(a, b)`, `a < b`, at distance exactly n+1.
fn far_pairs(g: &IncidenceGraph) -> Vec<(usize, usize)> {
    let d = all_pairs(g);
    let mut out = Vec::new();
    for a in 0..g.vertex_count() {
        for b in a + 1..g.vertex_count() {
            if d[a][b] == g.n() + 1 {
                out.push((a, b));
            }
        }
    }
    out
}

/// One completion stage: a clean arc for every pair at distance n+1 in `g`.
/// Interior ids are `s{stage}.{a}-{b}.{pos}`, suffixed `~k` if already taken.
pub fn complete_stage(
    g: &IncidenceGraph,
    stage: usize,
) -> Result<(IncidenceGraph, Vec<AddedArc>), CompletionError> {
    require_partial(g)?;
    let n = g.n();
    let mut b = g.to_builder();
    let mut arcs = Vec::new();
    for (i, j) in far_pairs(g) {
        let (a, e) = (g.id(i).clone(), g.id(j).clone());
        let mut interior = Vec::with_capacity(n - 2);
        let mut prev = a.clone();
        for pos in 1..=n - 2 {
            let mut v = VertexId::new(format!("s{stage}.{a}-{e}.{pos}"))?;
            let mut k = 1;
            while b.contains(&v) {
                v = VertexId::new(format!("s{stage}.{a}-{e}.{pos}~{k}"))?;
                k += 1;
            }
            let prov = Provenance::Arc { stage, endpoints: (a.clone(), e.clone()), position: pos };
            b.vertex_with(v.clone(), g.part(i).after(pos), prov)?;
            b.edge(&prev, &v)?;
            prev = v.clone();
            interior.push(v);
        }
        b.edge(&prev, &e)?;
        arcs.push(AddedArc { a, b: e, interior });
    }
    Ok((b.build(), arcs))
}

/// Iterates [`complete_stage`] up to `stages` times, stopping once a
/// snapshot has no pair at distance n+1.
pub fn complete(seed: &IncidenceGraph, stages: usize) -> Result<CompletionTrace, CompletionError> {
    require_partial(seed)?;
    let mut trace = CompletionTrace {
        n: seed.n(),
        stages: vec![Stage { graph: seed.clone(), arcs: vec![] }],
        complete_at: None,
    };
    extend_trace(&mut trace, stages)?;
    Ok(trace)
}

fn extend_trace(trace: &mut CompletionTrace, stages: usize) -> Result<(), CompletionError> {
    while trace.complete_at.is_none() && trace.depth() < stages {
        let k = trace.depth();
        let (next, arcs) = complete_stage(trace.last(), k + 1)?;
        if arcs.is_empty() {
            trace.complete_at = Some(k);
        } else {
            trace.stages.push(Stage { graph: next, arcs });
        }
    }
    if trace.complete_at.is_none() && far_pairs(trace.last()).is_empty() {
        trace.complete_at = Some(trace.depth());
    }
    Ok(())
}

/// Completes until every two seed vertices are at distance at most n.
/// Returns the trace and the first such stage, `None` if `max_stages` did
/// not suffice.
pub fn complete_until_core_resolved(
    seed: &IncidenceGraph,
    max_stages: usize,
    budget: u64,
) -> Result<(CompletionTrace, Option<usize>), CompletionError> {
    require_partial(seed)?;
    if check_nondegenerate(seed, budget) == Nondegenerate::No {
        return Err(CompletionError::DegenerateSeed);
    }
    let resolved = |g: &IncidenceGraph| {
        let idx: Vec<usize> = seed.ids().iter().map(|v| g.index_of(v).expect("seed kept")).collect();
        let d = all_pairs(g);
        idx.iter().all(|&a| idx.iter().all(|&b| d[a][b] != UNREACHED && d[a][b] <= g.n()))
    };
    let mut trace = complete(seed, 0)?;
    loop {
        if resolved(trace.last()) {
            let at = trace.depth();
            return Ok((trace, Some(at)));
        }
        if trace.depth() >= max_stages || trace.complete_at.is_some() {
            return Ok((trace, None));
        }
        let target = trace.depth() + 1;
        extend_trace(&mut trace, target)?;
    }
}

/// The vertex at cycle distance len/2 from `x`.
pub fn opposite_in_cycle(cycle: &GraphPath, x: &VertexId) -> Result<VertexId, CompletionError> {
    let c = &cycle.0;
    if c.len() < 4 || c.len() % 2 == 1 {
        return Err(CompletionError::BadCycle(format!("length {}", c.len())));
    }
    let i = c.iter().position(|v| v == x).ok_or_else(|| CompletionError::NotOnCycle(x.clone()))?;
    Ok(c[(i + c.len() / 2) % c.len()].clone())
}

#[derive(Clone, Debug, Serialize)]
pub struct Transfer {
    pub x_opposite: VertexId,
    pub y_prime: VertexId,
    /// The path of length n−1 from `y` to the opposite of `x`.
    pub path: GraphPath,
    /// Whether a completion stage had to be built to find the path.
    pub built: bool,
    #[serde(skip)]
    pub context: IncidenceGraph,
}

/// Moves the pendant `y` of `x` across the 2n-cycle: returns the neighbour
/// `y'` of the opposite `x'` with d(y, y') = n−2.
pub fn transfer_neighbor(
    context: &IncidenceGraph,
    cycle: &GraphPath,
    x: &VertexId,
    y: &VertexId,
    build: bool,
) -> Result<Transfer, CompletionError> {
    let n = context.n();
    if cycle.0.len() != 2 * n || !cycle.is_simple_cycle_in(context) {
        return Err(CompletionError::BadCycle(cycle.to_string()));
    }
    if cycle.0.contains(y) {
        return Err(CompletionError::Precondition(format!("{y} lies on the cycle")));
    }
    if !context.has_edge_ids(x, y) {
        return Err(CompletionError::Precondition(format!("{y} is not adjacent to {x}")));
    }
    let xp = opposite_in_cycle(cycle, x)?;
    let find = |g: &IncidenceGraph| -> Option<Vec<usize>> {
        let (yi, xi) = (g.index_of(y)?, g.index_of(&xp)?);
        let (_, p) = geodesic_count_and_path(g, yi, xi, None)?;
        (p.len() == n).then_some(p)
    };
    let (g, built, path) = match find(context) {
        Some(p) => (context.clone(), false, p),
        None if build => {
            let stage = next_stage(context);
            let (g, _) = complete_stage(context, stage)?;
            let p = find(&g).ok_or_else(|| CompletionError::MissingArc(y.clone(), xp.clone()))?;
            (g, true, p)
        }
        None => return Err(CompletionError::MissingArc(y.clone(), xp.clone())),
    };
    let yp = path[n - 2];
    let ids: Vec<VertexId> = path.iter().map(|&v| g.id(v).clone()).collect();
    let yp_id = g.id(yp).clone();
    let d = crate::graph::distance(&g, y, &yp_id)?;
    if d != Some(n - 2) {
        return Err(CompletionError::Precondition(format!("d(y, y') = {d:?}, expected n-2")));
    }
    // exchange: one-stage completions of cycle+y and cycle+y' agree
    let side = |p: &VertexId| -> Result<IncidenceGraph, CompletionError> {
        let mut s: BTreeSet<VertexId> = cycle.0.iter().cloned().collect();
        s.insert(p.clone());
        Ok(complete_stage(&g.induced(&s)?, 1)?.0)
    };
    if isomorphic(&side(y)?, &side(&yp_id)?).is_none() {
        return Err(CompletionError::Precondition("exchange completions differ".into()));
    }
    Ok(Transfer { x_opposite: xp, y_prime: yp_id, path: GraphPath(ids), built, context: g })
}

/// One more than the largest stage recorded in the provenance of `g`.
pub fn next_stage(g: &IncidenceGraph) -> usize {
    (0..g.vertex_count())
        .filter_map(|i| match g.provenance(i) {
            Provenance::Arc { stage, .. } | Provenance::Loose { stage, .. } => Some(*stage),
            Provenance::Seed => None,
        })
        .max()
        .unwrap_or(0)
        + 1
}

/// Least superset of `a` containing the unique geodesic between any two of
/// its members at distance below n.
pub fn geodesic_closure(
    g: &IncidenceGraph,
    a: &BTreeSet<VertexId>,
) -> Result<BTreeSet<VertexId>, GraphError> {
    let mut inside = g.mask_of(a)?;
    let n = g.n();
    loop {
        let members: Vec<usize> = (0..g.vertex_count()).filter(|&v| inside[v]).collect();
        let mut grew = false;
        for (k, &u) in members.iter().enumerate() {
            for &w in &members[k + 1..] {
                if let Some((count, path)) = geodesic_count_and_path(g, u, w, None) {
                    if path.len() - 1 < n && count == 1 {
                        for v in path {
                            grew |= !std::mem::replace(&mut inside[v], true);
                        }
                    }
                }
            }
        }
        if !grew {
            return Ok(g.ids_of((0..g.vertex_count()).filter(|&v| inside[v])));
        }
    }
}

/// The copy of the truncated F(A) inside `trace`: stage by stage, adopt the
/// ambient arcs whose endpoints both lie in the current sub-object.
pub fn generated_subgon(
    trace: &CompletionTrace,
    a: &BTreeSet<VertexId>,
) -> Result<CompletionTrace, CompletionError> {
    let seed = trace.seed();
    seed.mask_of(a)?;
    let rest: BTreeSet<VertexId> = seed.vertex_set().difference(a).cloned().collect();
    let strip = is_open_over(&rest, a, seed)?;
    if !strip.open {
        return Err(CompletionError::NotStronglyEmbedded(strip.stuck.unwrap_or_default()));
    }
    let mut current = a.clone();
    let mut stages = vec![Stage { graph: seed.induced(&current)?, arcs: vec![] }];
    for st in &trace.stages[1..] {
        let adopted: Vec<AddedArc> = st
            .arcs
            .iter()
            .filter(|arc| current.contains(&arc.a) && current.contains(&arc.b))
            .cloned()
            .collect();
        if adopted.is_empty() {
            break;
        }
        for arc in &adopted {
            current.extend(arc.interior.iter().cloned());
        }
        stages.push(Stage { graph: st.graph.induced(&current)?, arcs: adopted });
    }
    let last = &stages.last().expect("seed stage").graph;
    let complete_at = far_pairs(last).is_empty().then(|| stages.len() - 1);
    Ok(CompletionTrace { n: trace.n, stages, complete_at })
}

/// Closes `a0` downward along arc provenance: every arc vertex brings its
/// whole arc and both endpoints; seed vertices are always included. The
/// result carries the seed's δ since each whole arc is δ-neutral.
pub fn arc_closure(
    g: &IncidenceGraph,
    a0: &BTreeSet<VertexId>,
) -> Result<BTreeSet<VertexId>, GraphError> {
    g.mask_of(a0)?;
    let mut arcs: BTreeMap<(usize, VertexId, VertexId), Vec<VertexId>> = BTreeMap::new();
    let mut out = BTreeSet::new();
    for i in 0..g.vertex_count() {
        match g.provenance(i) {
            Provenance::Arc { stage, endpoints, .. } => arcs
                .entry((*stage, endpoints.0.clone(), endpoints.1.clone()))
                .or_default()
                .push(g.id(i).clone()),
            _ => {
                out.insert(g.id(i).clone());
            }
        }
    }
    let key_of = |v: &VertexId| match g.provenance(g.index_of(v).expect("known")) {
        Provenance::Arc { stage, endpoints, .. } => {
            Some((*stage, endpoints.0.clone(), endpoints.1.clone()))
        }
        _ => None,
    };
    // non-arc vertices: keep only the seed ones plus requested loose ends
    out.retain(|v| matches!(g.provenance(g.index_of(v).unwrap()), Provenance::Seed) || a0.contains(v));
    let mut todo: Vec<VertexId> = a0.iter().cloned().collect();
    while let Some(v) = todo.pop() {
        if let Some(key) = key_of(&v) {
            for w in arcs[&key].iter().chain([&key.1, &key.2]) {
                if out.insert(w.clone()) {
                    todo.push(w.clone());
                }
            }
        }
    }
    Ok(out)
}

/// Writes `stage{k}.gon` for every snapshot plus `arcs.txt`.
pub fn write_trace_bundle(trace: &CompletionTrace, dir: &Path) -> Result<(), CompletionError> {
    let io = |e: std::io::Error| CompletionError::Io(e.to_string());
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut arcs = String::new();
    for (k, st) in trace.stages.iter().enumerate() {
        std::fs::write(dir.join(format!("stage{k}.gon")), serialize_gon(&st.graph)).map_err(io)?;
        if k > 0 {
            let _ = writeln!(arcs, "stage {k}");
            for arc in &st.arcs {
                let _ = write!(arcs, "arc {} {} :", arc.a, arc.b);
                for v in &arc.interior {
                    let _ = write!(arcs, " {v}");
                }
                arcs.push('\n');
            }
        }
    }
    if let Some(c) = trace.complete_at {
        let _ = writeln!(arcs, "complete {c}");
    }
    std::fs::write(dir.join("arcs.txt"), arcs).map_err(io)?;
    Ok(())
}

/// Reads a bundle written by [`write_trace_bundle`].
pub fn read_trace_bundle(dir: &Path) -> Result<CompletionTrace, CompletionError> {
    let io = |e: std::io::Error| CompletionError::Io(e.to_string());
    let text = std::fs::read_to_string(dir.join("arcs.txt")).map_err(io)?;
    let mut per_stage: BTreeMap<usize, Vec<AddedArc>> = BTreeMap::new();
    let mut complete_at = None;
    let mut cur = 0;
    for line in text.lines() {
        let t: Vec<&str> = line.split_whitespace().collect();
        let bad = || CompletionError::Io(format!("bad arcs.txt line: {line}"));
        match t.first() {
            Some(&"stage") => {
                cur = t.get(1).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
                per_stage.entry(cur).or_default();
            }
            Some(&"complete") => complete_at = Some(t.get(1).and_then(|s| s.parse().ok()).ok_or_else(bad)?),
            Some(&"arc") if t.len() >= 4 && t[3] == ":" => {
                let id = |s: &str| VertexId::new(s).map_err(|_| bad());
                per_stage.entry(cur).or_default().push(AddedArc {
                    a: id(t[1])?,
                    b: id(t[2])?,
                    interior: t[4..].iter().map(|s| id(s)).collect::<Result<_, _>>()?,
                });
            }
            None => {}
            _ => return Err(bad()),
        }
    }
    let mut stages = Vec::new();
    for k in 0..=per_stage.keys().max().copied().unwrap_or(0) {
        let g = parse_gon(&std::fs::read_to_string(dir.join(format!("stage{k}.gon"))).map_err(io)?)?;
        stages.push(Stage { graph: g, arcs: per_stage.remove(&k).unwrap_or_default() });
    }
    Ok(CompletionTrace { n: stages[0].graph.n(), stages, complete_at })
}
