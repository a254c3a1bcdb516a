//! The predimension δ_n(Γ) = (n−1)|V| − (n−2)|E|, relative δ, n-strong
//! embeddings and minimal 0-extension chains.

use std::collections::{BTreeSet, VecDeque};
use std::ops::ControlFlow;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{GraphError, IncidenceGraph, VertexId};
use crate::subsets::for_each_connected;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("base is not a subgraph of the ambient graph: {0}")]
    NotSubgraph(String),
    #[error("base is not n-strong in the graph (witness of {} vertices)", .0.len())]
    NotStrong(BTreeSet<VertexId>),
    #[error("relative delta is {0}, expected 0")]
    NonZeroRelative(i64),
    #[error("delta overflows i64")]
    Overflow,
}

/// δ_n for a graph with `v` vertices and `e` edges, checked.
pub fn delta_counts(n: usize, v: usize, e: usize) -> Result<i64, RankError> {
    let n = i64::try_from(n).map_err(|_| RankError::Overflow)?;
    let v = i64::try_from(v).map_err(|_| RankError::Overflow)?;
    let e = i64::try_from(e).map_err(|_| RankError::Overflow)?;
    (n - 1)
        .checked_mul(v)
        .zip((n - 2).checked_mul(e))
        .and_then(|(a, b)| a.checked_sub(b))
        .ok_or(RankError::Overflow)
}

pub fn delta(g: &IncidenceGraph) -> i64 {
    delta_counts(g.n(), g.vertex_count(), g.edge_count()).expect("desk-scale graph")
}

/// δ_n(whole) − δ_n(whole restricted to `base`).
pub fn delta_relative(whole: &IncidenceGraph, base: &BTreeSet<VertexId>) -> Result<i64, RankError> {
    let sub = whole.induced(base)?;
    let by_def = delta(whole) - delta(&sub);
    debug_assert_eq!(Some(by_def), delta_relative_cross(whole, base).ok());
    Ok(by_def)
}

/// The same quantity via δ_n(X∖B) − (n−2)|E(X∖B, B)|.
pub fn delta_relative_cross(whole: &IncidenceGraph, base: &BTreeSet<VertexId>) -> Result<i64, RankError> {
    let mask = whole.mask_of(base)?;
    let rest: Vec<bool> = mask.iter().map(|b| !b).collect();
    let outside = whole.induced_mask(&rest);
    let cross = whole.edges().filter(|&(i, j)| mask[i] != mask[j]).count();
    Ok(delta(&outside) + delta_counts(whole.n(), 0, cross)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StrengthMethod {
    /// Every subset of the complement was evaluated.
    Exhaustive,
    /// Minimum cut on the selection network, then greedy shrinking.
    MinCut,
}

/// Outcome of an n-strength check of `base` in `g`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeltaReport {
    pub n: usize,
    pub delta: i64,
    pub base_delta: i64,
    /// δ_n(g) − δ_n(base).
    pub relative: i64,
    /// Minimum of δ_n(X) − δ_n(X ∩ base) over all subgraphs X.
    pub min_relative: i64,
    pub strong: bool,
    pub relative_to: BTreeSet<VertexId>,
    /// Vertex set of a violating X; minimal among violating sets containing the base.
    pub witness: Option<BTreeSet<VertexId>>,
    pub method: StrengthMethod,
}

impl DeltaReport {
    /// Recomputes δ(X) − δ(X ∩ base) for the witness.
    pub fn witness_relative(&self, base: &IncidenceGraph, g: &IncidenceGraph) -> Option<i64> {
        let w = self.witness.as_ref()?;
        Some(subgraph_relative(base, g, w))
    }
}

/// δ_n(g[W]) − δ_n(base ∩ g[W]) for an arbitrary vertex set `W`.
pub fn subgraph_relative(base: &IncidenceGraph, g: &IncidenceGraph, w: &BTreeSet<VertexId>) -> i64 {
    let x = g.induced(w).expect("witness inside g");
    let inside: Vec<&VertexId> = w.iter().filter(|v| base.contains(v)).collect();
    let y = base.induced(inside).expect("filtered to base vertices");
    delta(&x) - delta(&y)
}

const EXHAUSTIVE_LIMIT: usize = 16;

/// Whether the subgraph `base` is n-strong in `g`.
///
/// For fixed vertex set W the worst X is the induced subgraph, and adding
/// base vertices to W never raises δ(X) − δ(X∩base); so the minimum is
/// attained on W ⊇ V(base), where it is
/// f(S) = (n−1)|S| − (n−2)·#(edges of g[V(base) ∪ S] not in base).
pub fn is_n_strong(base: &IncidenceGraph, g: &IncidenceGraph) -> Result<DeltaReport, RankError> {
    if !base.is_subgraph_of(g) {
        return Err(RankError::NotSubgraph(
            "every base vertex and edge must occur in g with the same part".into(),
        ));
    }
    let nv = g.vertex_count();
    let in_base: Vec<bool> = (0..nv).map(|i| base.contains(g.id(i))).collect();
    let extra0 = g
        .edges()
        .filter(|&(i, j)| in_base[i] && in_base[j] && !base.has_edge_ids(g.id(i), g.id(j)))
        .count() as i64;
    let n = g.n() as i64;
    let rest: Vec<usize> = (0..nv).filter(|&i| !in_base[i]).collect();
    let f = |s: &[bool]| -> i64 {
        let size = rest.iter().filter(|&&v| s[v]).count() as i64;
        let edges = g
            .edges()
            .filter(|&(i, j)| (s[i] || s[j]) && (s[i] || in_base[i]) && (s[j] || in_base[j]))
            .count() as i64;
        (n - 1) * size - (n - 2) * (edges + extra0)
    };
    let (min_relative, witness_s, method) = if rest.len() <= EXHAUSTIVE_LIMIT {
        let mut best = 0i64;
        let mut witness: Option<Vec<usize>> = None;
        let mut s = vec![false; nv];
        for m in 0u32..(1u32 << rest.len()) {
            for (k, &v) in rest.iter().enumerate() {
                s[v] = m >> k & 1 == 1;
            }
            let val = f(&s);
            best = best.min(val);
            if val < 0 {
                let cand: Vec<usize> = rest.iter().copied().filter(|&v| s[v]).collect();
                if witness.as_ref().is_none_or(|w| smaller(g, &cand, w)) {
                    witness = Some(cand);
                }
            }
        }
        (best, witness, StrengthMethod::Exhaustive)
    } else {
        let (best, chosen) = min_cut_selection(g, &in_base, extra0);
        let witness = (best < 0).then(|| {
            let mut s = chosen;
            // shrink to an inclusion-minimal violating set, highest ids first
            for k in (0..nv).rev() {
                if s[k] {
                    s[k] = false;
                    if f(&s) >= 0 {
                        s[k] = true;
                    }
                }
            }
            (0..nv).filter(|&v| s[v]).collect()
        });
        (best, witness, StrengthMethod::MinCut)
    };
    let witness = witness_s.map(|s| {
        let mut w = base.vertex_set();
        w.extend(s.into_iter().map(|v| g.id(v).clone()));
        w
    });
    Ok(DeltaReport {
        n: g.n(),
        delta: delta(g),
        base_delta: delta(base),
        relative: delta(g) - delta(base),
        min_relative,
        strong: min_relative >= 0,
        relative_to: base.vertex_set(),
        witness,
        method,
    })
}

/// Strength of the induced subgraph on `base`.
pub fn is_n_strong_set(base: &BTreeSet<VertexId>, g: &IncidenceGraph) -> Result<DeltaReport, RankError> {
    is_n_strong(&g.induced(base)?, g)
}

/// Smaller cardinality first, then lexicographic order of sorted ids.
fn smaller(g: &IncidenceGraph, a: &[usize], b: &[usize]) -> bool {
    if a.len() != b.len() {
        return a.len() < b.len();
    }
    let ids = |s: &[usize]| -> Vec<VertexId> {
        let mut v: Vec<VertexId> = s.iter().map(|&i| g.id(i).clone()).collect();
        v.sort();
        v
    };
    ids(a) < ids(b)
}

/// Maximum-profit selection: each edge with an endpoint outside the base pays
/// n−2 when all its non-base endpoints are chosen, each chosen vertex costs
/// n−1. Returns min f and the minimal optimal selection.
fn min_cut_selection(g: &IncidenceGraph, in_base: &[bool], extra0: i64) -> (i64, Vec<bool>) {
    let nv = g.vertex_count();
    let n = g.n() as i64;
    let items: Vec<(usize, usize)> =
        g.edges().filter(|&(i, j)| !in_base[i] || !in_base[j]).collect();
    // nodes: source, sink, vertices, edge items
    let (src, sink) = (0, 1);
    let vnode = |v: usize| 2 + v;
    let mut net = FlowNet::new(2 + nv + items.len());
    const INF: i64 = i64::MAX / 4;
    for (k, &(i, j)) in items.iter().enumerate() {
        let node = 2 + nv + k;
        net.add(src, node, n - 2);
        for v in [i, j] {
            if !in_base[v] {
                net.add(node, vnode(v), INF);
            }
        }
    }
    for v in 0..nv {
        if !in_base[v] {
            net.add(vnode(v), sink, n - 1);
        }
    }
    let flow = net.max_flow(src, sink);
    let profit = (n - 2) * items.len() as i64 - flow;
    let reach = net.reachable(src);
    let chosen: Vec<bool> = (0..nv).map(|v| !in_base[v] && reach[vnode(v)]).collect();
    (-profit - (n - 2) * extra0, chosen)
}

struct FlowNet {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
}

impl FlowNet {
    fn new(nodes: usize) -> Self {
        FlowNet { head: vec![Vec::new(); nodes], to: Vec::new(), cap: Vec::new() }
    }

    fn add(&mut self, a: usize, b: usize, c: i64) {
        self.head[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(c);
        self.head[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(0);
    }

    fn levels(&self, s: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.head.len()];
        level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(x) = q.pop_front() {
            for &e in &self.head[x] {
                if self.cap[e] > 0 && level[self.to[e]] == usize::MAX {
                    level[self.to[e]] = level[x] + 1;
                    q.push_back(self.to[e]);
                }
            }
        }
        level
    }

    fn reachable(&self, s: usize) -> Vec<bool> {
        self.levels(s).into_iter().map(|l| l != usize::MAX).collect()
    }

    fn push(&mut self, x: usize, t: usize, f: i64, level: &[usize], it: &mut [usize]) -> i64 {
        if x == t {
            return f;
        }
        while it[x] < self.head[x].len() {
            let e = self.head[x][it[x]];
            let y = self.to[e];
            if self.cap[e] > 0 && level[y] == level[x] + 1 {
                let got = self.push(y, t, f.min(self.cap[e]), level, it);
                if got > 0 {
                    self.cap[e] -= got;
                    self.cap[e ^ 1] += got;
                    return got;
                }
            }
            it[x] += 1;
        }
        0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        loop {
            let level = self.levels(s);
            if level[t] == usize::MAX {
                return total;
            }
            let mut it = vec![0; self.head.len()];
            loop {
                let f = self.push(s, t, i64::MAX, &level, &mut it);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ZeroStepKind {
    CleanArc,
    Closed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZeroStep {
    pub kind: ZeroStepKind,
    /// Vertices added by this step.
    pub added: BTreeSet<VertexId>,
}

/// Splits a 0-extension `base ⊆ g` into minimal 0-extensions.
///
/// Each step adds the smallest nonempty S (ties: lexicographic) with
/// δ(B ∪ S / B) = 0; since every relative value is ≥ 0, B ∪ S is again
/// strong in g and no proper strong intermediate set exists.
pub fn minimal_zero_decomposition(
    base: &BTreeSet<VertexId>,
    g: &IncidenceGraph,
) -> Result<Vec<ZeroStep>, RankError> {
    let report = is_n_strong_set(base, g)?;
    if !report.strong {
        return Err(RankError::NotStrong(report.witness.unwrap_or_default()));
    }
    let rel = delta_relative(g, base)?;
    if rel != 0 {
        return Err(RankError::NonZeroRelative(rel));
    }
    let nv = g.vertex_count();
    let n = g.n() as i64;
    let mut current = g.mask_of(base)?;
    let mut steps = Vec::new();
    while current.iter().any(|b| !b) {
        let allowed: Vec<bool> = current.iter().map(|b| !b).collect();
        let mut best: Option<Vec<usize>> = None;
        let _ = for_each_connected(g, &allowed, nv, &mut |s| {
            if best.as_ref().is_some_and(|b| b.len() < s.len()) {
                return ControlFlow::Continue(());
            }
            let mut inside = current.clone();
            for &v in s {
                inside[v] = true;
            }
            let edges = s
                .iter()
                .flat_map(|&v| g.neighbors(v).iter().map(move |&w| (v, w)))
                .filter(|&(v, w)| inside[w] && (current[w] || v < w))
                .count() as i64;
            if (n - 1) * s.len() as i64 - (n - 2) * edges == 0
                && best.as_ref().is_none_or(|b| smaller(g, s, b))
            {
                best = Some(s.to_vec());
            }
            ControlFlow::Continue(())
        });
        let s = best.expect("a relative-0 set exists while the chain is incomplete");
        let kind = if is_clean_arc_step(g, &current, &s) {
            ZeroStepKind::CleanArc
        } else {
            ZeroStepKind::Closed
        };
        for &v in &s {
            current[v] = true;
        }
        steps.push(ZeroStep { kind, added: g.ids_of(s) });
    }
    Ok(steps)
}

/// `s` is the interior of a clean arc of B ∪ S with both endpoints in B.
fn is_clean_arc_step(g: &IncidenceGraph, current: &[bool], s: &[usize]) -> bool {
    if s.len() + 2 != g.n() {
        return false;
    }
    let in_s = |v: usize| s.contains(&v);
    let mut outer = 0;
    for &v in s {
        let nb: Vec<usize> =
            g.neighbors(v).iter().copied().filter(|&w| current[w] || in_s(w)).collect();
        if nb.len() != 2 {
            return false;
        }
        outer += nb.iter().filter(|&&w| current[w]).count();
    }
    // a path on s with two edges leaving it
    outer == 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{shapes, GraphBuilder, Part};

    fn v(s: &str) -> VertexId {
        VertexId::new(s).unwrap()
    }

    fn set(ids: &[&str]) -> BTreeSet<VertexId> {
        ids.iter().map(|s| v(s)).collect()
    }

    #[test]
    fn path_and_hexagon_values() {
        assert_eq!(delta(&shapes::path(3, 6)), 8);
        assert_eq!(delta(&shapes::cycle(3, 6)), 6);
        assert_eq!(delta(&shapes::path(4, 7)), 10);
        assert_eq!(delta(&shapes::fano()), 7);
    }

    #[test]
    fn relative_values() {
        let p = shapes::path(3, 6);
        let base = p.vertex_set();
        let mut b = p.to_builder();
        b.vertex(v("z"), Part::Point).unwrap();
        b.edge(&v("x3"), &v("z")).unwrap();
        assert_eq!(delta_relative(&b.build(), &base).unwrap(), 1);
        let mut b = p.to_builder();
        b.vertex(v("m"), Part::Line).unwrap();
        b.edge(&v("x0"), &v("m")).unwrap();
        b.edge(&v("x4"), &v("m")).unwrap();
        assert_eq!(delta_relative(&b.build(), &base).unwrap(), 0);
    }

    #[test]
    fn strength_examples() {
        let hex = shapes::cycle(3, 6);
        let edge = hex.induced([&v("x0"), &v("x1")]).unwrap();
        assert!(is_n_strong(&edge, &hex).unwrap().strong);
        let mut b = hex.to_builder();
        b.remove_vertex(&v("x0"));
        b.vertex(v("x0"), Part::Point).unwrap();
        b.edge(&v("x0"), &v("x1")).unwrap();
        let open_path = b.build(); // hexagon minus the edge x0-x5
        let r = is_n_strong(&open_path, &hex).unwrap();
        assert!(!r.strong);
        assert_eq!(r.witness.as_ref().unwrap(), &hex.vertex_set());
        assert_eq!(r.witness_relative(&open_path, &hex), Some(-1));
        assert!(is_n_strong(&hex, &hex).unwrap().strong);
    }

    #[test]
    fn mincut_agrees_with_exhaustive() {
        // a seed strong in its own completion-like extension, plus a bad chord
        let g = shapes::cycle(3, 12);
        for base_len in [2usize, 4, 6] {
            let ids: Vec<VertexId> = (0..base_len).map(|i| v(&format!("x{i}"))).collect();
            let base = g.induced(ids.iter()).unwrap();
            let in_base: Vec<bool> = (0..g.vertex_count()).map(|i| base.contains(g.id(i))).collect();
            let (best, _) = min_cut_selection(&g, &in_base, 0);
            let r = is_n_strong(&base, &g).unwrap();
            assert_eq!(r.method, StrengthMethod::Exhaustive);
            assert_eq!(best, r.min_relative);
        }
    }

    #[test]
    fn arc_step_decomposition() {
        let mut b = shapes::path(3, 4).to_builder();
        b.vertex(v("m"), Part::Line).unwrap();
        b.edge(&v("x0"), &v("m")).unwrap();
        b.edge(&v("x4"), &v("m")).unwrap();
        let g = b.build();
        let base = set(&["x0", "x1", "x2", "x3", "x4"]);
        let steps = minimal_zero_decomposition(&base, &g).unwrap();
        assert_eq!(steps, vec![ZeroStep { kind: ZeroStepKind::CleanArc, added: set(&["m"]) }]);
        assert!(minimal_zero_decomposition(&g.vertex_set(), &g).unwrap().is_empty());
        assert!(matches!(
            minimal_zero_decomposition(&set(&["x0"]), &g),
            Err(RankError::NonZeroRelative(_))
        ));
    }

    #[test]
    fn overflow_is_reported() {
        assert_eq!(delta_counts(usize::MAX, 2, 0), Err(RankError::Overflow));
        let _ = GraphBuilder::new(3).unwrap();
    }
}
