//! Polygon axioms, loose ends, clean arcs, openness with hyper-free
//! certificates, closed-over sets and a bounded Cl closure.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::ControlFlow;

use serde::Serialize;
use thiserror::Error;

use crate::completion::geodesic_closure;
use crate::graph::metrics::{bfs, bfs_within, UNREACHED};
use crate::graph::{
    geodesics, long_cycle_exists, shortest_cycle, CycleSearch, GraphBuilder, GraphError, GraphPath,
    IncidenceGraph, VertexId,
};
use crate::subsets::for_each_connected;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolygonError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("sets overlap in {0}")]
    Overlap(VertexId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Axiom {
    Connected,
    Girth,
    Diameter,
    Thick,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub axiom: Axiom,
    pub detail: String,
    /// Re-checkable evidence: a cycle, a geodesic, or offending vertices.
    pub witness: Vec<VertexId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub verdict: bool,
    pub failures: Vec<Failure>,
}

impl CheckReport {
    fn from(failures: Vec<Failure>) -> Self {
        CheckReport { verdict: failures.is_empty(), failures }
    }
}

fn disconnection(g: &IncidenceGraph) -> Option<Failure> {
    let comps = g.components();
    (comps.len() > 1).then(|| Failure {
        axiom: Axiom::Connected,
        detail: format!("{} components", comps.len()),
        witness: vec![g.id(comps[0][0]).clone(), g.id(comps[1][0]).clone()],
    })
}

fn cycle_ids(g: &IncidenceGraph, c: &[usize]) -> Vec<VertexId> {
    c.iter().map(|&v| g.id(v).clone()).collect()
}

/// Connected with girth at least 2n.
pub fn check_partial(g: &IncidenceGraph) -> CheckReport {
    let mut failures: Vec<Failure> = disconnection(g).into_iter().collect();
    if let Some(c) = shortest_cycle(g) {
        if c.len() < 2 * g.n() {
            failures.push(Failure {
                axiom: Axiom::Girth,
                detail: format!("cycle of length {} < {}", c.len(), 2 * g.n()),
                witness: cycle_ids(g, &c),
            });
        }
    }
    CheckReport::from(failures)
}

/// Diameter exactly n and girth exactly 2n.
pub fn check_weak(g: &IncidenceGraph) -> CheckReport {
    let n = g.n();
    let mut failures = Vec::new();
    if let Some(f) = disconnection(g) {
        failures.push(f);
    } else if let Some((a, b, d)) = farthest_pair(g) {
        if d != n {
            let geo = geodesics(g, g.id(a), g.id(b)).expect("connected");
            failures.push(Failure {
                axiom: Axiom::Diameter,
                detail: format!("diameter {d} != {n}"),
                witness: geo.witness.0,
            });
        }
    } else {
        failures.push(Failure { axiom: Axiom::Diameter, detail: "empty graph".into(), witness: vec![] });
    }
    match shortest_cycle(g) {
        Some(c) if c.len() == 2 * n => {}
        Some(c) => failures.push(Failure {
            axiom: Axiom::Girth,
            detail: format!("girth {} != {}", c.len(), 2 * n),
            witness: cycle_ids(g, &c),
        }),
        None => failures.push(Failure {
            axiom: Axiom::Girth,
            detail: "no cycle".into(),
            witness: vec![],
        }),
    }
    CheckReport::from(failures)
}

/// Every vertex has valency at least 3; one failure per thin vertex.
pub fn check_thick(g: &IncidenceGraph) -> CheckReport {
    let failures = (0..g.vertex_count())
        .filter(|&v| g.degree(v) < 3)
        .map(|v| Failure {
            axiom: Axiom::Thick,
            detail: format!("valency {}", g.degree(v)),
            witness: vec![g.id(v).clone()],
        })
        .collect();
    CheckReport::from(failures)
}

/// Pair at maximal finite distance (least indices first) and that distance.
fn farthest_pair(g: &IncidenceGraph) -> Option<(usize, usize, usize)> {
    let mut best: Option<(usize, usize, usize)> = None;
    for a in 0..g.vertex_count() {
        for (b, d) in bfs(g, a).into_iter().enumerate() {
            if d != UNREACHED && best.is_none_or(|(_, _, e)| d > e) {
                best = Some((a, b, d));
            }
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Nondegenerate {
    /// A geodesic of length n+3 or a cycle of length at least 2n+2.
    Yes(GraphPath),
    No,
    Unknown { expansions: u64 },
}

pub fn check_nondegenerate(g: &IncidenceGraph, budget: u64) -> Nondegenerate {
    let n = g.n();
    if let Some((a, b, d)) = farthest_pair(g) {
        if d >= n + 3 {
            let mut path = geodesics(g, g.id(a), g.id(b)).expect("finite distance").witness;
            path.0.truncate(n + 4);
            return Nondegenerate::Yes(path);
        }
    }
    match long_cycle_exists(g, 2 * n + 2, budget) {
        CycleSearch::Yes(c) => Nondegenerate::Yes(c),
        CycleSearch::No => Nondegenerate::No,
        CycleSearch::Unknown { expansions } => Nondegenerate::Unknown { expansions },
    }
}

/// Vertices of valency at most 1.
pub fn loose_ends(g: &IncidenceGraph) -> BTreeSet<VertexId> {
    g.ids_of((0..g.vertex_count()).filter(|&v| g.degree(v) <= 1))
}

/// A path `a, interior.., b` of length n−1 whose interior vertices have
/// valency 2; oriented so that `a < b`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CleanArc {
    pub a: VertexId,
    pub interior: Vec<VertexId>,
    pub b: VertexId,
}

pub fn clean_arcs(g: &IncidenceGraph) -> Vec<CleanArc> {
    let all = vec![true; g.vertex_count()];
    arcs_within(g, &all, &|_| true)
        .into_iter()
        .map(|(a, int, b)| CleanArc {
            a: g.id(a).clone(),
            interior: int.iter().map(|&v| g.id(v).clone()).collect(),
            b: g.id(b).clone(),
        })
        .collect()
}

fn degree_within(g: &IncidenceGraph, alive: &[bool], v: usize) -> usize {
    g.neighbors(v).iter().filter(|&&w| alive[w]).count()
}

/// Clean arcs of `g[alive]` whose interior vertices satisfy `inner`, sorted
/// (vertex indices follow id order, so this is id order too).
fn arcs_within(
    g: &IncidenceGraph,
    alive: &[bool],
    inner: &dyn Fn(usize) -> bool,
) -> Vec<(usize, Vec<usize>, usize)> {
    let len = g.n() - 2;
    let ok = |v: usize| alive[v] && inner(v) && degree_within(g, alive, v) == 2;
    let mut found = BTreeSet::new();
    for s in 0..g.vertex_count() {
        if !ok(s) {
            continue;
        }
        for &a in g.neighbors(s).iter().filter(|&&w| alive[w]) {
            let mut interior = vec![s];
            let (mut prev, mut cur) = (a, s);
            let mut good = true;
            while interior.len() < len {
                let next = g.neighbors(cur).iter().copied().find(|&w| alive[w] && w != prev);
                match next {
                    Some(w) if ok(w) && !interior.contains(&w) && w != a => {
                        interior.push(w);
                        prev = cur;
                        cur = w;
                    }
                    _ => {
                        good = false;
                        break;
                    }
                }
            }
            if !good {
                continue;
            }
            let Some(b) = g.neighbors(cur).iter().copied().find(|&w| alive[w] && w != prev) else {
                continue;
            };
            if b == a || interior.contains(&b) {
                continue;
            }
            if a < b {
                found.insert((a, interior, b));
            } else {
                interior.reverse();
                found.insert((b, interior, a));
            }
        }
    }
    found.into_iter().collect()
}

/// One hyper-free step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum HFStep {
    Loose { vertex: VertexId, attach: Option<VertexId> },
    /// Clean arc; `relative` steps skip the distance n+1 requirement.
    Arc { a: VertexId, b: VertexId, interior: Vec<VertexId>, relative: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HFCertificate {
    pub n: usize,
    pub base: BTreeSet<VertexId>,
    pub steps: Vec<HFStep>,
}

impl fmt::Display for HFCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "hfcert {} base", self.n)?;
        for v in &self.base {
            write!(f, " {v}")?;
        }
        writeln!(f)?;
        for s in &self.steps {
            match s {
                HFStep::Loose { vertex, attach: Some(a) } => writeln!(f, "loose {vertex} {a}")?,
                HFStep::Loose { vertex, attach: None } => writeln!(f, "loose {vertex}")?,
                HFStep::Arc { a, b, interior, relative } => {
                    write!(f, "arc {a} {b}")?;
                    for v in interior {
                        write!(f, " {v}")?;
                    }
                    writeln!(f, "{}", if *relative { " relative" } else { "" })?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct CertParseError {
    pub line: usize,
    pub message: String,
}

impl std::str::FromStr for HFCertificate {
    type Err = CertParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let err = |line: usize, m: &str| CertParseError { line, message: m.to_string() };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hl, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
        let tok: Vec<&str> = header.split_whitespace().collect();
        if tok.len() < 3 || tok[0] != "hfcert" || tok[2] != "base" {
            return Err(err(hl, "expected 'hfcert <n> base ...'"));
        }
        let n: usize = tok[1].parse().map_err(|_| err(hl, "bad n"))?;
        if n < 3 {
            return Err(err(hl, "n must be at least 3"));
        }
        let id = |line: usize, s: &str| VertexId::new(s).map_err(|e| err(line, &e.to_string()));
        let base = tok[3..].iter().map(|s| id(hl, s)).collect::<Result<_, _>>()?;
        let mut steps = Vec::new();
        for (ln, l) in lines {
            let t: Vec<&str> = l.split_whitespace().collect();
            match t[0] {
                "loose" if t.len() == 2 || t.len() == 3 => steps.push(HFStep::Loose {
                    vertex: id(ln, t[1])?,
                    attach: t.get(2).map(|s| id(ln, s)).transpose()?,
                }),
                "arc" => {
                    let relative = t.last() == Some(&"relative");
                    let body = &t[1..t.len() - usize::from(relative)];
                    if body.len() != n {
                        return Err(err(ln, "arc needs two endpoints and n-2 interior vertices"));
                    }
                    steps.push(HFStep::Arc {
                        a: id(ln, body[0])?,
                        b: id(ln, body[1])?,
                        interior: body[2..].iter().map(|s| id(ln, s)).collect::<Result<_, _>>()?,
                        relative,
                    });
                }
                _ => return Err(err(ln, "unrecognised step")),
            }
        }
        Ok(HFCertificate { n, base, steps })
    }
}

/// Result of a (relative) greedy deconstruction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Openness {
    pub open: bool,
    pub certificate: Option<HFCertificate>,
    /// Remaining vertices when the strip got stuck; closed over the base.
    pub stuck: Option<BTreeSet<VertexId>>,
}

/// Greedy deconstruction of `g`: delete loose ends, then interiors of clean
/// arcs (lowest ids first). Open iff nothing remains.
pub fn is_open(g: &IncidenceGraph) -> Openness {
    let nv = g.vertex_count();
    strip(g, &vec![false; nv], &vec![true; nv])
}

/// Relative strip of `b` over `a` inside `g[a ∪ b]`.
pub fn is_open_over(
    b: &BTreeSet<VertexId>,
    a: &BTreeSet<VertexId>,
    g: &IncidenceGraph,
) -> Result<Openness, PolygonError> {
    let (am, bm) = disjoint_masks(b, a, g)?;
    Ok(strip(g, &am, &bm))
}

fn disjoint_masks(
    b: &BTreeSet<VertexId>,
    a: &BTreeSet<VertexId>,
    g: &IncidenceGraph,
) -> Result<(Vec<bool>, Vec<bool>), PolygonError> {
    if let Some(v) = a.intersection(b).next() {
        return Err(PolygonError::Overlap(v.clone()));
    }
    Ok((g.mask_of(a)?, g.mask_of(b)?))
}

fn strip(g: &IncidenceGraph, a_mask: &[bool], b_mask: &[bool]) -> Openness {
    let nv = g.vertex_count();
    let n = g.n();
    let mut alive: Vec<bool> = (0..nv).map(|v| a_mask[v] || b_mask[v]).collect();
    let mut steps = Vec::new();
    loop {
        let removable = |alive: &[bool], v: usize| alive[v] && b_mask[v];
        if !(0..nv).any(|v| removable(&alive, v)) {
            break;
        }
        if let Some(v) = (0..nv).find(|&v| removable(&alive, v) && degree_within(g, &alive, v) <= 1) {
            let attach = g.neighbors(v).iter().find(|&&w| alive[w]).map(|&w| g.id(w).clone());
            steps.push(HFStep::Loose { vertex: g.id(v).clone(), attach });
            alive[v] = false;
            continue;
        }
        let arcs = arcs_within(g, &alive, &|v| b_mask[v]);
        if let Some((a, interior, b)) = arcs.into_iter().next() {
            for &v in &interior {
                alive[v] = false;
            }
            let d = bfs_within(g, a, Some(&alive))[b];
            steps.push(HFStep::Arc {
                a: g.id(a).clone(),
                b: g.id(b).clone(),
                interior: interior.iter().map(|&v| g.id(v).clone()).collect(),
                relative: d != n + 1,
            });
            continue;
        }
        let stuck: BTreeSet<VertexId> = g.ids_of((0..nv).filter(|&v| removable(&alive, v)));
        debug_assert!(closed_masks(g, a_mask, &alive.iter().zip(b_mask).map(|(x, y)| *x && *y).collect::<Vec<_>>()));
        return Openness { open: false, certificate: None, stuck: Some(stuck) };
    }
    steps.reverse();
    let base = g.ids_of((0..nv).filter(|&v| a_mask[v]));
    Openness { open: true, certificate: Some(HFCertificate { n, base, steps }), stuck: None }
}

/// `b` is closed over `a`: inside `g[a ∪ b]`, no vertex of `b` has valency
/// at most 1 and no clean arc has its whole interior in `b`.
pub fn is_closed_over(
    b: &BTreeSet<VertexId>,
    a: &BTreeSet<VertexId>,
    g: &IncidenceGraph,
) -> Result<bool, PolygonError> {
    let (am, bm) = disjoint_masks(b, a, g)?;
    Ok(closed_masks(g, &am, &bm))
}

fn closed_masks(g: &IncidenceGraph, a_mask: &[bool], b_mask: &[bool]) -> bool {
    let alive: Vec<bool> = a_mask.iter().zip(b_mask).map(|(x, y)| *x || *y).collect();
    (0..g.vertex_count()).all(|v| !b_mask[v] || degree_within(g, &alive, v) >= 2)
        && arcs_within(g, &alive, &|v| b_mask[v]).is_empty()
}

/// Inclusion-minimal nonempty sets of at most `cap` vertices outside `a`
/// that are closed over `a`. Minimal closed sets are connected, so only
/// connected candidates are enumerated.
pub fn find_closed_sets(
    a: &BTreeSet<VertexId>,
    g: &IncidenceGraph,
    cap: usize,
) -> Result<Vec<BTreeSet<VertexId>>, PolygonError> {
    let am = g.mask_of(a)?;
    let allowed: Vec<bool> = am.iter().map(|x| !x).collect();
    let mut closed: Vec<Vec<usize>> = Vec::new();
    let mut bm = vec![false; g.vertex_count()];
    let _ = for_each_connected(g, &allowed, cap, &mut |s| {
        for &v in s {
            bm[v] = true;
        }
        if closed_masks(g, &am, &bm) {
            let mut s = s.to_vec();
            s.sort_unstable();
            closed.push(s);
        }
        for &v in s {
            bm[v] = false;
        }
        ControlFlow::Continue(())
    });
    closed.sort_by_key(|s| s.len());
    let mut minimal: Vec<Vec<usize>> = Vec::new();
    for s in closed {
        if !minimal.iter().any(|m| m.iter().all(|v| s.binary_search(v).is_ok())) {
            minimal.push(s);
        }
    }
    let mut out: Vec<BTreeSet<VertexId>> = minimal.into_iter().map(|s| g.ids_of(s)).collect();
    out.sort();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Closure {
    pub set: BTreeSet<VertexId>,
    pub cap: usize,
    pub rounds: usize,
    pub rounds_used: usize,
    /// Whether a full round changed nothing (a fixpoint under these limits).
    pub fixpoint: bool,
}

/// Alternates adding every closed set found (within `cap`) and the
/// geodesic closure, for at most `rounds` rounds.
pub fn cl_closure(
    a: &BTreeSet<VertexId>,
    g: &IncidenceGraph,
    cap: usize,
    rounds: usize,
) -> Result<Closure, PolygonError> {
    g.mask_of(a)?;
    let mut set = a.clone();
    let mut used = 0;
    let mut fixpoint = false;
    while used < rounds {
        used += 1;
        let before = set.len();
        for b in find_closed_sets(&set, g, cap)? {
            set.extend(b);
        }
        set = geodesic_closure(g, &set)?;
        if set.len() == before {
            fixpoint = true;
            break;
        }
    }
    Ok(Closure { set, cap, rounds, rounds_used: used, fixpoint })
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("step {index}: {reason}")]
pub struct StepFailure {
    /// Index of the failing step; `steps.len()` for the final comparison.
    pub index: usize,
    pub reason: String,
}

/// Replays `cert` on `base` and compares the result with `target`.
pub fn verify_hf_certificate(
    cert: &HFCertificate,
    base: &IncidenceGraph,
    target: &IncidenceGraph,
) -> Result<(), StepFailure> {
    let fail = |index: usize, reason: String| Err(StepFailure { index, reason });
    let n = cert.n;
    if base.vertex_set() != cert.base {
        return fail(0, "certificate base differs from the base graph".into());
    }
    let mut g = base.with_n(n).map_err(|e| StepFailure { index: 0, reason: e.to_string() })?;
    for (k, step) in cert.steps.iter().enumerate() {
        let mut b = g.to_builder();
        let res: Result<(), String> = (|| {
            match step {
                HFStep::Loose { vertex, attach } => {
                    let part = target.part_of(vertex).ok_or("vertex not in target")?;
                    if g.contains(vertex) {
                        return Err(format!("{vertex} already present"));
                    }
                    b.vertex(vertex.clone(), part).map_err(|e| e.to_string())?;
                    if let Some(a) = attach {
                        b.edge(vertex, a).map_err(|e| e.to_string())?;
                    }
                }
                HFStep::Arc { a, b: e, interior, relative } => {
                    if interior.len() + 2 != n {
                        return Err(format!("interior has {} vertices", interior.len()));
                    }
                    let pa = g.part_of(a).ok_or(format!("{a} missing"))?;
                    let pb = g.part_of(e).ok_or(format!("{e} missing"))?;
                    if pb != pa.after(n - 1) {
                        return Err("endpoint parts do not fit an arc of length n-1".into());
                    }
                    if !relative {
                        let d = crate::graph::distance(&g, a, e).map_err(|x| x.to_string())?;
                        if d != Some(n + 1) {
                            return Err(format!("endpoints at distance {d:?}, not n+1"));
                        }
                    }
                    let mut prev = a.clone();
                    for (i, v) in interior.iter().enumerate() {
                        if g.contains(v) {
                            return Err(format!("{v} already present"));
                        }
                        b.vertex(v.clone(), pa.after(i + 1)).map_err(|x| x.to_string())?;
                        b.edge(&prev, v).map_err(|x| x.to_string())?;
                        prev = v.clone();
                    }
                    b.edge(&prev, e).map_err(|x| x.to_string())?;
                }
            }
            Ok(())
        })();
        if let Err(r) = res {
            return fail(k, r);
        }
        g = b.build();
    }
    if !g.same_shape(target) {
        return fail(cert.steps.len(), "replay does not reproduce the target".into());
    }
    Ok(())
}

/// Empty graph carrying the certificate's gonality, for replays from ∅.
pub fn empty_base(n: usize) -> IncidenceGraph {
    GraphBuilder::new(n).expect("n >= 3").build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{shapes, Part};

    fn v(s: &str) -> VertexId {
        VertexId::new(s).unwrap()
    }

    fn set(ids: &[&str]) -> BTreeSet<VertexId> {
        ids.iter().map(|s| v(s)).collect()
    }

    #[test]
    fn axiom_checks() {
        assert!(check_partial(&shapes::cycle(3, 6)).verdict);
        let r = check_partial(&shapes::cycle(3, 4));
        assert!(!r.verdict && r.failures[0].witness.len() == 4);
        assert!(!check_partial(&shapes::cycle(4, 6)).verdict);
        assert!(check_weak(&shapes::fano()).verdict);
        assert!(check_weak(&shapes::cycle(3, 6)).verdict);
        assert!(!check_weak(&shapes::path(3, 6)).verdict);
        assert!(check_thick(&shapes::fano()).verdict);
        assert_eq!(check_thick(&shapes::cycle(3, 6)).failures.len(), 6);
        assert!(!check_thick(&shapes::path(3, 1)).verdict);
    }

    #[test]
    fn nondegeneracy() {
        match check_nondegenerate(&shapes::path(3, 6), 1000) {
            Nondegenerate::Yes(p) => assert_eq!(p.len_edges(), 6),
            other => panic!("{other:?}"),
        }
        assert_eq!(check_nondegenerate(&shapes::cycle(3, 6), 1000), Nondegenerate::No);
        assert!(matches!(check_nondegenerate(&shapes::two_hexagons(), 1000), Nondegenerate::Yes(_)));
    }

    #[test]
    fn loose_ends_and_arcs() {
        assert_eq!(loose_ends(&shapes::path(3, 6)), set(&["x0", "x6"]));
        assert!(loose_ends(&shapes::cycle(3, 6)).is_empty());
        assert_eq!(clean_arcs(&shapes::cycle(3, 6)).len(), 6);
        assert!(clean_arcs(&shapes::fano()).is_empty());
        assert_eq!(clean_arcs(&shapes::cycle(4, 8)).len(), 8);
        let arcs = clean_arcs(&shapes::path(4, 3));
        assert_eq!(arcs, vec![CleanArc { a: v("x0"), interior: vec![v("x1"), v("x2")], b: v("x3") }]);
    }

    #[test]
    fn openness() {
        let hex = shapes::cycle(3, 6);
        let r = is_open(&hex);
        assert!(r.open);
        let cert = r.certificate.unwrap();
        let arcs = cert.steps.iter().filter(|s| matches!(s, HFStep::Arc { .. })).count();
        assert_eq!(arcs, 1);
        assert!(matches!(cert.steps.last(), Some(HFStep::Arc { relative: false, .. })));
        verify_hf_certificate(&cert, &empty_base(3), &hex).unwrap();
        let f = is_open(&shapes::fano());
        assert!(!f.open);
        assert_eq!(f.stuck.unwrap().len(), 14);
        assert!(is_open(&empty_base(3)).open);
    }

    #[test]
    fn certificate_text_round_trip() {
        let cert = is_open(&shapes::two_hexagons()).certificate.unwrap();
        let text = cert.to_string();
        let back: HFCertificate = text.parse().unwrap();
        assert_eq!(back, cert);
    }

    #[test]
    fn bad_certificates() {
        let hex = shapes::cycle(3, 6);
        let mut cert = is_open(&hex).certificate.unwrap();
        // an arc between vertices at distance 2 is not a free-completion step
        let bad = HFCertificate {
            n: 3,
            base: set(&["x0", "x1", "x2"]),
            steps: vec![HFStep::Arc { a: v("x0"), b: v("x2"), interior: vec![v("m")], relative: false }],
        };
        let base = shapes::path(3, 2);
        assert_eq!(verify_hf_certificate(&bad, &base, &hex).unwrap_err().index, 0);
        cert.steps.pop();
        assert!(verify_hf_certificate(&cert, &empty_base(3), &hex).is_err());
        let none = HFCertificate { n: 3, base: hex.vertex_set(), steps: vec![] };
        assert!(verify_hf_certificate(&none, &hex, &hex).is_ok());
    }

    #[test]
    fn closed_over_examples() {
        let hex = shapes::cycle(3, 6);
        assert!(!is_closed_over(&set(&["x1", "x3", "x4", "x5"]), &set(&["x0", "x2"]), &hex).unwrap());
        let mut b = hex.to_builder();
        b.vertex(v("iso"), Part::Point).unwrap();
        let g = b.build();
        assert!(!is_closed_over(&set(&["iso"]), &set(&[]), &g).unwrap());
        assert!(matches!(
            is_closed_over(&set(&["x0"]), &set(&["x0"]), &hex),
            Err(PolygonError::Overlap(_))
        ));
        assert!(find_closed_sets(&set(&[]), &hex, 6).unwrap().is_empty());
        assert!(find_closed_sets(&hex.vertex_set(), &hex, 6).unwrap().is_empty());
    }

    #[test]
    fn relative_strip() {
        let hex = shapes::cycle(3, 6);
        let r = is_open_over(&set(&["x2", "x3", "x4", "x5"]), &set(&["x0", "x1"]), &hex).unwrap();
        assert!(r.open);
        let base = hex.induced(&set(&["x0", "x1"])).unwrap();
        verify_hf_certificate(&r.certificate.unwrap(), &base, &hex).unwrap();
        let e = is_open_over(&set(&[]), &set(&["x0"]), &hex).unwrap();
        assert!(e.open && e.certificate.unwrap().steps.is_empty());
    }
}
