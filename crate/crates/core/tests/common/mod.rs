//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use gon::graph::{shapes, GraphBuilder};
use gon::polygon::{check_nondegenerate, Nondegenerate};
use gon::{IncidenceGraph, Part, VertexId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vid(s: &str) -> VertexId {
    VertexId::new(s).unwrap()
}

/// Plain BFS distances, written independently of the library.
pub fn distances(g: &IncidenceGraph, src: usize) -> Vec<Option<usize>> {
    let mut d = vec![None; g.vertex_count()];
    d[src] = Some(0);
    let mut q = VecDeque::from([src]);
    while let Some(v) = q.pop_front() {
        for &w in g.neighbors(v) {
            if d[w].is_none() {
                d[w] = Some(d[v].unwrap() + 1);
                q.push_back(w);
            }
        }
    }
    d
}

pub fn far_pairs(g: &IncidenceGraph) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..g.vertex_count() {
        let d = distances(g, a);
        for b in a + 1..g.vertex_count() {
            if d[b] == Some(g.n() + 1) {
                out.push((a, b));
            }
        }
    }
    out
}

/// Random hyper-free construction from a single edge: loose ends and clean
/// arcs between pairs at distance n+1. Open by construction.
pub fn random_hf(n: usize, max_vertices: usize, arc_bias: f64, r: &mut ChaCha8Rng) -> IncidenceGraph {
    let mut b = GraphBuilder::new(n).unwrap();
    b.vertex(vid("v0"), Part::Point).unwrap();
    b.vertex(vid("v1"), Part::Line).unwrap();
    b.edge(&vid("v0"), &vid("v1")).unwrap();
    let mut g = b.build();
    let mut next = 2;
    let target = r.gen_range(4..=max_vertices);
    while g.vertex_count() < target {
        let pairs = far_pairs(&g);
        let room = target - g.vertex_count() >= n - 2;
        let mut b = g.to_builder();
        if room && !pairs.is_empty() && r.gen_bool(arc_bias) {
            let &(a, e) = pairs.choose(r).unwrap();
            let mut prev = g.id(a).clone();
            for pos in 1..=n - 2 {
                let v = vid(&format!("v{next}"));
                next += 1;
                b.vertex(v.clone(), g.part(a).after(pos)).unwrap();
                b.edge(&prev, &v).unwrap();
                prev = v;
            }
            b.edge(&prev, g.id(e)).unwrap();
        } else {
            let at = r.gen_range(0..g.vertex_count());
            let v = vid(&format!("v{next}"));
            next += 1;
            b.vertex(v.clone(), g.part(at).opposite()).unwrap();
            b.edge(g.id(at), &v).unwrap();
        }
        g = b.build();
    }
    g
}

/// Random open generator accepted by the non-degeneracy check.
pub fn random_open_nondegenerate(n: usize, max_vertices: usize, r: &mut ChaCha8Rng) -> IncidenceGraph {
    loop {
        let bias = r.gen_range(0.3..0.9);
        let g = random_hf(n, max_vertices, bias, r);
        if matches!(check_nondegenerate(&g, 1_000_000), Nondegenerate::Yes(_)) {
            return g;
        }
    }
}

/// Exhaustive openness: every nonempty vertex subset contains a loose end or
/// a clean arc (valency taken inside the subset). Exponential; small graphs.
pub fn open_by_subsets(g: &IncidenceGraph) -> bool {
    let nv = g.vertex_count();
    assert!(nv <= 18);
    let n = g.n();
    for mask in 1u32..(1 << nv) {
        let inside = |v: usize| mask & (1 << v) != 0;
        let deg = |v: usize| g.neighbors(v).iter().filter(|&&w| inside(w)).count();
        if (0..nv).any(|v| inside(v) && deg(v) <= 1) {
            continue;
        }
        // a clean arc: n-2 consecutive valency-2 vertices with distinct ends
        let mut found = false;
        'outer: for s in (0..nv).filter(|&v| inside(v) && deg(v) == 2) {
            for &first in g.neighbors(s).iter().filter(|&&w| inside(w)) {
                let mut path = vec![first, s];
                while path.len() < n {
                    let cur = *path.last().unwrap();
                    if deg(cur) != 2 {
                        break;
                    }
                    let prev = path[path.len() - 2];
                    let nxt = g.neighbors(cur).iter().copied().find(|&w| inside(w) && w != prev).unwrap();
                    path.push(nxt);
                }
                let interior = &path[1..path.len() - 1];
                if path.len() == n
                    && interior.iter().all(|&v| deg(v) == 2)
                    && path.iter().collect::<BTreeSet<_>>().len() == n
                {
                    found = true;
                    break 'outer;
                }
            }
        }
        if !found {
            return false;
        }
    }
    true
}

pub fn delta_of(g: &IncidenceGraph) -> i64 {
    (g.n() as i64 - 1) * g.vertex_count() as i64 - (g.n() as i64 - 2) * g.edge_count() as i64
}

pub fn hexagon() -> IncidenceGraph {
    shapes::cycle(3, 6)
}

/// Compact copy of a graph for the brute-force oracles: adjacency bitmasks
/// and a bitmask of points.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Small {
    pub adj: Vec<u32>,
    pub points: u32,
}

impl Small {
    pub fn of(g: &IncidenceGraph) -> Small {
        assert!(g.vertex_count() <= 32);
        let mut adj = vec![0u32; g.vertex_count()];
        let mut points = 0;
        for v in 0..g.vertex_count() {
            for &w in g.neighbors(v) {
                adj[v] |= 1 << w;
            }
            if g.part(v) == Part::Point {
                points |= 1 << v;
            }
        }
        Small { adj, points }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn edges(&self) -> usize {
        self.adj.iter().map(|a| a.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn to_graph(&self, n: usize) -> IncidenceGraph {
        let mut b = GraphBuilder::new(n).unwrap();
        let id = |v: usize| vid(&format!("v{v:02}"));
        for v in 0..self.len() {
            let part = if self.points & (1 << v) != 0 { Part::Point } else { Part::Line };
            b.vertex(id(v), part).unwrap();
        }
        for v in 0..self.len() {
            for w in v + 1..self.len() {
                if self.adj[v] & (1 << w) != 0 {
                    b.edge(&id(v), &id(w)).unwrap();
                }
            }
        }
        b.build()
    }

    fn signature(&self, v: usize) -> (bool, u32, Vec<u32>) {
        let mut nd: Vec<u32> = (0..self.len()).filter(|&w| self.adj[v] & (1 << w) != 0).map(|w| self.adj[w].count_ones()).collect();
        nd.sort();
        (self.points & (1 << v) != 0, self.adj[v].count_ones(), nd)
    }

    /// Isomorphism-invariant key used to bucket graphs before exact tests.
    pub fn key(&self) -> Vec<(bool, u32, Vec<u32>)> {
        let mut k: Vec<_> = (0..self.len()).map(|v| self.signature(v)).collect();
        k.sort();
        k
    }
}

/// Part-preserving isomorphism by plain backtracking.
pub fn small_iso(a: &Small, b: &Small) -> bool {
    if a.len() != b.len() || a.edges() != b.edges() || a.key() != b.key() {
        return false;
    }
    let sa: Vec<_> = (0..a.len()).map(|v| a.signature(v)).collect();
    let sb: Vec<_> = (0..b.len()).map(|v| b.signature(v)).collect();
    // visit a in BFS order so each new vertex has mapped neighbours
    let mut order = Vec::new();
    let mut seen = 0u32;
    for s in 0..a.len() {
        if seen & (1 << s) != 0 {
            continue;
        }
        seen |= 1 << s;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            order.push(v);
            for w in 0..a.len() {
                if a.adj[v] & (1 << w) != 0 && seen & (1 << w) == 0 {
                    seen |= 1 << w;
                    q.push_back(w);
                }
            }
        }
    }
    fn go(k: usize, order: &[usize], a: &Small, b: &Small, sa: &[(bool, u32, Vec<u32>)], sb: &[(bool, u32, Vec<u32>)], map: &mut Vec<usize>, used: &mut u32) -> bool {
        if k == order.len() {
            return true;
        }
        let v = order[k];
        for t in 0..b.len() {
            if *used & (1 << t) != 0 || sa[v] != sb[t] {
                continue;
            }
            let ok = order[..k].iter().all(|&u| (a.adj[v] & (1 << u) != 0) == (b.adj[t] & (1 << map[u]) != 0));
            if ok {
                map[v] = t;
                *used |= 1 << t;
                if go(k + 1, order, a, b, sa, sb, map, used) {
                    return true;
                }
                *used &= !(1 << t);
            }
        }
        false
    }
    let mut map = vec![usize::MAX; a.len()];
    let mut used = 0u32;
    go(0, &order, a, b, &sa, &sb, &mut map, &mut used)
}

/// Girth by BFS from every vertex.
pub fn girth_of(g: &IncidenceGraph) -> Option<usize> {
    let nv = g.vertex_count();
    let mut best: Option<usize> = None;
    for s in 0..nv {
        let mut d = vec![usize::MAX; nv];
        let mut parent = vec![usize::MAX; nv];
        d[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &w in g.neighbors(v) {
                if d[w] == usize::MAX {
                    d[w] = d[v] + 1;
                    parent[w] = v;
                    q.push_back(w);
                } else if parent[v] != w {
                    let c = d[v] + d[w] + 1;
                    best = Some(best.map_or(c, |b| b.min(c)));
                }
            }
        }
    }
    best
}

/// Interiors of clean arcs of `s[alive]`: simple paths of n vertices whose
/// n-2 inner vertices have valency 2 inside `alive`.
fn arc_interiors(s: &Small, n: usize, alive: u32) -> Vec<u32> {
    let deg = |v: usize| (s.adj[v] & alive).count_ones();
    let mut out = Vec::new();
    fn extend(s: &Small, n: usize, alive: u32, path: &mut Vec<usize>, out: &mut Vec<u32>, deg: &dyn Fn(usize) -> u32) {
        let last = *path.last().unwrap();
        if path.len() == n {
            let inner: u32 = path[1..n - 1].iter().map(|&v| 1u32 << v).sum();
            out.push(inner);
            return;
        }
        if path.len() > 1 && deg(last) != 2 {
            return;
        }
        for w in 0..s.len() {
            if s.adj[last] & alive & (1 << w) != 0 && !path.contains(&w) {
                path.push(w);
                extend(s, n, alive, path, out, deg);
                path.pop();
            }
        }
    }
    for a in 0..s.len() {
        if alive & (1 << a) != 0 {
            extend(s, n, alive, &mut vec![a], &mut out, &deg);
        }
    }
    out
}

/// Openness by exhaustive search over deletion orders: can the whole graph
/// be removed one loose end or one clean-arc interior at a time?
pub fn open_by_deletion_orders(s: &Small, n: usize) -> bool {
    let full: u32 = if s.len() == 32 { u32::MAX } else { (1u32 << s.len()) - 1 };
    let mut seen = std::collections::HashSet::new();
    let mut stack = vec![full];
    while let Some(alive) = stack.pop() {
        if alive == 0 {
            return true;
        }
        if !seen.insert(alive) {
            continue;
        }
        for v in 0..s.len() {
            if alive & (1 << v) != 0 && (s.adj[v] & alive).count_ones() <= 1 {
                stack.push(alive & !(1 << v));
            }
        }
        for inner in arc_interiors(s, n, alive) {
            stack.push(alive & !inner);
        }
    }
    false
}

/// min over all vertex sets W of δ(g[W]) − δ(base restricted to W).
pub fn min_relative_by_subsets(base: &IncidenceGraph, g: &IncidenceGraph) -> i64 {
    let nv = g.vertex_count();
    assert!(nv <= 16);
    let n = g.n() as i64;
    let in_base: Vec<bool> = (0..nv).map(|v| base.contains(g.id(v))).collect();
    let base_edge = |i: usize, j: usize| in_base[i] && in_base[j] && base.has_edge_ids(g.id(i), g.id(j));
    let mut best = i64::MAX;
    for mask in 0u32..(1 << nv) {
        let inw = |v: usize| mask & (1 << v) != 0;
        let (mut v_all, mut e_all, mut v_b, mut e_b) = (0i64, 0i64, 0i64, 0i64);
        for v in (0..nv).filter(|&v| inw(v)) {
            v_all += 1;
            if in_base[v] {
                v_b += 1;
            }
        }
        for (i, j) in g.edges() {
            if inw(i) && inw(j) {
                e_all += 1;
                if base_edge(i, j) {
                    e_b += 1;
                }
            }
        }
        let rel = ((n - 1) * v_all - (n - 2) * e_all) - ((n - 1) * v_b - (n - 2) * e_b);
        best = best.min(rel);
    }
    best
}

/// Whether `s` has a simple cycle with at least `min_len` vertices.
pub fn has_cycle_at_least(s: &Small, min_len: usize) -> bool {
    fn dfs(s: &Small, start: usize, v: usize, visited: u32, len: usize, min_len: usize) -> bool {
        for w in 0..s.len() {
            if s.adj[v] & (1 << w) == 0 {
                continue;
            }
            if w == start && len >= min_len {
                return true;
            }
            // only vertices above the start keep each cycle counted from its least vertex
            if w > start && visited & (1 << w) == 0 && dfs(s, start, w, visited | (1 << w), len + 1, min_len) {
                return true;
            }
        }
        false
    }
    (0..s.len()).any(|st| dfs(s, st, st, 1 << st, 1, min_len))
}
