//! Part-preserving isomorphism and induced-subgraph embedding by backtracking.

use std::collections::BTreeMap;

use super::metrics::{bfs, UNREACHED};
use super::{IncidenceGraph, VertexId};

/// A part-preserving isomorphism `g1 -> g2`, if one exists.
///
/// Colours come from (part, degree, distance profile) refined by neighbour
/// colours; the backtracking then only pairs equally coloured vertices.
/// Deterministic for fixed inputs.
pub fn isomorphic(g1: &IncidenceGraph, g2: &IncidenceGraph) -> Option<BTreeMap<VertexId, VertexId>> {
    if g1.vertex_count() != g2.vertex_count() || g1.edge_count() != g2.edge_count() {
        return None;
    }
    let [c1, c2] = refine([g1, g2]);
    let mut h1 = c1.clone();
    let mut h2 = c2.clone();
    h1.sort_unstable();
    h2.sort_unstable();
    if h1 != h2 {
        return None;
    }
    let mut m = Matcher::new(g1, g2, true, Some((c1, c2)));
    m.run()
}

/// Induced, part-preserving embedding of `small` into `big` extending the
/// partial map `fixed`. Returns the full map on success.
pub fn find_embedding(
    small: &IncidenceGraph,
    big: &IncidenceGraph,
    fixed: &BTreeMap<VertexId, VertexId>,
) -> Option<BTreeMap<VertexId, VertexId>> {
    if small.vertex_count() > big.vertex_count() {
        return None;
    }
    let mut m = Matcher::new(small, big, true, None);
    for (s, b) in fixed {
        let (si, bi) = (small.index_of(s)?, big.index_of(b)?);
        if !m.assign_checked(si, bi) {
            return None;
        }
    }
    m.run()
}

fn refine(graphs: [&IncidenceGraph; 2]) -> [Vec<usize>; 2] {
    let mut colors: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    let mut table: BTreeMap<(u8, usize, Vec<usize>), usize> = BTreeMap::new();
    let mut initial: [Vec<(u8, usize, Vec<usize>)>; 2] = [Vec::new(), Vec::new()];
    for (k, g) in graphs.iter().enumerate() {
        for v in 0..g.vertex_count() {
            let mut profile = Vec::new();
            for d in bfs(g, v) {
                let slot = if d == UNREACHED { 0 } else { d + 1 };
                if profile.len() <= slot {
                    profile.resize(slot + 1, 0);
                }
                profile[slot] += 1;
            }
            let key = (g.part(v) as u8, g.degree(v), profile);
            table.entry(key.clone()).or_insert(0);
            initial[k].push(key);
        }
    }
    for (id, (_, slot)) in table.iter_mut().enumerate() {
        *slot = id;
    }
    for k in 0..2 {
        colors[k] = initial[k].iter().map(|key| table[key]).collect();
    }
    let mut count = table.len();
    loop {
        let mut next: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
        let mut sigs: [Vec<(usize, Vec<usize>)>; 2] = [Vec::new(), Vec::new()];
        for (k, g) in graphs.iter().enumerate() {
            for v in 0..g.vertex_count() {
                let mut nb: Vec<usize> = g.neighbors(v).iter().map(|&w| colors[k][w]).collect();
                nb.sort_unstable();
                let sig = (colors[k][v], nb);
                next.entry(sig.clone()).or_insert(0);
                sigs[k].push(sig);
            }
        }
        for (id, (_, slot)) in next.iter_mut().enumerate() {
            *slot = id;
        }
        for k in 0..2 {
            colors[k] = sigs[k].iter().map(|s| next[s]).collect();
        }
        if next.len() == count {
            return colors;
        }
        count = next.len();
    }
}

struct Matcher<'a> {
    small: &'a IncidenceGraph,
    big: &'a IncidenceGraph,
    induced: bool,
    colors: Option<(Vec<usize>, Vec<usize>)>,
    fwd: Vec<usize>,
    used: Vec<bool>,
}

const FREE: usize = usize::MAX;

impl<'a> Matcher<'a> {
    fn new(
        small: &'a IncidenceGraph,
        big: &'a IncidenceGraph,
        induced: bool,
        colors: Option<(Vec<usize>, Vec<usize>)>,
    ) -> Self {
        Matcher {
            small,
            big,
            induced,
            colors,
            fwd: vec![FREE; small.vertex_count()],
            used: vec![false; big.vertex_count()],
        }
    }

    fn compatible(&self, s: usize, b: usize) -> bool {
        if self.used[b]
            || self.small.part(s) != self.big.part(b)
            || self.small.degree(s) > self.big.degree(b)
        {
            return false;
        }
        if let Some((cs, cb)) = &self.colors {
            if cs[s] != cb[b] {
                return false;
            }
        }
        for (t, &img) in self.fwd.iter().enumerate() {
            if img == FREE {
                continue;
            }
            let es = self.small.has_edge(s, t);
            let eb = self.big.has_edge(b, img);
            if es && !eb || self.induced && eb && !es {
                return false;
            }
        }
        true
    }

    fn assign_checked(&mut self, s: usize, b: usize) -> bool {
        if self.fwd[s] != FREE {
            return self.fwd[s] == b;
        }
        if !self.compatible(s, b) {
            return false;
        }
        self.fwd[s] = b;
        self.used[b] = true;
        true
    }

    /// Next unmapped vertex: most mapped neighbours, then lowest index.
    fn pick(&self) -> Option<usize> {
        (0..self.small.vertex_count())
            .filter(|&v| self.fwd[v] == FREE)
            .max_by_key(|&v| {
                let mapped = self.small.neighbors(v).iter().filter(|&&w| self.fwd[w] != FREE).count();
                (mapped, self.small.degree(v), std::cmp::Reverse(v))
            })
    }

    fn search(&mut self) -> bool {
        let Some(s) = self.pick() else { return true };
        let anchor = self.small.neighbors(s).iter().copied().find(|&w| self.fwd[w] != FREE);
        let candidates: Vec<usize> = match anchor {
            Some(w) => self.big.neighbors(self.fwd[w]).to_vec(),
            None => (0..self.big.vertex_count()).collect(),
        };
        for b in candidates {
            if self.compatible(s, b) {
                self.fwd[s] = b;
                self.used[b] = true;
                if self.search() {
                    return true;
                }
                self.fwd[s] = FREE;
                self.used[b] = false;
            }
        }
        false
    }

    fn run(&mut self) -> Option<BTreeMap<VertexId, VertexId>> {
        if !self.search() {
            return None;
        }
        Some(
            self.fwd
                .iter()
                .enumerate()
                .map(|(s, &b)| (self.small.id(s).clone(), self.big.id(b).clone()))
                .collect(),
        )
    }
}

/// Whether `map` is an edge- and part-preserving bijection of `g` onto itself.
pub fn is_automorphism(g: &IncidenceGraph, map: &BTreeMap<VertexId, VertexId>) -> bool {
    if map.len() != g.vertex_count() {
        return false;
    }
    let mut image = Vec::with_capacity(g.vertex_count());
    for i in 0..g.vertex_count() {
        match map.get(g.id(i)).and_then(|t| g.index_of(t)) {
            Some(j) if g.part(j) == g.part(i) => image.push(j),
            _ => return false,
        }
    }
    let mut seen = vec![false; g.vertex_count()];
    for &j in &image {
        if std::mem::replace(&mut seen[j], true) {
            return false;
        }
    }
    g.edges().all(|(a, b)| g.has_edge(image[a], image[b]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{shapes, GraphBuilder, Part};

    fn v(s: &str) -> VertexId {
        VertexId::new(s).unwrap()
    }

    fn relabel(g: &IncidenceGraph, prefix: &str, swap_parts: bool) -> IncidenceGraph {
        let mut b = GraphBuilder::new(g.n()).unwrap();
        let name = |i: usize| v(&format!("{prefix}{}", g.vertex_count() - 1 - i));
        for i in 0..g.vertex_count() {
            let p = if swap_parts { g.part(i).opposite() } else { g.part(i) };
            b.vertex(name(i), p).unwrap();
        }
        for (i, j) in g.edges() {
            b.edge(&name(i), &name(j)).unwrap();
        }
        b.build()
    }

    #[test]
    fn renamed_hexagon_is_isomorphic() {
        let g = shapes::cycle(3, 6);
        let h = relabel(&g, "q", false);
        let m = isomorphic(&g, &h).unwrap();
        assert_eq!(m.len(), 6);
        assert!(isomorphic(&g, &shapes::path(3, 5)).is_none());
    }

    #[test]
    fn fano_part_swap() {
        let f = shapes::fano();
        assert!(isomorphic(&f, &relabel(&f, "z", false)).is_some());
        // The Fano plane is self-dual, so swapping parts still matches;
        // a non-self-dual graph shows that parts are respected.
        assert!(isomorphic(&f, &relabel(&f, "z", true)).is_some());
        let p = shapes::path(3, 2); // P-L-P
        assert!(isomorphic(&p, &relabel(&p, "z", true)).is_none());
    }

    #[test]
    fn embedding_respects_fixed_and_induced() {
        let big = shapes::cycle(3, 6);
        let small = shapes::path(3, 2);
        let mut fixed = BTreeMap::new();
        fixed.insert(v("x0"), v("x2"));
        let m = find_embedding(&small, &big, &fixed).unwrap();
        assert_eq!(m[&v("x0")], v("x2"));
        assert_eq!(m[&v("x1")], v("x1"));
        // a 4-path cannot embed induced into a 4-cycle
        let mut b = GraphBuilder::new(3).unwrap();
        for (i, p) in ["a", "b", "c", "d"].iter().enumerate() {
            b.vertex(v(p), Part::Point.after(i)).unwrap();
        }
        for w in ["a", "b", "c", "d", "a"].windows(2) {
            b.edge(&v(w[0]), &v(w[1])).unwrap();
        }
        let c4 = b.build();
        assert!(find_embedding(&shapes::path(3, 3), &c4, &BTreeMap::new()).is_none());
    }

    #[test]
    fn rotation_is_automorphism() {
        let g = shapes::cycle(3, 6);
        let map: BTreeMap<_, _> =
            (0..6).map(|i| (v(&format!("x{i}")), v(&format!("x{}", (i + 2) % 6)))).collect();
        assert!(is_automorphism(&g, &map));
        let bad: BTreeMap<_, _> =
            (0..6).map(|i| (v(&format!("x{i}")), v(&format!("x{}", (i + 1) % 6)))).collect();
        assert!(!is_automorphism(&g, &bad)); // moves points to lines
    }
}
