use std::collections::VecDeque;

use serde::Serialize;

use super::metrics::UNREACHED;
use super::{GraphPath, IncidenceGraph};

/// A shortest cycle as a cyclic index sequence, or `None` for forests.
///
/// One BFS per root; a non-tree edge `(u, w)` closes a walk of length
/// `d(u) + d(w) + 1`. The minimum over all roots is the girth, and the walk
/// attaining it is a simple cycle (any overlap would expose a shorter one).
pub fn shortest_cycle(g: &IncidenceGraph) -> Option<Vec<usize>> {
    let nv = g.vertex_count();
    let mut best: Option<(usize, usize, usize, usize)> = None; // (len, root, u, w)
    let mut dist = vec![UNREACHED; nv];
    let mut parent = vec![UNREACHED; nv];
    for root in 0..nv {
        dist.fill(UNREACHED);
        parent.fill(UNREACHED);
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            if let Some((len, ..)) = best {
                if 2 * dist[u] + 1 >= len {
                    break;
                }
            }
            for &w in g.neighbors(u) {
                if dist[w] == UNREACHED {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else if parent[u] != w {
                    let len = dist[u] + dist[w] + 1;
                    if best.is_none_or(|(b, ..)| len < b) {
                        best = Some((len, root, u, w));
                    }
                }
            }
        }
    }
    let (_, root, u, w) = best?;
    // Replay the winning BFS to recover its parent pointers.
    parent.fill(UNREACHED);
    dist.fill(UNREACHED);
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        for &y in g.neighbors(x) {
            if dist[y] == UNREACHED {
                dist[y] = dist[x] + 1;
                parent[y] = x;
                queue.push_back(y);
            }
        }
    }
    let climb = |mut v: usize| {
        let mut path = vec![v];
        while v != root {
            v = parent[v];
            path.push(v);
        }
        path
    };
    let mut left = climb(u);
    let right = climb(w);
    left.reverse(); // root .. u
    let mut cycle = left;
    cycle.extend_from_slice(&right[..right.len() - 1]);
    debug_assert!(is_simple_cycle(g, &cycle));
    Some(cycle)
}

fn is_simple_cycle(g: &IncidenceGraph, cycle: &[usize]) -> bool {
    let mut seen = std::collections::BTreeSet::new();
    cycle.len() >= 4
        && cycle.iter().all(|v| seen.insert(*v))
        && cycle.windows(2).all(|w| g.has_edge(w[0], w[1]))
        && g.has_edge(cycle[0], cycle[cycle.len() - 1])
}

/// Outcome of a budgeted long-cycle search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CycleSearch {
    Yes(GraphPath),
    No,
    Unknown { expansions: u64 },
}

/// Looks for a simple cycle of length at least `min_len`.
///
/// Depth-first search restricted to the 2-core, each cycle rooted at its
/// smallest vertex. A branch is cut when the current path plus every
/// unvisited vertex still reachable from its tip cannot reach `min_len`, or
/// when the root is no longer reachable. `budget` caps node expansions;
/// running out yields [`CycleSearch::Unknown`].
pub fn long_cycle_exists(g: &IncidenceGraph, min_len: usize, budget: u64) -> CycleSearch {
    let nv = g.vertex_count();
    let core = two_core(g);
    let mut search = DfsState {
        g,
        allowed: core,
        on_path: vec![false; nv],
        path: Vec::new(),
        expansions: 0,
        budget,
        min_len: min_len.max(4),
        scratch: vec![UNREACHED; nv],
    };
    let roots: Vec<usize> = (0..nv).filter(|&v| search.allowed[v]).collect();
    for root in roots {
        search.path.clear();
        search.path.push(root);
        search.on_path[root] = true;
        let found = search.extend(root);
        search.on_path[root] = false;
        match found {
            Step::Found => {
                return CycleSearch::Yes(GraphPath(
                    search.path.iter().map(|&v| g.id(v).clone()).collect(),
                ))
            }
            Step::OutOfBudget => return CycleSearch::Unknown { expansions: search.expansions },
            Step::Exhausted => {}
        }
        // Cycles through `root` are done; later roots only use larger vertices.
        search.allowed[root] = false;
    }
    CycleSearch::No
}

enum Step {
    Found,
    Exhausted,
    OutOfBudget,
}

struct DfsState<'a> {
    g: &'a IncidenceGraph,
    allowed: Vec<bool>,
    on_path: Vec<bool>,
    path: Vec<usize>,
    expansions: u64,
    budget: u64,
    min_len: usize,
    scratch: Vec<usize>,
}

impl DfsState<'_> {
    fn extend(&mut self, root: usize) -> Step {
        let tip = *self.path.last().expect("nonempty path");
        if self.path.len() >= self.min_len && self.path.len() >= 3 && self.g.has_edge(tip, root) {
            return Step::Found;
        }
        if !self.promising(root, tip) {
            return Step::Exhausted;
        }
        for k in 0..self.g.neighbors(tip).len() {
            let w = self.g.neighbors(tip)[k];
            if w <= root || !self.allowed[w] || self.on_path[w] {
                continue;
            }
            self.expansions += 1;
            if self.expansions > self.budget {
                return Step::OutOfBudget;
            }
            self.path.push(w);
            self.on_path[w] = true;
            match self.extend(root) {
                Step::Exhausted => {}
                other => return other,
            }
            self.on_path[w] = false;
            self.path.pop();
        }
        Step::Exhausted
    }

    /// Upper bound check: reachable fresh vertices from the tip must be able
    /// to close the cycle back to the root with enough length.
    fn promising(&mut self, root: usize, tip: usize) -> bool {
        let g = self.g;
        self.scratch.fill(UNREACHED);
        self.scratch[tip] = 0;
        let mut queue = VecDeque::from([tip]);
        let mut reachable = 0usize;
        let mut closes = false;
        while let Some(x) = queue.pop_front() {
            for &y in g.neighbors(x) {
                if y == root && x != tip {
                    closes = true;
                }
                if y <= root || !self.allowed[y] || self.on_path[y] || self.scratch[y] != UNREACHED
                {
                    continue;
                }
                self.scratch[y] = 0;
                reachable += 1;
                queue.push_back(y);
            }
        }
        closes && self.path.len() + reachable >= self.min_len
    }
}

/// Vertices of the 2-core (iteratively strip vertices of degree < 2).
pub(crate) fn two_core(g: &IncidenceGraph) -> Vec<bool> {
    let nv = g.vertex_count();
    let mut deg: Vec<usize> = (0..nv).map(|v| g.degree(v)).collect();
    let mut alive = vec![true; nv];
    let mut stack: Vec<usize> = (0..nv).filter(|&v| deg[v] < 2).collect();
    while let Some(v) = stack.pop() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for &w in g.neighbors(v) {
            if alive[w] {
                deg[w] -= 1;
                if deg[w] < 2 {
                    stack.push(w);
                }
            }
        }
    }
    alive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::shapes;

    #[test]
    fn shortest_cycles() {
        assert_eq!(shortest_cycle(&shapes::cycle(3, 6)).map(|c| c.len()), Some(6));
        assert_eq!(shortest_cycle(&shapes::path(3, 6)), None);
        let f = shapes::fano();
        let c = shortest_cycle(&f).unwrap();
        assert_eq!(c.len(), 6);
        assert!(is_simple_cycle(&f, &c));
        let t = shapes::two_hexagons();
        assert_eq!(shortest_cycle(&t).map(|c| c.len()), Some(6));
    }

    #[test]
    fn long_cycles() {
        assert_eq!(long_cycle_exists(&shapes::cycle(3, 6), 8, 1_000_000), CycleSearch::No);
        let t = shapes::two_hexagons();
        match long_cycle_exists(&t, 10, 1_000_000) {
            CycleSearch::Yes(c) => {
                assert_eq!(c.0.len(), 10);
                assert!(c.is_simple_cycle_in(&t));
            }
            other => panic!("expected a 10-cycle, got {other:?}"),
        }
        assert_eq!(long_cycle_exists(&t, 12, 1_000_000), CycleSearch::No);
        assert_eq!(long_cycle_exists(&shapes::fano(), 16, 1_000_000), CycleSearch::No);
        match long_cycle_exists(&shapes::fano(), 8, 1_000_000) {
            CycleSearch::Yes(c) => assert!(c.0.len() >= 8 && c.is_simple_cycle_in(&shapes::fano())),
            other => panic!("expected a long cycle, got {other:?}"),
        }
        assert!(matches!(
            long_cycle_exists(&shapes::fano(), 14, 3),
            CycleSearch::Unknown { .. }
        ));
    }

    #[test]
    fn core_strips_trees() {
        let core = two_core(&shapes::path(3, 5));
        assert!(core.iter().all(|&b| !b));
        assert!(two_core(&shapes::cycle(3, 8)).iter().all(|&b| b));
    }
}
