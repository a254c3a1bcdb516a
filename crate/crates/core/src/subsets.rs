//! Enumeration of connected vertex subsets (ESU scheme: every connected set
//! is produced exactly once, rooted at its smallest vertex).

use std::ops::ControlFlow;

use crate::graph::IncidenceGraph;

/// Calls `visit` on every connected subset of the `allowed` vertices with at
/// most `max_size` members. The slice handed to `visit` is unsorted.
pub(crate) fn for_each_connected(
    g: &IncidenceGraph,
    allowed: &[bool],
    max_size: usize,
    visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if max_size == 0 {
        return ControlFlow::Continue(());
    }
    let nv = g.vertex_count();
    let mut in_sub = vec![false; nv];
    let mut near = vec![0u32; nv]; // how many subset members are at distance <= 1
    for root in 0..nv {
        if !allowed[root] {
            continue;
        }
        let mut sub = vec![root];
        mark(g, root, &mut in_sub, &mut near, 1);
        let ext: Vec<usize> =
            g.neighbors(root).iter().copied().filter(|&w| w > root && allowed[w]).collect();
        let flow = extend(g, allowed, max_size, root, &mut sub, ext, &mut in_sub, &mut near, visit);
        mark(g, root, &mut in_sub, &mut near, -1);
        flow?;
    }
    ControlFlow::Continue(())
}

fn mark(g: &IncidenceGraph, v: usize, in_sub: &mut [bool], near: &mut [u32], sign: i32) {
    in_sub[v] = sign > 0;
    let bump = |x: &mut u32| {
        if sign > 0 {
            *x += 1
        } else {
            *x -= 1
        }
    };
    bump(&mut near[v]);
    for &w in g.neighbors(v) {
        bump(&mut near[w]);
    }
}

#[allow(clippy::too_many_arguments)]
fn extend(
    g: &IncidenceGraph,
    allowed: &[bool],
    max_size: usize,
    root: usize,
    sub: &mut Vec<usize>,
    mut ext: Vec<usize>,
    in_sub: &mut [bool],
    near: &mut [u32],
    visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    visit(sub)?;
    if sub.len() == max_size {
        return ControlFlow::Continue(());
    }
    while let Some(w) = ext.pop() {
        // exclusive neighbours of w: not in the subset and not adjacent to it
        let mut next = ext.clone();
        for &u in g.neighbors(w) {
            if u > root && allowed[u] && near[u] == 0 && !next.contains(&u) {
                next.push(u);
            }
        }
        sub.push(w);
        mark(g, w, in_sub, near, 1);
        let flow = extend(g, allowed, max_size, root, sub, next, in_sub, near, visit);
        mark(g, w, in_sub, near, -1);
        sub.pop();
        flow?;
    }
    ControlFlow::Continue(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::shapes;
    use std::collections::BTreeSet;

    fn collect(g: &IncidenceGraph, cap: usize) -> BTreeSet<Vec<usize>> {
        let mut out = BTreeSet::new();
        let all = vec![true; g.vertex_count()];
        let _ = for_each_connected(g, &all, cap, &mut |s| {
            let mut s = s.to_vec();
            s.sort_unstable();
            assert!(out.insert(s), "subset produced twice");
            ControlFlow::Continue(())
        });
        out
    }

    fn brute(g: &IncidenceGraph, cap: usize) -> BTreeSet<Vec<usize>> {
        let nv = g.vertex_count();
        let mut out = BTreeSet::new();
        for m in 1u32..(1 << nv) {
            let s: Vec<usize> = (0..nv).filter(|&i| m >> i & 1 == 1).collect();
            if s.len() > cap {
                continue;
            }
            let mask: Vec<bool> = (0..nv).map(|i| m >> i & 1 == 1).collect();
            if g.induced_mask(&mask).is_connected() {
                out.insert(s);
            }
        }
        out
    }

    #[test]
    fn matches_brute_force() {
        for g in [shapes::cycle(3, 8), shapes::two_hexagons(), shapes::path(3, 6)] {
            for cap in [1, 3, 5, 12] {
                assert_eq!(collect(&g, cap), brute(&g, cap));
            }
        }
    }
}
