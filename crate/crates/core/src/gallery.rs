//! Finite witness configurations: the acl ≠ dcl cycles and prefixes of the
//! non-superstability ladder, each with assertions that can be re-run.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::completion::{complete, CompletionError};
use crate::graph::metrics::{bfs, bfs_within, UNREACHED};
use crate::graph::{is_automorphism, parse_gon, serialize_gon, shapes, GraphError, ParseError};
use crate::polygon::{check_partial, is_closed_over, is_open, is_open_over, PolygonError};
use crate::{GraphBuilder, IncidenceGraph, Part, VertexId};

#[derive(Debug, Error)]
pub enum GalleryError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Polygon(#[from] PolygonError),
    #[error(transparent)]
    Completion(#[from] CompletionError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("stage budget {budget} cannot host rung {rung}")]
    Budget { budget: usize, rung: usize },
    #[error("malformed bundle: {0}")]
    Malformed(String),
    #[error("{0}")]
    Io(String),
}

pub type VertexMap = BTreeMap<VertexId, VertexId>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessBundle {
    /// `acl-dcl-odd`, `acl-dcl-even` or `ladder`; selects the assertions.
    pub kind: String,
    #[serde(skip)]
    pub graph: IncidenceGraph,
    pub sets: BTreeMap<String, BTreeSet<VertexId>>,
    pub maps: BTreeMap<String, VertexMap>,
    pub meta: BTreeMap<String, String>,
    pub assertions: Vec<(String, bool)>,
}

impl WitnessBundle {
    pub fn all_pass(&self) -> bool {
        self.assertions.iter().all(|(_, ok)| *ok)
    }

    pub fn set(&self, name: &str) -> &BTreeSet<VertexId> {
        static EMPTY: BTreeSet<VertexId> = BTreeSet::new();
        self.sets.get(name).unwrap_or(&EMPTY)
    }

    /// Re-evaluates the assertions from the graph, sets and maps alone.
    pub fn recheck(&self) -> Result<Vec<(String, bool)>, GalleryError> {
        match self.kind.as_str() {
            "acl-dcl-odd" | "acl-dcl-even" => acl_assertions(self),
            "ladder" => ladder_assertions(self),
            other => Err(GalleryError::Malformed(format!("unknown bundle kind {other}"))),
        }
    }

    /// `sets.txt`: `kind K`, `meta KEY VALUE`, `set NAME ids...`,
    /// `map NAME a1 b1 a2 b2 ...`.
    pub fn sets_text(&self) -> String {
        let mut out = format!("kind {}\n", self.kind);
        for (k, v) in &self.meta {
            out.push_str(&format!("meta {k} {v}\n"));
        }
        for (name, set) in &self.sets {
            out.push_str(&format!("set {name}"));
            for v in set {
                out.push_str(&format!(" {v}"));
            }
            out.push('\n');
        }
        for (name, map) in &self.maps {
            out.push_str(&format!("map {name}"));
            for (a, b) in map {
                out.push_str(&format!(" {a} {b}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn asserts_text(&self) -> String {
        self.assertions.iter().map(|(name, ok)| format!("{name} {}\n", if *ok { "pass" } else { "FAIL" })).collect()
    }

    pub fn write(&self, dir: &Path) -> Result<(), GalleryError> {
        let io = |e: std::io::Error| GalleryError::Io(format!("{}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        fs::write(dir.join("graph.gon"), serialize_gon(&self.graph)).map_err(io)?;
        fs::write(dir.join("sets.txt"), self.sets_text()).map_err(io)?;
        fs::write(dir.join("asserts.txt"), self.asserts_text()).map_err(io)?;
        Ok(())
    }

    /// Reads a bundle back; assertions come from `asserts.txt` as written.
    pub fn read(dir: &Path) -> Result<WitnessBundle, GalleryError> {
        let read = |name: &str| {
            fs::read_to_string(dir.join(name)).map_err(|e| GalleryError::Io(format!("{}: {e}", dir.join(name).display())))
        };
        let graph = parse_gon(&read("graph.gon")?)?;
        let mut bundle = WitnessBundle {
            kind: String::new(),
            graph,
            sets: BTreeMap::new(),
            maps: BTreeMap::new(),
            meta: BTreeMap::new(),
            assertions: Vec::new(),
        };
        for line in read("sets.txt")?.lines() {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let bad = || GalleryError::Malformed(line.to_string());
            match tokens.as_slice() {
                [] => {}
                ["kind", k] => bundle.kind = k.to_string(),
                ["meta", k, rest @ ..] => {
                    bundle.meta.insert(k.to_string(), rest.join(" "));
                }
                ["set", name, ids @ ..] => {
                    let set = ids.iter().map(|s| VertexId::new(*s)).collect::<Result<_, _>>()?;
                    bundle.sets.insert(name.to_string(), set);
                }
                ["map", name, pairs @ ..] => {
                    if pairs.len() % 2 != 0 {
                        return Err(bad());
                    }
                    let map = pairs
                        .chunks(2)
                        .map(|p| Ok((VertexId::new(p[0])?, VertexId::new(p[1])?)))
                        .collect::<Result<_, GraphError>>()?;
                    bundle.maps.insert(name.to_string(), map);
                }
                _ => return Err(bad()),
            }
        }
        for line in read("asserts.txt")?.lines() {
            match line.split_whitespace().collect::<Vec<_>>().as_slice() {
                [] => {}
                [name, "pass"] => bundle.assertions.push((name.to_string(), true)),
                [name, "FAIL"] => bundle.assertions.push((name.to_string(), false)),
                _ => return Err(GalleryError::Malformed(line.to_string())),
            }
        }
        Ok(bundle)
    }
}

fn id(s: String) -> VertexId {
    VertexId::from_valid(s)
}

fn set_of<'a>(ids: impl IntoIterator<Item = &'a VertexId>) -> BTreeSet<VertexId> {
    ids.into_iter().cloned().collect()
}

/// The configuration from the proof that acl ≠ dcl.
///
/// Odd n: the cycle `x0 .. x{2n+1}`, arcs `g{i}.{p}` from `x_i` to
/// `x_{i+n+1}` for `i = 0..=n` with midpoints `m_i`, and the half-turn.
/// Even n: the cycle `x0 .. x{2n-1}`, pendants `y_i` on `x_i` (`i = 1..=n`),
/// the arcs `g{i}.{p}` from `y_i` to `x_{i+n}` whose last interior vertex is
/// `z_i`, and the half-turn exchanging `y_i` and `z_i`.
pub fn acl_dcl_witness(n: usize) -> Result<WitnessBundle, GalleryError> {
    if n < 3 {
        return Err(GalleryError::Precondition(format!("n = {n} < 3")));
    }
    let x = |j: usize| id(format!("x{j}"));
    let g = |i: usize, p: usize| id(format!("g{i}.{p}"));
    let mut sets = BTreeMap::new();
    let mut meta = BTreeMap::new();
    let mut b = GraphBuilder::new(n)?;
    let mut rot = VertexMap::new();
    let mut mids = BTreeSet::new();
    let kind;
    if n % 2 == 1 {
        kind = "acl-dcl-odd";
        let len = 2 * n + 2;
        let cycle = shapes::cycle_named(n, len, "x");
        b.absorb(&cycle)?;
        for i in 0..=n {
            let (a, e) = (x(i), x(i + n + 1));
            let mut prev = a.clone();
            for p in 1..=n - 2 {
                b.vertex(g(i, p), Part::Point.after(i + p))?;
                b.edge(&prev, &g(i, p))?;
                prev = g(i, p);
                rot.insert(g(i, p), g(i, n - 1 - p));
            }
            b.edge(&prev, &e)?;
            mids.insert(g(i, (n - 1) / 2));
        }
        for j in 0..len {
            rot.insert(x(j), x((j + n + 1) % len));
        }
        sets.insert("A".into(), set_of(cycle.ids()));
    } else {
        kind = "acl-dcl-even";
        let len = 2 * n;
        let cycle = shapes::cycle_named(n, len, "x");
        b.absorb(&cycle)?;
        let y = |i: usize| id(format!("y{i}"));
        let mut ys = BTreeSet::new();
        let mut zs = BTreeSet::new();
        for i in 1..=n {
            b.vertex(y(i), Part::Point.after(i + 1))?;
            b.edge(&x(i), &y(i))?;
            let mut prev = y(i);
            for p in 1..=n - 2 {
                b.vertex(g(i, p), Part::Point.after(i + 1 + p))?;
                b.edge(&prev, &g(i, p))?;
                prev = g(i, p);
            }
            b.edge(&prev, &x((i + n) % len))?;
            // On x_i, y_i, g.1 .. g.{n-2}, x_{i+n} the half-turn is the reversal.
            let walk: Vec<VertexId> = std::iter::once(x(i))
                .chain(std::iter::once(y(i)))
                .chain((1..=n - 2).map(|p| g(i, p)))
                .chain(std::iter::once(x((i + n) % len)))
                .collect();
            for (k, v) in walk.iter().enumerate().skip(1).take(n - 1) {
                rot.insert(v.clone(), walk[n - k].clone());
            }
            // middle vertex of the arc nearer y_i
            mids.insert(g(i, n / 2 - 1));
            ys.insert(y(i));
            zs.insert(g(i, n - 2));
        }
        for j in 0..len {
            rot.insert(x(j), x((j + n) % len));
        }
        let a = set_of(cycle.ids());
        sets.insert("D".into(), a.union(&ys).cloned().collect());
        sets.insert("D'".into(), a.union(&zs).cloned().collect());
        sets.insert("A".into(), a);
        sets.insert("y".into(), ys);
        sets.insert("z".into(), zs);
        meta.insert("middle".into(), "interior vertex of the arc nearer y_i".into());
    }
    let graph = b.build();
    sets.insert("midpoints".into(), mids);
    sets.insert("C".into(), graph.vertex_set());
    let mut maps = BTreeMap::new();
    maps.insert("half-turn".into(), rot);
    let mut bundle = WitnessBundle { kind: kind.into(), graph, sets, maps, meta, assertions: Vec::new() };
    bundle.assertions = bundle.recheck()?;
    Ok(bundle)
}

fn acl_assertions(w: &WitnessBundle) -> Result<Vec<(String, bool)>, GalleryError> {
    let g = &w.graph;
    let empty = VertexMap::new();
    let rot = w.maps.get("half-turn").unwrap_or(&empty);
    let mids = w.set("midpoints");
    let a = w.set("A");
    let mut out = vec![
        ("partial".to_string(), check_partial(g).verdict),
        ("half-turn-automorphism".to_string(), is_automorphism(g, rot)),
        ("fixes-midpoints".to_string(), !mids.is_empty() && mids.iter().all(|m| rot.get(m) == Some(m))),
        ("moves-every-vertex-of-A".to_string(), !a.is_empty() && a.iter().all(|v| rot.get(v).is_some_and(|t| t != v))),
        ("A-invariant".to_string(), a.iter().all(|v| rot.get(v).is_some_and(|t| a.contains(t)))),
    ];
    let rest: BTreeSet<VertexId> = w.set("C").difference(mids).cloned().collect();
    out.push(("C-closed-over-midpoints".into(), is_closed_over(&rest, mids, g)?));
    if w.kind == "acl-dcl-odd" {
        out.push(("A-open".into(), is_open(&g.induced(a.iter())?).open));
    } else {
        let (d, d2) = (w.set("D"), w.set("D'"));
        let swaps = d.iter().all(|v| rot.get(v).is_some_and(|t| d2.contains(t)));
        out.push(("D-to-D'".into(), swaps && d.len() == d2.len()));
        out.push(("D-open".into(), is_open(&g.induced(d.iter())?).open));
        out.push(("D'-open".into(), is_open(&g.induced(d2.iter())?).open));
    }
    Ok(out)
}

/// The non-superstability bound `d(y_i, Γ_{i-1}) ≥ n/2 − 1`, rounded up.
pub fn ladder_depth(n: usize) -> usize {
    n.div_ceil(2) - 1
}

/// A finite prefix of the ladder: the completion of `γ_{n+3}` truncated at
/// `stage_budget` stages, with rungs `y_i` (stage `i`, far from stage
/// `i-1`), fresh neighbours `z_i` (`z0` on `x_{n+3}`) and paths `λ_i` from
/// `z_{i-1}` to `z_i` of length n-1 or n, whichever fits the parts.
pub fn ladder_prefix(n: usize, rungs: usize, stage_budget: usize) -> Result<WitnessBundle, GalleryError> {
    if n < 3 {
        return Err(GalleryError::Precondition(format!("n = {n} < 3")));
    }
    if rungs > stage_budget {
        return Err(GalleryError::Budget { budget: stage_budget, rung: rungs });
    }
    let gamma = shapes::path(n, n + 3);
    let trace = complete(&gamma, stage_budget)?;
    if rungs > trace.depth() {
        return Err(GalleryError::Budget { budget: trace.depth(), rung: rungs });
    }
    let top = trace.last();
    let mut b = top.to_builder();
    let z = |i: usize| id(format!("z{i}"));
    let end = id(format!("x{}", n + 3));
    b.vertex(z(0), gamma.part_of(&end).expect("path end").opposite())?;
    b.edge(&end, &z(0))?;
    let mut sets = BTreeMap::new();
    let mut ys = BTreeSet::new();
    let mut meta = BTreeMap::new();
    meta.insert("stages".into(), trace.depth().to_string());
    meta.insert("depth".into(), ladder_depth(n).to_string());
    for i in 1..=rungs {
        let cur = b.clone().build();
        let stage = trace.snapshot(i).expect("depth checked");
        let prev = trace.snapshot(i - 1).expect("depth checked");
        let inside = stage.mask_of(prev.ids())?;
        let from_z = bfs(&cur, cur.require(&z(i - 1))?);
        // rung: far enough from the previous stage, then as far as possible
        // from z_{i-1} so that λ_i closes no short cycle
        let y = (0..stage.vertex_count())
            .filter(|&v| !inside[v])
            .filter(|&v| {
                let d = bfs_within(stage, v, None);
                (0..stage.vertex_count()).filter(|&u| inside[u]).map(|u| d[u]).min().unwrap_or(UNREACHED)
                    >= ladder_depth(n)
            })
            .filter(|&v| !ys.contains(stage.id(v)))
            .max_by_key(|&v| (from_z[cur.require(stage.id(v)).expect("stage inside prefix")], std::cmp::Reverse(v)))
            .ok_or(GalleryError::Budget { budget: stage_budget, rung: i })?;
        let y = stage.id(y).clone();
        let zi = z(i);
        b.vertex(zi.clone(), cur.part_of(&y).expect("y in prefix").opposite())?;
        b.edge(&y, &zi)?;
        let same = cur.part_of(&y) == b.part_of(&z(i - 1)).map(Part::opposite);
        let len = if (n - 1) % 2 == usize::from(!same) { n - 1 } else { n };
        let mut lambda = vec![z(i - 1)];
        for p in 1..len {
            let v = id(format!("l{i}.{p}"));
            b.vertex(v.clone(), b.part_of(&z(i - 1)).expect("z placed").after(p))?;
            b.edge(lambda.last().expect("non-empty"), &v)?;
            lambda.push(v);
        }
        b.edge(lambda.last().expect("non-empty"), &zi)?;
        lambda.push(zi);
        sets.insert(format!("lambda{i}"), lambda.into_iter().collect());
        meta.insert(format!("y{i}"), y.to_string());
        ys.insert(y);
    }
    let graph = b.build();
    sets.insert("gamma".into(), gamma.vertex_set());
    sets.insert("rungs".into(), ys);
    sets.insert("z".into(), (0..=rungs).map(z).collect());
    let mut bundle =
        WitnessBundle { kind: "ladder".into(), graph, sets, maps: BTreeMap::new(), meta, assertions: Vec::new() };
    bundle.assertions = bundle.recheck()?;
    Ok(bundle)
}

fn ladder_assertions(w: &WitnessBundle) -> Result<Vec<(String, bool)>, GalleryError> {
    let g = &w.graph;
    let n = g.n();
    let gamma = w.set("gamma");
    let rest: BTreeSet<VertexId> = g.vertex_set().difference(gamma).cloned().collect();
    let mut out = vec![
        ("partial".to_string(), check_partial(g).verdict),
        ("open".to_string(), is_open(g).open),
        ("gamma-relatively-open".to_string(), is_open_over(&rest, gamma, g)?.open),
    ];
    let mut i = 1;
    while let Some(lambda) = w.sets.get(&format!("lambda{i}")) {
        let (a, b) = (id(format!("z{}", i - 1)), id(format!("z{i}")));
        let len = lambda.len() - 1;
        let ends = lambda.contains(&a) && lambda.contains(&b);
        // λ_i minus its ends hangs only between z_{i-1} and z_i
        let interior: BTreeSet<VertexId> = lambda.iter().filter(|v| **v != a && **v != b).cloned().collect();
        let mut path_ok = ends && (len == n - 1 || len == n);
        if path_ok {
            let mask = g.mask_of(lambda.iter())?;
            let d = bfs_within(g, g.require(&a)?, Some(&mask));
            path_ok = d[g.require(&b)?] == len
                && interior.iter().all(|v| g.index_of(v).is_some_and(|k| g.degree(k) == 2));
        }
        out.push((format!("lambda{i}-path"), path_ok));
        let depth_ok = w
            .meta
            .get(&format!("y{i}"))
            .and_then(|y| VertexId::new(y.clone()).ok())
            .and_then(|y| g.index_of(&y))
            .is_some_and(|y| match g.provenance(y) {
                crate::Provenance::Arc { stage, .. } => *stage == i,
                _ => false,
            });
        out.push((format!("y{i}-stage"), depth_ok));
        i += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acl_odd_three() {
        let w = acl_dcl_witness(3).unwrap();
        assert_eq!((w.graph.vertex_count(), w.graph.edge_count()), (12, 16));
        assert_eq!(w.set("midpoints").len(), 4);
        assert!(w.all_pass(), "{:?}", w.assertions);
    }

    #[test]
    fn acl_five_and_even() {
        let w = acl_dcl_witness(5).unwrap();
        assert_eq!(w.graph.vertex_count(), 12 + 6 * 3);
        assert!(w.all_pass(), "{:?}", w.assertions);
        for n in [4, 6] {
            let w = acl_dcl_witness(n).unwrap();
            assert_eq!(w.graph.vertex_count(), 2 * n + n * (n - 1));
            assert!(w.all_pass(), "n={n}: {:?}", w.assertions);
        }
    }

    #[test]
    fn broken_map_fails() {
        let mut w = acl_dcl_witness(3).unwrap();
        let rot = w.maps.get_mut("half-turn").unwrap();
        let a = VertexId::new("x0").unwrap();
        let b = VertexId::new("x1").unwrap();
        let (ta, tb) = (rot[&a].clone(), rot[&b].clone());
        rot.insert(a, tb);
        rot.insert(b, ta);
        let results = w.recheck().unwrap();
        assert!(results.iter().any(|(name, ok)| name == "half-turn-automorphism" && !ok));
    }

    #[test]
    fn ladders() {
        for (n, rungs) in [(3, 0), (3, 1), (4, 2), (3, 2), (5, 2)] {
            let w = ladder_prefix(n, rungs, rungs.max(1)).unwrap();
            assert!(w.all_pass(), "n={n} rungs={rungs}: {:?}", w.assertions);
            assert_eq!(w.set("rungs").len(), rungs);
        }
        assert!(matches!(ladder_prefix(3, 2, 1), Err(GalleryError::Budget { .. })));
    }
}
