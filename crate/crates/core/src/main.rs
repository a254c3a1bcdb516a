use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use gon::amalgam::{canonical_amalgam, parse_map, AmalgamSpec};
use gon::completion::{complete, write_trace_bundle};
use gon::gallery::{acl_dcl_witness, ladder_prefix, WitnessBundle};
use gon::graph::{isomorphic, parse_gon, serialize_gon, shapes};
use gon::normalize::{classify_free, free_gon, gamma_k, normalize_to_hatrack, Classification, NormalizeError, NormalizeOptions};
use gon::polygon::{
    check_nondegenerate, check_partial, check_thick, check_weak, clean_arcs, is_closed_over, is_open, is_open_over,
    loose_ends, CheckReport, Nondegenerate,
};
use gon::rank::{delta, is_n_strong};
use gon::{IncidenceGraph, VertexId};

const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Parser)]
#[command(name = "gon", version, about = "Generalized n-gons as bipartite incidence graphs")]
struct Cli {
    /// Print one JSON object instead of text lines.
    #[arg(long, global = true)]
    json: bool,
    /// Search budget (expansions); GON_BUDGET overrides the default.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Override n from the GON header.
    #[arg(long, global = true)]
    n: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Partial,
    Weak,
    Thick,
    Nondegenerate,
}

#[derive(Clone, Copy, ValueEnum)]
enum Example {
    GammaK,
    FreeGon,
    AclDcl,
    Ladder,
    Fano,
}

#[derive(Subcommand)]
enum Cmd {
    /// Polygon axiom checks.
    Check { level: Level, file: PathBuf },
    /// δ_n of a graph.
    Delta { file: PathBuf },
    /// Whether SUB is n-strong in WHOLE.
    Strong { sub: PathBuf, whole: PathBuf },
    /// Free completion stages, written as a trace bundle.
    Complete {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        stages: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Openness (hyper-free deconstruction), optionally over a vertex set.
    Open {
        file: PathBuf,
        #[arg(long)]
        over: Option<PathBuf>,
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Whether the set B is closed over the set A.
    Closed {
        file: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Canonical amalgam of B and C over A.
    Amalgam {
        b: PathBuf,
        c: PathBuf,
        #[arg(long)]
        over: PathBuf,
        #[arg(long)]
        map_b: PathBuf,
        #[arg(long)]
        map_c: PathBuf,
        #[arg(long, default_value_t = 3)]
        stages: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Free-equivalent hat-rack with a certificate.
    Normalize {
        file: PathBuf,
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// k with F(A) ≅ Γ^k.
    Classify { file: PathBuf },
    /// Isomorphism test.
    Iso { g1: PathBuf, g2: PathBuf },
    /// Writes a named example.
    Example {
        name: Example,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        stages: usize,
        #[arg(long, default_value_t = 1)]
        rungs: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

enum Verdict {
    Yes,
    No,
    Unknown,
}

struct Report {
    lines: Vec<String>,
    data: Map<String, Value>,
}

impl Report {
    fn new() -> Report {
        Report { lines: Vec::new(), data: Map::new() }
    }

    fn put(&mut self, key: &str, value: impl Into<Value>, line: impl Into<String>) {
        self.data.insert(key.into(), value.into());
        self.lines.push(line.into());
    }

    fn data(&mut self, key: &str, value: impl Into<Value>) {
        self.data.insert(key.into(), value.into());
    }
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

struct Ctx {
    budget: u64,
    n: Option<usize>,
    warnings: Vec<String>,
}

impl Ctx {
    fn graph(&mut self, path: &Path) -> Result<IncidenceGraph, Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
        let g = parse_gon(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
        match self.n {
            Some(n) if n != g.n() => {
                self.warnings.push(format!("{}: header says n = {}, using --n {n}", path.display(), g.n()));
                Ok(g.with_n(n)?)
            }
            _ => Ok(g),
        }
    }
}

fn read_set(path: &Path) -> Result<BTreeSet<VertexId>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let mut out = BTreeSet::new();
    for line in text.lines() {
        let t = line.split('#').next().unwrap_or("").trim();
        if !t.is_empty() {
            out.insert(VertexId::new(t)?);
        }
    }
    Ok(out)
}

fn ids(set: impl IntoIterator<Item = impl ToString>) -> Vec<String> {
    set.into_iter().map(|v| v.to_string()).collect()
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn check_report(r: &mut Report, label: String, rep: &CheckReport) -> Verdict {
    r.put("verdict", rep.verdict, format!("{label}: {}", yes_no(rep.verdict)));
    let failures: Vec<Value> = rep
        .failures
        .iter()
        .map(|f| json!({"axiom": format!("{:?}", f.axiom), "detail": f.detail, "witness": ids(&f.witness)}))
        .collect();
    for f in &rep.failures {
        r.lines.push(format!("failure {:?}: {} witness {}", f.axiom, f.detail, ids(&f.witness).join(" ")));
    }
    r.data("failures", failures);
    if rep.verdict {
        Verdict::Yes
    } else {
        Verdict::No
    }
}

fn run(cli: Cli, r: &mut Report, ctx: &mut Ctx) -> Result<Verdict, Failure> {
    let budget = ctx.budget;
    match cli.cmd {
        Cmd::Check { level, file } => {
            let g = ctx.graph(&file)?;
            let n = g.n();
            r.data("n", n);
            Ok(match level {
                Level::Partial => check_report(r, format!("partial {n}-gon"), &check_partial(&g)),
                Level::Weak => check_report(r, format!("weak generalized {n}-gon"), &check_weak(&g)),
                Level::Thick => check_report(r, format!("thick generalized {n}-gon"), &check_thick(&g)),
                Level::Nondegenerate => {
                    r.put("budget", budget, format!("budget {budget}"));
                    match check_nondegenerate(&g, budget) {
                        Nondegenerate::Yes(w) => {
                            r.put("verdict", "yes", "non-degenerate: yes");
                            r.put("witness", ids(w.vertices()), format!("witness {w}"));
                            Verdict::Yes
                        }
                        Nondegenerate::No => {
                            r.put("verdict", "no", "non-degenerate: no");
                            let d = gon::graph::diameter(&g);
                            r.put(
                                "diameter",
                                d.map_or(Value::Null, Value::from),
                                format!("diameter {}", d.map_or("infinite".into(), |d| d.to_string())),
                            );
                            Verdict::No
                        }
                        Nondegenerate::Unknown { expansions } => {
                            r.put("verdict", "unknown", format!("non-degenerate: unknown after {expansions} expansions"));
                            Verdict::Unknown
                        }
                    }
                }
            })
        }
        Cmd::Delta { file } => {
            let g = ctx.graph(&file)?;
            let d = delta(&g);
            r.put("delta", d, format!("delta={d}"));
            r.data("n", g.n());
            r.data("vertices", g.vertex_count());
            r.data("edges", g.edge_count());
            Ok(Verdict::Yes)
        }
        Cmd::Strong { sub, whole } => {
            let (s, g) = (ctx.graph(&sub)?, ctx.graph(&whole)?);
            let rep = is_n_strong(&s, &g)?;
            r.put("strong", rep.strong, format!("strong: {}", yes_no(rep.strong)));
            r.put("relative", rep.relative, format!("relative delta {}", rep.relative));
            r.put("min_relative", rep.min_relative, format!("minimum relative delta {}", rep.min_relative));
            r.data("method", format!("{:?}", rep.method));
            if let Some(w) = &rep.witness {
                r.put("witness", ids(w), format!("witness {}", ids(w).join(" ")));
            }
            Ok(if rep.strong { Verdict::Yes } else { Verdict::No })
        }
        Cmd::Complete { file, stages, out } => {
            let g = ctx.graph(&file)?;
            let trace = complete(&g, stages)?;
            write_trace_bundle(&trace, &out)?;
            r.put("stages", stages, format!("stages {stages}"));
            let mut per = Vec::new();
            for (k, st) in trace.stages.iter().enumerate() {
                let (v, e, d) = (st.graph.vertex_count(), st.graph.edge_count(), delta(&st.graph));
                r.lines.push(format!("stage {k}: vertices {v} edges {e} arcs {} delta {d}", st.arcs.len()));
                per.push(json!({"stage": k, "vertices": v, "edges": e, "arcs": st.arcs.len(), "delta": d}));
            }
            r.data("trace", per);
            let c = trace.complete_at;
            r.put("complete_at", c, format!("complete at {}", c.map_or("-".into(), |c| c.to_string())));
            r.put("out", out.display().to_string(), format!("written to {}", out.display()));
            Ok(Verdict::Yes)
        }
        Cmd::Open { file, over, cert } => {
            let g = ctx.graph(&file)?;
            let res = match &over {
                None => is_open(&g),
                Some(set) => {
                    let a = read_set(set)?;
                    let rest: BTreeSet<VertexId> = g.vertex_set().difference(&a).cloned().collect();
                    is_open_over(&rest, &a, &g)?
                }
            };
            let label = if over.is_some() { "open over the set" } else { "open" };
            r.put("open", res.open, format!("{label}: {}", yes_no(res.open)));
            if let Some(c) = &res.certificate {
                r.put("steps", c.steps.len(), format!("certificate steps {}", c.steps.len()));
                if let Some(path) = cert {
                    write(&path, &c.to_string())?;
                    r.put("cert", path.display().to_string(), format!("certificate written to {}", path.display()));
                }
            }
            if let Some(s) = &res.stuck {
                r.put("stuck", ids(s), format!("stuck core of {} vertices: {}", s.len(), ids(s).join(" ")));
            }
            Ok(if res.open { Verdict::Yes } else { Verdict::No })
        }
        Cmd::Closed { file, a, b } => {
            let g = ctx.graph(&file)?;
            let (a, b) = (read_set(&a)?, read_set(&b)?);
            let closed = is_closed_over(&b, &a, &g)?;
            r.put("closed", closed, format!("closed over A: {}", yes_no(closed)));
            if !closed {
                let h = g.induced(a.union(&b))?;
                let loose: Vec<VertexId> = loose_ends(&h).into_iter().filter(|v| b.contains(v)).collect();
                if let Some(v) = loose.first() {
                    r.put("witness", vec![v.to_string()], format!("loose end {v}"));
                } else if let Some(arc) =
                    clean_arcs(&h).into_iter().find(|arc| arc.interior.iter().all(|v| b.contains(v)))
                {
                    let walk = ids(std::iter::once(&arc.a).chain(&arc.interior).chain(std::iter::once(&arc.b)));
                    r.put("witness", walk.clone(), format!("clean arc {}", walk.join(" ")));
                }
            }
            Ok(if closed { Verdict::Yes } else { Verdict::No })
        }
        Cmd::Amalgam { b, c, over, map_b, map_c, stages, out } => {
            let (gb, gc, ga) = (ctx.graph(&b)?, ctx.graph(&c)?, ctx.graph(&over)?);
            let read = |p: &Path| fs::read_to_string(p).map_err(|e| Failure(format!("{}: {e}", p.display())));
            let spec = AmalgamSpec {
                a: ga,
                b: gb,
                c: gc,
                emb_b: parse_map(&read(&map_b)?)?,
                emb_c: parse_map(&read(&map_c)?)?,
            };
            let res = canonical_amalgam(&spec, stages, budget)?;
            let g = &res.amalgam.graph;
            r.put("stages", stages, format!("stages {stages}"));
            r.put("budget", budget, format!("budget {budget}"));
            r.put(
                "free_amalgam",
                json!({"vertices": g.vertex_count(), "edges": g.edge_count(), "delta": delta(g)}),
                format!("free amalgam: vertices {} edges {} delta {}", g.vertex_count(), g.edge_count(), delta(g)),
            );
            r.put("connected", res.amalgam.connected, format!("connected: {}", yes_no(res.amalgam.connected)));
            r.put("nondegenerate", res.nondegenerate, format!("non-degenerate: {}", yes_no(res.nondegenerate)));
            r.put("b_open", res.b_open_in_result, format!("B open in result: {}", yes_no(res.b_open_in_result)));
            r.put("c_open", res.c_open_in_result, format!("C open in result: {}", yes_no(res.c_open_in_result)));
            let last = res.trace.last();
            r.put(
                "last_stage",
                json!({"stage": res.trace.depth(), "vertices": last.vertex_count(), "delta": delta(last)}),
                format!("stage {}: vertices {} delta {}", res.trace.depth(), last.vertex_count(), delta(last)),
            );
            if let Some(dir) = out {
                write_trace_bundle(&res.trace, &dir)?;
                r.put("out", dir.display().to_string(), format!("written to {}", dir.display()));
            }
            Ok(Verdict::Yes)
        }
        Cmd::Normalize { file, cert } => {
            let g = ctx.graph(&file)?;
            let opts = NormalizeOptions { budget, ..NormalizeOptions::default() };
            match normalize_to_hatrack(&g, &opts) {
                Ok(out) => {
                    r.put("hat_rack", out.hat_rack.to_string(), out.hat_rack.to_string());
                    r.put("delta", out.hat_rack.delta(), format!("delta {}", out.hat_rack.delta()));
                    let steps: Vec<String> = out.certificate.steps.iter().map(|s| s.kind.to_string()).collect();
                    r.put("steps", steps.clone(), format!("steps {}: {}", steps.len(), steps.join(" ")));
                    let ok = out.certificate.verify().is_ok();
                    r.put("verified", ok, format!("certificate verified: {}", yes_no(ok)));
                    r.data("graph", serialize_gon(&out.graph));
                    if let Some(path) = cert {
                        write(&path, &out.certificate.to_text())?;
                        r.put("cert", path.display().to_string(), format!("certificate written to {}", path.display()));
                    }
                    Ok(if ok { Verdict::Yes } else { Verdict::No })
                }
                Err(NormalizeError::NotOpen(stuck)) => {
                    r.put("error", "not open", "not open");
                    r.put("stuck", ids(&stuck), format!("stuck core of {} vertices: {}", stuck.len(), ids(&stuck).join(" ")));
                    Ok(Verdict::No)
                }
                Err(NormalizeError::Degenerate) => {
                    r.put("error", "degenerate", "degenerate: no cycle of length >= 2n+2 and no pair at distance n+3");
                    Ok(Verdict::No)
                }
                Err(e) => Err(e.into()),
            }
        }
        Cmd::Classify { file } => {
            let g = ctx.graph(&file)?;
            match classify_free(&g, budget)? {
                Classification::Free { k, statement } => {
                    r.put("k", k, format!("k={k}"));
                    r.put("statement", statement.clone(), statement);
                    Ok(Verdict::Yes)
                }
                Classification::Diagnostic { delta, k, reason } => {
                    r.put("diagnostic", reason.clone(), format!("DIAGNOSTIC: {reason}"));
                    r.put("delta", delta, format!("delta={delta}"));
                    r.put("k", k, format!("k={k}"));
                    Ok(Verdict::No)
                }
            }
        }
        Cmd::Iso { g1, g2 } => {
            let (a, b) = (ctx.graph(&g1)?, ctx.graph(&g2)?);
            match isomorphic(&a, &b) {
                Some(map) => {
                    r.put("isomorphic", true, "isomorphic: yes");
                    let pairs: Vec<String> = map.iter().map(|(x, y)| format!("{x}={y}")).collect();
                    r.put("map", pairs.clone(), format!("map {}", pairs.join(" ")));
                    Ok(Verdict::Yes)
                }
                None => {
                    r.put("isomorphic", false, "isomorphic: no");
                    let inv = |g: &IncidenceGraph| (g.n(), g.vertex_count(), g.edge_count());
                    r.put(
                        "invariants",
                        json!([inv(&a), inv(&b)]),
                        format!("n, vertices, edges: {:?} vs {:?}", inv(&a), inv(&b)),
                    );
                    Ok(Verdict::No)
                }
            }
        }
        Cmd::Example { name, k, stages, rungs, out } => {
            let n = ctx.n.unwrap_or(3);
            let target = |default: &str| out.clone().unwrap_or_else(|| PathBuf::from(default));
            match name {
                Example::GammaK => {
                    let g = gamma_k(n, k)?;
                    let path = target(&format!("gamma{k}.gon"));
                    write(&path, &serialize_gon(&g))?;
                    r.put("delta", delta(&g), format!("gamma_{k} for n={n}: delta {}", delta(&g)));
                    r.put("out", path.display().to_string(), format!("written to {}", path.display()));
                }
                Example::Fano => {
                    let g = shapes::fano();
                    let path = target("fano.gon");
                    write(&path, &serialize_gon(&g))?;
                    r.put("delta", delta(&g), format!("fano plane: delta {}", delta(&g)));
                    r.put("out", path.display().to_string(), format!("written to {}", path.display()));
                }
                Example::FreeGon => {
                    let trace = free_gon(n, k, stages)?;
                    let dir = target(&format!("free-gon-{n}-{k}"));
                    write_trace_bundle(&trace, &dir)?;
                    let deltas: Vec<i64> = trace.stages.iter().map(|s| delta(&s.graph)).collect();
                    r.put(
                        "deltas",
                        deltas.clone(),
                        format!("delta per stage: {}", ids(&deltas).join(" ")),
                    );
                    r.put("out", dir.display().to_string(), format!("written to {}", dir.display()));
                }
                Example::AclDcl | Example::Ladder => {
                    let bundle: WitnessBundle = match name {
                        Example::AclDcl => acl_dcl_witness(n)?,
                        _ => ladder_prefix(n, rungs, stages.max(rungs))?,
                    };
                    let dir = target(&format!("{}-{n}", bundle.kind));
                    bundle.write(&dir)?;
                    for (a, ok) in &bundle.assertions {
                        r.lines.push(format!("{a}: {}", if *ok { "pass" } else { "FAIL" }));
                    }
                    let asserts: Map<String, Value> =
                        bundle.assertions.iter().map(|(a, ok)| (a.clone(), Value::from(*ok))).collect();
                    r.data("assertions", asserts);
                    r.put("out", dir.display().to_string(), format!("written to {}", dir.display()));
                    if !bundle.all_pass() {
                        return Ok(Verdict::No);
                    }
                }
            }
            Ok(Verdict::Yes)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json_mode = cli.json;
    let budget = cli
        .budget
        .or_else(|| std::env::var("GON_BUDGET").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(DEFAULT_BUDGET);
    let mut ctx = Ctx { budget, n: cli.n, warnings: Vec::new() };
    let mut report = Report::new();
    let result = run(cli, &mut report, &mut ctx);
    for w in &ctx.warnings {
        eprintln!("warning: {w}");
    }
    let code = match result {
        Ok(Verdict::Yes) => 0,
        Ok(Verdict::No) => 1,
        Ok(Verdict::Unknown) => 3,
        Err(Failure(msg)) => {
            if json_mode {
                println!("{}", json!({"error": msg}));
            } else {
                eprintln!("error: {msg}");
            }
            return ExitCode::from(2);
        }
    };
    if json_mode {
        report.data("exit", code);
        println!("{}", Value::Object(report.data));
    } else {
        for line in &report.lines {
            println!("{line}");
        }
    }
    ExitCode::from(code)
}
