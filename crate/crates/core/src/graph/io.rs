//! The GON text format.
//!
//! ```text
//! gon 3
//! v a P
//! v b L
//! v s1.a-c.1 L arc 1 a c 1
//! e a b
//! ```
//!
//! Line 1 (after comments and blank lines) is `gon <n>`, then `v <id> <P|L>`
//! lines, then `e <id> <id>` lines. `#` starts a comment. A vertex line may
//! carry a provenance suffix, `arc <stage> <a> <b> <pos>` or
//! `loose <stage> <attach>`; plain three-token lines mean a seed vertex.

use thiserror::Error;

use super::{GraphBuilder, GraphError, IncidenceGraph, Part, Provenance, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing `gon <n>` header")]
    MissingHeader,
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("invalid vertex id {0:?}")]
    InvalidId(String),
    #[error("gonality must be at least 3")]
    BadGonality,
    #[error("duplicate vertex {0}")]
    DuplicateVertex(VertexId),
    #[error("self-loop at {0}")]
    SelfLoop(VertexId),
    #[error("edge {0} {1} does not join a point and a line")]
    CrossPart(VertexId, VertexId),
    #[error("unknown endpoint {0}")]
    UnknownEndpoint(VertexId),
    #[error("duplicate edge {0} {1}")]
    DuplicateEdge(VertexId, VertexId),
}

impl ParseErrorKind {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            ParseErrorKind::MissingHeader => "MISSING_HEADER",
            ParseErrorKind::Malformed(_) => "MALFORMED_LINE",
            ParseErrorKind::InvalidId(_) => "INVALID_ID",
            ParseErrorKind::BadGonality => "BAD_GONALITY",
            ParseErrorKind::DuplicateVertex(_) => "DUPLICATE_VERTEX",
            ParseErrorKind::SelfLoop(_) => "SELF_LOOP",
            ParseErrorKind::CrossPart(..) => "CROSS_PART",
            ParseErrorKind::UnknownEndpoint(_) => "UNKNOWN_ENDPOINT",
            ParseErrorKind::DuplicateEdge(..) => "DUPLICATE_EDGE",
        }
    }
}

fn vid(token: &str) -> Result<VertexId, ParseErrorKind> {
    VertexId::new(token).map_err(|_| ParseErrorKind::InvalidId(token.to_string()))
}

fn num(token: &str, line: &str) -> Result<usize, ParseErrorKind> {
    token.parse().map_err(|_| ParseErrorKind::Malformed(line.to_string()))
}

fn parse_provenance(rest: &[&str], line: &str) -> Result<Provenance, ParseErrorKind> {
    match rest {
        [] => Ok(Provenance::Seed),
        ["arc", stage, a, b, pos] => Ok(Provenance::Arc {
            stage: num(stage, line)?,
            endpoints: (vid(a)?, vid(b)?),
            position: num(pos, line)?,
        }),
        ["loose", stage, attach] => {
            Ok(Provenance::Loose { stage: num(stage, line)?, attach: vid(attach)? })
        }
        _ => Err(ParseErrorKind::Malformed(line.to_string())),
    }
}

/// Parses GON text. Errors carry the 1-based line number.
pub fn parse_gon(text: &str) -> Result<IncidenceGraph, ParseError> {
    let mut builder: Option<GraphBuilder> = None;
    let mut last_line = 0;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        last_line = line_no;
        let err = |kind| ParseError { line: line_no, kind };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some(b) = builder.as_mut() else {
            match tokens.as_slice() {
                ["gon", n] => {
                    let n: usize = n.parse().map_err(|_| err(ParseErrorKind::Malformed(content.into())))?;
                    builder = Some(GraphBuilder::new(n).map_err(|_| err(ParseErrorKind::BadGonality))?);
                    continue;
                }
                _ => return Err(err(ParseErrorKind::MissingHeader)),
            }
        };
        match tokens.as_slice() {
            ["v", id, part, rest @ ..] => {
                let id = vid(id).map_err(err)?;
                let part = match *part {
                    "P" => Part::Point,
                    "L" => Part::Line,
                    _ => return Err(err(ParseErrorKind::Malformed(content.into()))),
                };
                let prov = parse_provenance(rest, content).map_err(err)?;
                b.vertex_with(id.clone(), part, prov)
                    .map_err(|_| err(ParseErrorKind::DuplicateVertex(id)))?;
            }
            ["e", a, c] => {
                let (a, c) = (vid(a).map_err(err)?, vid(c).map_err(err)?);
                b.edge(&a, &c).map_err(|e| {
                    err(match e {
                        GraphError::SelfLoop(v) => ParseErrorKind::SelfLoop(v),
                        GraphError::SamePart(x, y) => ParseErrorKind::CrossPart(x, y),
                        GraphError::UnknownVertex(v) => ParseErrorKind::UnknownEndpoint(v),
                        GraphError::DuplicateEdge(x, y) => ParseErrorKind::DuplicateEdge(x, y),
                        other => ParseErrorKind::Malformed(other.to_string()),
                    })
                })?;
            }
            _ => return Err(err(ParseErrorKind::Malformed(content.into()))),
        }
    }
    builder
        .map(GraphBuilder::build)
        .ok_or(ParseError { line: last_line.max(1), kind: ParseErrorKind::MissingHeader })
}

/// Serializes vertices sorted by id and edges sorted lexicographically.
pub fn serialize_gon(g: &IncidenceGraph) -> String {
    let mut out = format!("gon {}\n", g.n());
    for i in 0..g.vertex_count() {
        out.push_str(&format!("v {} {}", g.id(i), g.part(i).letter()));
        match g.provenance(i) {
            Provenance::Seed => {}
            Provenance::Arc { stage, endpoints: (a, b), position } => {
                out.push_str(&format!(" arc {stage} {a} {b} {position}"))
            }
            Provenance::Loose { stage, attach } => out.push_str(&format!(" loose {stage} {attach}")),
        }
        out.push('\n');
    }
    for (i, j) in g.edges() {
        out.push_str(&format!("e {} {}\n", g.id(i), g.id(j)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::shapes;

    #[test]
    fn minimal_document() {
        let g = parse_gon("gon 3\nv a P\nv b L\ne a b\n").unwrap();
        assert_eq!((g.n(), g.vertex_count(), g.edge_count()), (3, 2, 1));
    }

    #[test]
    fn comments_and_blank_lines() {
        let g = parse_gon("# header follows\n\ngon 4 # four\nv a P\n  \nv b L # line\ne b a\n").unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn error_kinds_with_lines() {
        let cases = [
            ("gon 3\nv a P\nv a P\n", 3, "DUPLICATE_VERTEX"),
            ("gon 3\nv a P\ne a a\n", 3, "SELF_LOOP"),
            ("gon 3\nv a P\nv b P\ne a b\n", 4, "CROSS_PART"),
            ("gon 3\nv a P\ne a q\n", 3, "UNKNOWN_ENDPOINT"),
            ("gon 3\nv a X\n", 2, "MALFORMED_LINE"),
            ("v a P\n", 1, "MISSING_HEADER"),
            ("gon 2\n", 1, "BAD_GONALITY"),
            ("gon 3\nv a P\nv b L\ne a b\ne b a\n", 5, "DUPLICATE_EDGE"),
        ];
        for (text, line, code) in cases {
            let e = parse_gon(text).unwrap_err();
            assert_eq!((e.line, e.kind.code()), (line, code), "{text:?}");
        }
    }

    #[test]
    fn serialization_order_and_round_trip() {
        let g = shapes::fano();
        let text = serialize_gon(&g);
        assert!(text.starts_with("gon 3\nv l0 L\nv l1 L\n"));
        assert_eq!(parse_gon(&text).unwrap(), g);
    }

    #[test]
    fn provenance_round_trip() {
        let text = "gon 3\nv a P\nv b P\nv m L arc 1 a b 1\nv z L loose 2 a\ne a m\ne a z\ne b m\n";
        let g = parse_gon(text).unwrap();
        assert_eq!(serialize_gon(&g), text);
    }
}
