//! A workbench for generalized n-gons presented as bipartite incidence
//! graphs: polygon axiom checks, the predimension δ_n, free n-completions,
//! openness and hyper-free certificates, free and canonical amalgams, and
//! normalization of finite open generators to hat-racks.

pub mod amalgam;
pub mod completion;
pub mod gallery;
pub mod graph;
pub mod normalize;
pub mod polygon;
pub mod rank;
mod subsets;

pub use graph::{GraphBuilder, GraphError, GraphPath, IncidenceGraph, Part, Provenance, VertexId};
