//! Distance sensitivity oracles for directed weighted graphs.
//!
//! Preprocess a graph once, then answer replacement-path distance queries
//! `d(x, y, e)` — the shortest x-to-y distance with edge `e` removed — in
//! a constant number of table lookups. Three preprocessing pipelines
//! trade work for parallel depth:
//!
//! - pipeline A: per-source shortest-path trees with exclusion-based
//!   coverage; the work-efficient route for sparse graphs,
//! - pipeline B: a 2-hop base stage repeatedly extended by 3/2 hop
//!   factors with polylog modelled span; work-efficient for dense graphs,
//! - pipeline C: a sampled-subgraph h-hop base giving a work/span
//!   trade-off controlled by h.
//!
//! On top of the oracle sit replacement paths, second simple shortest
//! paths (single pair and all pairs), minimum weight cycle, and
//! all-nodes shortest cycles. Every randomized build self-audits against
//! the brute-force oracle and is retried with a derived seed when
//! flagged. All parallel phases charge a work/span meter whose counters
//! are independent of the physical thread count.
//!
//! See the `examples/` directory for one runnable example per major
//! capability; `cargo run --example build_and_query` is the place to
//! start.

pub mod apsp;
pub mod bottleneck;
pub mod center;
pub mod coverage;
pub mod dist;
pub mod file;
pub mod graph;
pub mod hop;
pub mod oracle;
pub mod paths;
pub mod pipeline;
pub mod rmq;
pub mod runtime;
pub mod sssp;
pub mod toolkit;
pub mod tree;

pub use dist::Dist;
pub use graph::{load_graph, write_graph, Graph, GraphError};
pub use oracle::{OracleTables, PipelineId};
pub use pipeline::{build, BuildOutcome, PipelineConfig};
pub use runtime::{Meter, Runtime};
pub use toolkit::{gen_graph, verify, GraphModel, VerifyScope};
