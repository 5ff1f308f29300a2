//! Build an oracle and answer failure queries.
//!
//! Generates a random sparse graph, preprocesses it with the
//! work-efficient pipeline, and answers a handful of d(x, y, e) queries,
//! cross-checking each against a fresh Dijkstra on G - e.
//!
//! Run: cargo run --release --example build_and_query

use bypass::oracle::PipelineId;
use bypass::pipeline::{build, PipelineConfig};
use bypass::runtime::LocalMeter;
use bypass::sssp::replacement_distance_bruteforce;
use bypass::toolkit::{gen_graph, GraphModel};
use bypass::Runtime;

fn main() {
    let g = gen_graph(&GraphModel::Gnm, 64, 320, 20, 42).unwrap();
    let rt = Runtime::new(None);
    let cfg = PipelineConfig::new(PipelineId::A, 7);
    let outcome = build(&g, &cfg, &rt).unwrap();
    println!(
        "built oracle: {} stored words, accepted = {}, {} build attempts",
        outcome.tables.stored_words(),
        outcome.report.accepted,
        outcome.report.attempts
    );

    let mut lm = LocalMeter::default();
    for (x, y, e) in [(0u32, 9u32, 3u32), (5, 60, 17), (33, 12, 200), (8, 8, 0)] {
        let (answer, lookups) = outcome.tables.query_counted(x, y, e).unwrap();
        let check = replacement_distance_bruteforce(&g, x, y, e, &mut lm);
        let (u, v) = g.endpoints(e);
        println!(
            "d({x}, {y}, ({u},{v})) = {answer}  [{lookups} lookups, brute force agrees: {}]",
            answer == check
        );
    }
}
