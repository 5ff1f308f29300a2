//! Replacement paths and the second simple shortest path for one pair.
//!
//! The profile lists d(s, t, e) for every edge of the canonical s-t
//! path; its minimum is the second simple shortest path distance. The
//! oracle-backed route answers each entry in constant lookups and must
//! match the per-edge Dijkstra route.
//!
//! Run: cargo run --release --example replacement_paths

use bypass::oracle::PipelineId;
use bypass::paths::{rpaths, two_sisp, RpathsMode};
use bypass::pipeline::{build, PipelineConfig};
use bypass::runtime::LocalMeter;
use bypass::toolkit::{gen_graph, GraphModel};
use bypass::Runtime;

fn main() {
    let g = gen_graph(&GraphModel::Gnm, 40, 200, 15, 77).unwrap();
    let rt = Runtime::new(None);
    let mut lm = LocalMeter::default();

    // pick the pair with the deepest canonical path
    let (mut s, mut t, mut hops) = (0u32, 0u32, 0u32);
    for src in 0..g.vertex_count() as u32 {
        let spt = bypass::sssp::dijkstra(&g, src, false, &mut lm);
        for v in 0..g.vertex_count() {
            let d = spt.depth[v];
            if d != u32::MAX && d > hops {
                (s, t, hops) = (src, v as u32, d);
            }
        }
    }

    let brute = rpaths(&g, s, t, RpathsMode::Brute, &mut lm);
    println!("canonical path {s} -> {t}: {} edges", brute.entries.len());
    for &(e, d) in &brute.entries {
        let (u, v) = g.endpoints(e);
        println!("  drop ({u:>2}, {v:>2}) -> reroute costs {d}");
    }
    println!("second simple shortest path: {}", two_sisp(&g, s, t, &mut lm));

    let outcome = build(&g, &PipelineConfig::new(PipelineId::B, 4), &rt).unwrap();
    let via_oracle = rpaths(&g, s, t, RpathsMode::Dso(&outcome.tables), &mut lm);
    println!(
        "oracle-backed profile identical: {}",
        via_oracle == brute
    );
}
