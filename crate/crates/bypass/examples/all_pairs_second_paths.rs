//! All-pairs second simple shortest paths, two ways.
//!
//! The direct route runs the per-target priority-queue algorithm over
//! first-edge exclusions; the oracle route takes the minimum of d(x,y,e)
//! queries along each canonical path. Both produce the same matrix.
//!
//! Run: cargo run --release --example all_pairs_second_paths

use bypass::dist::Dist;
use bypass::oracle::PipelineId;
use bypass::paths::{two_apsisp_direct, two_apsisp_via_dso};
use bypass::pipeline::{build, PipelineConfig};
use bypass::runtime::Meter;
use bypass::toolkit::{gen_graph, GraphModel};
use bypass::Runtime;

fn main() {
    let n = 24usize;
    let g = gen_graph(&GraphModel::Gnm, n, 110, 9, 5).unwrap();
    let rt = Runtime::new(None);

    let mut meter = Meter::root("direct");
    let direct = two_apsisp_direct(&g, &rt, &mut meter);
    meter.close();
    println!(
        "direct route: work {}, span {}",
        meter.work(),
        meter.span()
    );

    let outcome = build(&g, &PipelineConfig::new(PipelineId::A, 8), &rt).unwrap();
    let mut meter = Meter::root("via-oracle");
    let via = two_apsisp_via_dso(&g, &outcome.tables, &rt, &mut meter);
    meter.close();
    println!("oracle route: work {}, span {}", meter.work(), meter.span());

    println!("matrices identical: {}", direct == via);

    let finite = direct.iter().filter(|d| d.is_finite()).count();
    let sample: Vec<(usize, usize, Dist)> = (0..n)
        .flat_map(|x| (0..n).map(move |y| (x, y)))
        .filter(|&(x, y)| x != y && direct[x * n + y].is_finite())
        .take(5)
        .map(|(x, y)| (x, y, direct[x * n + y]))
        .collect();
    println!("{finite} pairs have a second path; first few:");
    for (x, y, d) in sample {
        println!("  d2({x}, {y}) = {d}");
    }
}
