//! Shortest cycles: through every vertex, and globally.
//!
//! Run: cargo run --release --example cycles

use bypass::paths::{ansc, mwc};
use bypass::runtime::Meter;
use bypass::toolkit::{gen_graph, GraphModel};
use bypass::Runtime;

fn main() {
    let g = gen_graph(&GraphModel::Gnm, 16, 40, 9, 21).unwrap();
    let rt = Runtime::new(None);
    let mut meter = Meter::root("cycles");

    let per_vertex = ansc(&g, &rt, &mut meter);
    println!("shortest cycle through each vertex:");
    for (v, d) in per_vertex.iter().enumerate() {
        println!("  {v:>2}: {d}");
    }
    println!("minimum weight cycle: {}", mwc(&g, &rt, &mut meter));

    let dag = gen_graph(&GraphModel::Layered, 12, 20, 5, 3).unwrap();
    println!(
        "layered DAG has no cycles: mwc = {}",
        mwc(&dag, &rt, &mut meter)
    );
}
