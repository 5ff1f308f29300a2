//! Inspect the work/span meter of a build.
//!
//! Every phase charges abstract operation counts; `parallel_for` adds
//! max-of-children span plus a logarithmic coordination charge. The
//! counters are identical for any thread count, so the CSV below is
//! reproducible byte for byte.
//!
//! Run: cargo run --release --example work_span_report

use bypass::oracle::PipelineId;
use bypass::pipeline::{build, PipelineConfig};
use bypass::toolkit::{gen_graph, GraphModel};
use bypass::Runtime;

fn main() {
    let g = gen_graph(&GraphModel::Gnm, 32, 256, 10, 17).unwrap();

    // same build on one thread and four: identical counters
    let mut csvs = Vec::new();
    for threads in [1usize, 4] {
        let rt = Runtime::new(Some(threads));
        let outcome = build(&g, &PipelineConfig::new(PipelineId::B, 6), &rt).unwrap();
        csvs.push(outcome.report.build_meter.to_csv().unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    println!("{}", csvs[0]);
    println!("# counters independent of thread count: verified");
}
