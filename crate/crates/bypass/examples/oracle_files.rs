//! Persist an oracle and load it back.
//!
//! Oracle files are little-endian sections with checksums and carry a
//! fingerprint of the source graph; loading against a different graph is
//! refused.
//!
//! Run: cargo run --release --example oracle_files

use bypass::file::{load_oracle, save_oracle};
use bypass::oracle::PipelineId;
use bypass::pipeline::{build, PipelineConfig};
use bypass::toolkit::{gen_graph, GraphModel};
use bypass::Runtime;

fn main() {
    let g = gen_graph(&GraphModel::Gnm, 24, 96, 9, 33).unwrap();
    let rt = Runtime::new(None);
    let outcome = build(&g, &PipelineConfig::new(PipelineId::C, 2).with_h(4), &rt).unwrap();

    let dir = std::env::temp_dir();
    let path = dir.join("bypass-example.oracle");
    save_oracle(&outcome.tables, &path).unwrap();
    println!(
        "saved {} ({} bytes)",
        path.display(),
        std::fs::metadata(&path).unwrap().len()
    );

    let restored = load_oracle(&path, &g).unwrap();
    let same = (0..g.vertex_count() as u32).all(|x| {
        (0..g.edge_count() as u32)
            .all(|e| restored.query(x, 0, e).unwrap() == outcome.tables.query(x, 0, e).unwrap())
    });
    println!("restored oracle answers match: {same}");

    let other = gen_graph(&GraphModel::Gnm, 24, 96, 9, 34).unwrap();
    match load_oracle(&path, &other) {
        Err(e) => println!("loading against a different graph: {e}"),
        Ok(_) => unreachable!("fingerprint check must refuse"),
    }
    std::fs::remove_file(&path).ok();
}
