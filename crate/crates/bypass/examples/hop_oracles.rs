//! The hop-limited stages underneath the fast pipelines.
//!
//! A 2-hop oracle needs no preprocessing; a sampled-subgraph family
//! answers h-hop queries from per-subgraph distance tables; one
//! extension step stretches any stage's hop bound by 3/2 by routing
//! through sampled midpoints.
//!
//! Run: cargo run --release --example hop_oracles

use bypass::hop::{build_sampled_family, extend_high_query, two_hop_query, HopDso, TwoHopDso};
use bypass::runtime::{LocalMeter, Meter};
use bypass::toolkit::{gen_graph, GraphModel};
use bypass::Runtime;

fn main() {
    // a long path with chords keeps hop limits interesting
    let g = gen_graph(&GraphModel::PathChords, 24, 34, 3, 2).unwrap();
    let rt = Runtime::new(None);
    let mut lm = LocalMeter::default();
    let (x, y) = (0u32, 6u32);
    let e = 2u32; // an early path edge

    let d2 = two_hop_query(&g, x, y, e, &mut lm);
    println!("2-hop answer for d({x}, {y}, edge {e}): {d2}");

    let mut meter = Meter::root("family");
    let family = build_sampled_family(&g, 4, 1.0, 99, &rt, &mut meter).unwrap();
    println!(
        "sampled family at h = 4: {} subgraphs, {} rebuilds",
        family.subgraphs, family.rebuilds
    );
    println!(
        "4-hop answer: {}",
        family.query(&g, x, y, e, &mut lm)
    );

    let ext = extend_high_query(&family, &g, 6.0, 123).unwrap();
    println!(
        "extended to h = {}: answer {}",
        ext.hop_bound(),
        ext.query(&g, x, y, e, &mut lm)
    );

    let ext2 = extend_high_query(&TwoHopDso, &g, 6.0, 124).unwrap();
    println!(
        "2-hop base extended to h = {}: answer {}",
        ext2.hop_bound(),
        ext2.query(&g, x, y, e, &mut lm)
    );
    println!("(answers shrink as the hop budget grows)");
}
