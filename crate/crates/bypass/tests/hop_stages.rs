//! Hop-limited stage invariants, checked against an independent
//! hop-limited brute-force oracle (k rounds of Bellman-Ford on G - e).
//!
//! Every stage answer must sit in the sandwich
//! `d(x,y,e) <= answer <= d_k(x,y,e)`: the lower bound unconditionally
//! (every finite answer is a real avoiding-path length), the upper bound
//! with high probability per trial. The sampled-graph family is also
//! expected to hit `d_k` exactly in almost every trial.

use bypass::center::assign_priorities;
use bypass::dist::Dist;
use bypass::graph::{EdgeId, Graph, VertexId};
use bypass::hop::{build_sampled_family, extend_high_query, HopDso, TwoHopDso};
use bypass::oracle::{meta_stamp, reduce_query_time, BuildContext, OracleStage, PipelineId};
use bypass::pipeline::derive_seed;
use bypass::runtime::{LocalMeter, Meter, Runtime};
use bypass::toolkit::{gen_graph, GraphModel};

/// k-round Bellman-Ford on G - e: the independent oracle for d_k(x,y,e).
fn hop_brute(g: &Graph, x: VertexId, skip: EdgeId, k: u32) -> Vec<Dist> {
    let n = g.vertex_count();
    let mut cur = vec![Dist::INFINITY; n];
    cur[x as usize] = Dist::ZERO;
    for _ in 0..k {
        let mut next = cur.clone();
        for e in 0..g.edge_count() as EdgeId {
            if e == skip {
                continue;
            }
            let (a, b) = g.endpoints(e);
            let cand = cur[a as usize] + Dist::from(g.weight(e));
            if cand < next[b as usize] {
                next[b as usize] = cand;
            }
        }
        cur = next;
    }
    cur
}

fn full_brute(g: &Graph, x: VertexId, skip: EdgeId) -> Vec<Dist> {
    hop_brute(g, x, skip, g.vertex_count() as u32)
}

struct SandwichCount {
    below_true: u64,
    above_hop: u64,
    queries: u64,
}

fn sandwich_check(g: &Graph, dso: &dyn HopDso, k: u32) -> SandwichCount {
    let mut counts = SandwichCount {
        below_true: 0,
        above_hop: 0,
        queries: 0,
    };
    let mut lm = LocalMeter::default();
    for x in 0..g.vertex_count() as u32 {
        for e in 0..g.edge_count() as u32 {
            let hop_row = hop_brute(g, x, e, k);
            let true_row = full_brute(g, x, e);
            for y in 0..g.vertex_count() as u32 {
                let got = dso.query(g, x, y, e, &mut lm);
                let lo = if x == y { Dist::ZERO } else { true_row[y as usize] };
                let hi = if x == y { Dist::ZERO } else { hop_row[y as usize] };
                counts.queries += 1;
                if got < lo {
                    counts.below_true += 1;
                }
                if got > hi {
                    counts.above_hop += 1;
                }
            }
        }
    }
    counts
}

#[test]
fn sampled_family_exact_at_its_hop_bound() {
    // >= 99/100 seeded trials answer exactly d_h on all triples
    let mut exact = 0;
    let rt = Runtime::new(Some(2));
    for seed in 0..100u64 {
        let g = gen_graph(&GraphModel::Gnm, 12, 40, 6, seed).unwrap();
        let mut meter = Meter::root("t");
        let fam = build_sampled_family(&g, 3, 1.0, derive_seed(seed, 0xf), &rt, &mut meter).unwrap();
        let mut lm = LocalMeter::default();
        let mut trial_exact = true;
        'outer: for x in 0..12u32 {
            for e in 0..g.edge_count() as u32 {
                let want = hop_brute(&g, x, e, 3);
                for y in 0..12u32 {
                    let got = fam.query(&g, x, y, e, &mut lm);
                    let expect = if x == y { Dist::ZERO } else { want[y as usize] };
                    if got != expect {
                        trial_exact = false;
                        break 'outer;
                    }
                }
            }
        }
        if trial_exact {
            exact += 1;
        }
    }
    assert!(exact >= 99, "family exact in only {exact}/100 trials");
}

#[test]
fn reduced_two_hop_stage_exact_where_paths_are_short() {
    // every path of this graph has at most two edges, so the reduced
    // 2-hop stage must equal d_2 on all triples
    let g = Graph::from_edges(4, &[(0, 1, 1), (1, 3, 1), (0, 2, 2), (2, 3, 2)]).0;
    let rt = Runtime::new(Some(2));
    let assignment = assign_priorities(4, 5, 4.0);
    let mut meter = Meter::root("t");
    let cx = BuildContext::via_min_plus(&g, assignment, &rt, &mut meter);
    let stamp = meta_stamp(&g, &cx, PipelineId::B, 2, 5, 6.0, 1.0);
    let stage = OracleStage {
        tables: reduce_query_time(&g, &cx, &TwoHopDso, stamp, &rt, &mut meter),
        hop: 2,
    };
    let mut lm = LocalMeter::default();
    for x in 0..4u32 {
        for e in 0..g.edge_count() as u32 {
            let want = hop_brute(&g, x, e, 2);
            for y in 0..4u32 {
                let expect = if x == y { Dist::ZERO } else { want[y as usize] };
                assert_eq!(stage.query(&g, x, y, e, &mut lm), expect, "({x},{y},{e})");
            }
        }
    }
}

#[test]
fn two_hop_base_matches_brute() {
    for seed in 0..30u64 {
        let g = gen_graph(&GraphModel::Gnm, 10, 30, 5, seed).unwrap();
        let counts = sandwich_check(&g, &TwoHopDso, 2);
        assert_eq!(counts.below_true, 0, "seed {seed}");
        assert_eq!(counts.above_hop, 0, "two-hop base is exact, seed {seed}");
    }
}

#[test]
fn extension_sandwich_holds() {
    // extending the exact 2-hop base: never below true, above d_3 only
    // with vanishing probability (count trials)
    let mut good_trials = 0;
    for seed in 0..100u64 {
        let g = gen_graph(&GraphModel::Gnm, 12, 36, 5, seed + 200).unwrap();
        let ext = extend_high_query(&TwoHopDso, &g, 6.0, derive_seed(seed, 0xe)).unwrap();
        assert_eq!(ext.hop_bound(), 3);
        let counts = sandwich_check(&g, &ext, 3);
        assert_eq!(counts.below_true, 0, "soundness violated at seed {seed}");
        if counts.above_hop == 0 {
            good_trials += 1;
        }
    }
    assert!(good_trials >= 99, "extension within d_3 in only {good_trials}/100 trials");
}

#[test]
fn reduced_stage_sandwich_and_monotonicity() {
    let rt = Runtime::new(Some(2));
    let mut sandwich_trials = 0;
    let trials = 50u64;
    for seed in 0..trials {
        let g = gen_graph(&GraphModel::Gnm, 10, 32, 5, seed + 300).unwrap();
        let assignment = assign_priorities(10, derive_seed(seed, 0xa), 4.0);
        let mut meter = Meter::root("t");
        let cx = BuildContext::via_min_plus(&g, assignment, &rt, &mut meter);
        let stamp = meta_stamp(&g, &cx, PipelineId::B, 2, seed, 6.0, 1.0);

        let s2 = OracleStage {
            tables: reduce_query_time(&g, &cx, &TwoHopDso, stamp, &rt, &mut meter),
            hop: 2,
        };
        let c2 = sandwich_check(&g, &s2, 2);
        assert_eq!(c2.below_true, 0, "stage-2 soundness at seed {seed}");

        let ext = extend_high_query(&s2, &g, 6.0, derive_seed(seed, 0xb)).unwrap();
        let tables3 = reduce_query_time(&g, &cx, &ext, stamp, &rt, &mut meter);
        drop(ext);
        let s3 = OracleStage {
            tables: tables3,
            hop: 3,
        };
        let c3 = sandwich_check(&g, &s3, 3);
        assert_eq!(c3.below_true, 0, "stage-3 soundness at seed {seed}");
        if c2.above_hop == 0 && c3.above_hop == 0 {
            sandwich_trials += 1;
        }

        // stages share the center assignment, so the wider stage never
        // answers above the narrower one
        let mut lm = LocalMeter::default();
        for x in 0..10u32 {
            for y in 0..10u32 {
                for e in 0..g.edge_count() as u32 {
                    let a2 = s2.query(&g, x, y, e, &mut lm);
                    let a3 = s3.query(&g, x, y, e, &mut lm);
                    assert!(
                        a3 <= a2,
                        "monotonicity violated at seed {seed} triple ({x},{y},{e}): {a3} > {a2}"
                    );
                }
            }
        }
    }
    let required = trials - trials / 100; // >= 99%
    assert!(
        sandwich_trials >= required as i32 as u64,
        "stage sandwich held in only {sandwich_trials}/{trials} trials"
    );
}

#[test]
fn extension_chain_telescopes_to_exact() {
    // chained extensions reach hop bound >= n and the final stage matches
    // the unrestricted brute-force oracle
    let rt = Runtime::new(Some(2));
    for seed in 0..10u64 {
        let g = gen_graph(&GraphModel::Gnm, 12, 40, 6, seed + 400).unwrap();
        let n = g.vertex_count();
        let assignment = assign_priorities(n, derive_seed(seed, 0xc), 4.0);
        let mut meter = Meter::root("t");
        let cx = BuildContext::via_min_plus(&g, assignment, &rt, &mut meter);
        let stamp = meta_stamp(&g, &cx, PipelineId::B, 2, seed, 6.0, 1.0);
        let mut stage = OracleStage {
            tables: reduce_query_time(&g, &cx, &TwoHopDso, stamp, &rt, &mut meter),
            hop: 2,
        };
        let mut steps = 0;
        while (stage.hop as usize) < n {
            let ext = extend_high_query(&stage, &g, 6.0, derive_seed(seed, 0xd0 + steps)).unwrap();
            let hop = ext.hop_bound();
            let tables = reduce_query_time(&g, &cx, &ext, stamp, &rt, &mut meter);
            drop(ext);
            stage = OracleStage { tables, hop };
            steps += 1;
        }
        assert!(stage.hop as usize >= n);
        let mut lm = LocalMeter::default();
        let mut mismatches = 0;
        for x in 0..n as u32 {
            for e in 0..g.edge_count() as u32 {
                let want = full_brute(&g, x, e);
                for y in 0..n as u32 {
                    let expect = if x == y { Dist::ZERO } else { want[y as usize] };
                    if stage.query(&g, x, y, e, &mut lm) != expect {
                        mismatches += 1;
                    }
                }
            }
        }
        assert_eq!(mismatches, 0, "final stage inexact at seed {seed}");
    }
}
