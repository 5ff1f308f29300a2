//! Replacement paths, second simple shortest paths, and shortest cycles.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::apsp::{apsp, CanonicalPaths, DistanceMatrix};
use crate::dist::Dist;
use crate::graph::{EdgeId, Graph, VertexId};
use crate::oracle::OracleTables;
use crate::runtime::{ceil_log2, LocalMeter, Meter, Runtime, Tally};
use crate::sssp::{dijkstra, excluded_sssp, replacement_distance_bruteforce};
use crate::tree::NO_EDGE;

/// Per-edge replacement distances along one canonical path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplacementProfile {
    pub source: VertexId,
    pub target: VertexId,
    /// False when the target is unreachable or source == target; the
    /// profile is empty and the second-path distance is undefined.
    pub defined: bool,
    pub entries: Vec<(EdgeId, Dist)>,
}

impl ReplacementProfile {
    /// min over entries: the second simple shortest path distance.
    pub fn second_distance(&self) -> Dist {
        self.entries
            .iter()
            .map(|&(_, d)| d)
            .min()
            .unwrap_or(Dist::INFINITY)
    }
}

pub enum RpathsMode<'a> {
    /// One Dijkstra on G - e per path edge (ground truth).
    Brute,
    /// One oracle query per path edge.
    Dso(&'a OracleTables),
}

/// Replacement distances d(s, t, e) for every edge of the canonical s-t
/// path.
pub fn rpaths(g: &Graph, s: VertexId, t: VertexId, mode: RpathsMode<'_>, lm: &mut LocalMeter) -> ReplacementProfile {
    if s == t {
        return ReplacementProfile {
            source: s,
            target: t,
            defined: false,
            entries: Vec::new(),
        };
    }
    let edges: Vec<EdgeId> = match &mode {
        RpathsMode::Brute => {
            let spt = dijkstra(g, s, false, lm);
            if !spt.reachable(t) {
                return ReplacementProfile {
                    source: s,
                    target: t,
                    defined: false,
                    entries: Vec::new(),
                };
            }
            spt.path_edges_to(t)
        }
        RpathsMode::Dso(tables) => {
            let n = g.vertex_count();
            let mut edges = Vec::new();
            let mut v = t;
            while v != s {
                let e = tables.fwd_parent[s as usize * n + v as usize];
                if e == NO_EDGE {
                    return ReplacementProfile {
                        source: s,
                        target: t,
                        defined: false,
                        entries: Vec::new(),
                    };
                }
                edges.push(e);
                v = g.src(e);
            }
            edges.reverse();
            edges
        }
    };
    let entries = edges
        .into_iter()
        .map(|e| {
            let d = match &mode {
                RpathsMode::Brute => replacement_distance_bruteforce(g, s, t, e, lm),
                RpathsMode::Dso(tables) => {
                    let (d, lookups) = tables.query_counted(s, t, e).expect("valid ids");
                    lm.charge(lookups as u64);
                    d
                }
            };
            (e, d)
        })
        .collect();
    ReplacementProfile {
        source: s,
        target: t,
        defined: true,
        entries,
    }
}

/// Second simple shortest path distance for one pair: the minimum over
/// the replacement profile. (In directed graphs the minimizing walk may
/// revisit vertices; this is the standard min-over-path-edges contract.)
pub fn two_sisp(g: &Graph, s: VertexId, t: VertexId, lm: &mut LocalMeter) -> Dist {
    rpaths(g, s, t, RpathsMode::Brute, lm).second_distance()
}

/// All-pairs second simple shortest path distances via the priority-queue
/// algorithm: per target, Type-A estimates come from first-edge
/// exclusions and Type-B candidates propagate through the queue; the
/// diagonal is undefined (infinity).
pub fn two_apsisp_direct(g: &Graph, rt: &Runtime, meter: &mut Meter) -> Vec<Dist> {
    let n = g.vertex_count();
    let paths = meter.scoped("paths", |m| CanonicalPaths::via_dijkstra(g, rt, m));

    // Type-A table: d(x, y, first edge of the canonical x-y path), one
    // exclusion over the depth-1 tree edges per source.
    let type_a: Vec<Vec<Dist>> = meter.scoped("exclusions", |m| {
        rt.parallel_for(m, n, |x, lm| {
            let tree = &paths.fwd[x];
            let layer: Vec<EdgeId> = (0..n)
                .filter(|&v| tree.depth[v] == 1).map(|v| tree.parent_edge[v])
                .collect();
            let mut row = vec![Dist::INFINITY; n];
            if layer.is_empty() {
                return row;
            }
            let subs = excluded_sssp(g, tree, &layer, lm).expect("depth layer independent");
            for sub in subs {
                for (off, &d) in sub.values.iter().enumerate() {
                    let y = tree.order[sub.pre_lo as usize + off];
                    row[y as usize] = d;
                }
            }
            row
        })
    });

    meter.scoped("queues", |m| {
        let rows = rt.parallel_for(m, n, |y, lm| {
            let yv = y as VertexId;
            // Extensions(a, y): edges (x, a) beginning the canonical x-y
            // path, grouped by a.
            let mut extensions: Vec<Vec<VertexId>> = vec![Vec::new(); n];
            for x in 0..n {
                lm.charge(1);
                if x == y {
                    continue;
                }
                let e = paths.first_edge(x as VertexId, yv);
                if e != NO_EDGE {
                    extensions[g.dst(e) as usize].push(x as VertexId);
                }
            }

            let mut d2 = vec![Dist::INFINITY; n];
            let mut done = vec![false; n];
            let mut heap: BinaryHeap<Reverse<(Dist, VertexId)>> = BinaryHeap::new();
            // Type-B seeds: x reaches y through first edge (x, a) and
            // then takes a's second path, so the candidate is
            // w(x, a) + d(a, y, (a, b)) with (a, b) the first edge of the
            // a-y path. No seed when a == y: the only path starting with
            // edge (x, y) is that edge itself.
            for x in 0..n {
                lm.charge(1);
                if x == y {
                    continue;
                }
                let e = paths.first_edge(x as VertexId, yv);
                if e == NO_EDGE {
                    continue;
                }
                let a = g.dst(e);
                if a == yv {
                    continue;
                }
                let seed = Dist::from(g.weight(e)) + type_a[a as usize][y];
                if seed.is_finite() {
                    heap.push(Reverse((seed, x as VertexId)));
                    lm.charge(ceil_log2(heap.len() as u64).max(1));
                }
            }

            while let Some(Reverse((cand, x))) = heap.pop() {
                lm.charge(ceil_log2(heap.len() as u64 + 1).max(1));
                if done[x as usize] {
                    continue;
                }
                done[x as usize] = true;
                let a_val = type_a[x as usize][y];
                if cand >= a_val {
                    d2[x as usize] = a_val;
                } else {
                    d2[x as usize] = cand;
                    for &x2 in &extensions[x as usize] {
                        lm.charge(1);
                        let e = paths.first_edge(x2, yv);
                        let next = Dist::from(g.weight(e)) + cand;
                        heap.push(Reverse((next, x2)));
                        lm.charge(ceil_log2(heap.len() as u64).max(1));
                    }
                }
            }
            for x in 0..n {
                if x != y && !done[x] {
                    d2[x] = type_a[x][y];
                }
            }
            d2
        });
        let mut out = vec![Dist::INFINITY; n * n];
        for (y, col) in rows.into_iter().enumerate() {
            for x in 0..n {
                out[x * n + y] = col[x];
            }
        }
        out
    })
}

/// All-pairs second path distances by querying an oracle along each
/// canonical path.
pub fn two_apsisp_via_dso(
    g: &Graph,
    tables: &OracleTables,
    rt: &Runtime,
    meter: &mut Meter,
) -> Vec<Dist> {
    let n = g.vertex_count();
    let rows = rt.parallel_for(meter, n, |x, lm| {
        let mut row = vec![Dist::INFINITY; n];
        for y in 0..n as VertexId {
            if x as u32 == y {
                continue;
            }
            let mut best = Dist::INFINITY;
            let mut v = y;
            let mut tally = Tally::default();
            let mut hops = 0u64;
            loop {
                let e = tables.fwd_parent[x * n + v as usize];
                if e == NO_EDGE {
                    break;
                }
                let mut c = LocalMeter::default();
                let (d, lookups) = tables.query_counted(x as VertexId, y, e).expect("valid ids");
                c.charge(lookups as u64);
                tally.add(c);
                hops += 1;
                if d < best {
                    best = d;
                }
                v = g.src(e);
                if v == x as VertexId {
                    break;
                }
            }
            lm.join(tally, hops.max(1));
            if v == x as VertexId {
                row[y as usize] = best;
            }
        }
        row
    });
    let mut out = Vec::with_capacity(n * n);
    for row in rows {
        out.extend(row);
    }
    out
}

/// Shortest cycle through each vertex: `cycle(u) = min over in-edges
/// (v, u) of d(u, v) + w(v, u)`; infinity when u lies on no cycle.
pub fn ansc(g: &Graph, rt: &Runtime, meter: &mut Meter) -> Vec<Dist> {
    let d = meter.scoped("apsp", |m| apsp(g, rt, m));
    ansc_from_apsp(g, &d, rt, meter)
}

pub fn ansc_from_apsp(g: &Graph, d: &DistanceMatrix, rt: &Runtime, meter: &mut Meter) -> Vec<Dist> {
    let n = g.vertex_count();
    rt.parallel_for(meter, n, |u, lm| {
        let mut best = Dist::INFINITY;
        let mut tally = Tally::default();
        let mut count = 0u64;
        for e in g.in_edges(u as VertexId) {
            let mut c = LocalMeter::default();
            c.charge(1);
            let v = g.src(e);
            let cand = d.get(u as VertexId, v) + Dist::from(g.weight(e));
            if cand < best {
                best = cand;
            }
            tally.add(c);
            count += 1;
        }
        lm.join(tally, count.max(1));
        best
    })
}

/// Minimum weight cycle: the smallest all-nodes-shortest-cycle value.
pub fn mwc(g: &Graph, rt: &Runtime, meter: &mut Meter) -> Dist {
    ansc(g, rt, meter).into_iter().min().unwrap_or(Dist::INFINITY)
}
