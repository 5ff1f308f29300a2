//! Interval directories and bottleneck tables.
//!
//! The boundary centers of a canonical path (strictly increasing
//! priorities up to the peak, then strictly decreasing to the target)
//! partition it into at most `2*levels + 1` intervals. An interval is
//! identified across pairs by its boundary-center pair — the segment
//! between two centers is itself a canonical path, so its edge set does
//! not depend on which (x, y) pair it appears in — and addressed within a
//! pair by a slot key derived from the boundary priorities, which is what
//! lets a query find its interval in O(1).

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::collections::HashMap;

use crate::apsp::{CanonicalPaths, CenterTables};
use crate::coverage::CoverageTable;
use crate::dist::Dist;
use crate::graph::{EdgeId, Graph, VertexId};
use crate::rmq::{Extreme, RmqTable};
use crate::runtime::{ceil_log2, LocalMeter, Meter, Runtime, Tally};
use crate::tree::{NO_EDGE, NO_POS};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Interval {
    pub left: VertexId,
    pub right: VertexId,
    pub slot: u8,
}

#[inline]
pub fn slot_count(levels: usize) -> usize {
    2 * levels + 1
}

/// Slot of the interval containing edge (u, v), from the peak priorities
/// of the two path sides: `i = peak(x..u)`, `j = peak(v..y)`.
#[inline]
pub fn interval_slot(i: u8, j: u8, levels: usize) -> u8 {
    if i < j {
        i - 1 // ascending side, keyed by left-boundary priority
    } else if i > j {
        (levels + j as usize - 1) as u8 // descending side, right priority
    } else {
        (2 * levels) as u8 // between the outermost peak-priority centers
    }
}

/// Boundary centers and intervals of the canonical x-to-y path. Empty when
/// x == y or y is unreachable.
pub fn build_interval_directory(
    x: VertexId,
    y: VertexId,
    centers: &CenterTables,
    priorities: &[u8],
    lm: &mut LocalMeter,
) -> Vec<Interval> {
    let levels = centers.levels;
    if x == y || centers.peak_priority(x, y) == 0 {
        return Vec::new();
    }

    // Ascending chain: repeatedly jump to the first strictly higher
    // priority vertex toward y. At most `levels` hops.
    let mut asc = vec![x];
    loop {
        lm.charge(1);
        let cur = *asc.last().unwrap();
        let p = priorities[cur as usize];
        if p as usize >= levels {
            break;
        }
        match centers.first_from_src(cur, y, p + 1) {
            Some(next) => asc.push(next),
            None => break,
        }
    }
    // Descending chain from y, scanning backward.
    let mut desc = vec![y];
    loop {
        lm.charge(1);
        let cur = *desc.last().unwrap();
        let p = priorities[cur as usize];
        if p as usize >= levels {
            break;
        }
        match centers.first_from_dst(x, cur, p + 1) {
            Some(next) => desc.push(next),
            None => break,
        }
    }

    let peak_left = *asc.last().unwrap();
    let peak_right = *desc.last().unwrap();
    let mut intervals = Vec::with_capacity(asc.len() + desc.len());
    for w in asc.windows(2) {
        intervals.push(Interval {
            left: w[0],
            right: w[1],
            slot: priorities[w[0] as usize] - 1,
        });
    }
    if peak_left != peak_right {
        intervals.push(Interval {
            left: peak_left,
            right: peak_right,
            slot: (2 * levels) as u8,
        });
    }
    for i in (0..desc.len().saturating_sub(1)).rev() {
        intervals.push(Interval {
            left: desc[i + 1],
            right: desc[i],
            slot: (levels + priorities[desc[i] as usize] as usize - 1) as u8,
        });
    }
    intervals
}

/// Directories for every ordered pair, built in parallel over sources.
pub struct Directories {
    pub n: usize,
    pub per_pair: Vec<Vec<Interval>>,
}

impl Directories {
    #[inline]
    pub fn get(&self, x: VertexId, y: VertexId) -> &[Interval] {
        &self.per_pair[x as usize * self.n + y as usize]
    }
}

pub fn build_directories(
    centers: &CenterTables,
    priorities: &[u8],
    rt: &Runtime,
    meter: &mut Meter,
) -> Directories {
    let n = centers.n;
    let rows = rt.parallel_for(meter, n, |x, lm| {
        let mut row = Vec::with_capacity(n);
        let mut tally = Tally::default();
        for y in 0..n as VertexId {
            let mut cell = LocalMeter::default();
            row.push(build_interval_directory(
                x as VertexId,
                y,
                centers,
                priorities,
                &mut cell,
            ));
            tally.add(cell);
        }
        lm.join(tally, n as u64);
        row
    });
    let mut per_pair = Vec::with_capacity(n * n);
    for row in rows {
        per_pair.extend(row);
    }
    Directories { n, per_pair }
}

/// Bottleneck edge (BV) and patch distance (DBV) per pair and interval
/// slot. DBV never underestimates any single-edge replacement distance of
/// its interval; the exclusion-built pipeline stores the distance avoiding
/// the whole interval, the query-built pipelines store the replacement
/// distance of the bottleneck edge itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BottleneckTable {
    pub n: usize,
    pub slots: usize,
    pub bv: Vec<EdgeId>,
    pub dbv: Vec<Dist>,
}

impl BottleneckTable {
    pub fn new(n: usize, levels: usize) -> BottleneckTable {
        let slots = slot_count(levels);
        BottleneckTable {
            n,
            slots,
            bv: vec![NO_EDGE; n * n * slots],
            dbv: vec![Dist::INFINITY; n * n * slots],
        }
    }

    #[inline]
    pub fn idx(&self, x: VertexId, y: VertexId, slot: u8) -> usize {
        (x as usize * self.n + y as usize) * self.slots + slot as usize
    }
}

/// Candidate value for edge `f` in the interval `[c_l, c_r]` of pair
/// (x, y): the smaller of the two center-routed patch terms.
fn candidate(
    paths: &CanonicalPaths,
    coverage: &CoverageTable,
    x: VertexId,
    y: VertexId,
    c_l: VertexId,
    c_r: VertexId,
    f: EdgeId,
    gaps: &mut u64,
    lm: &mut LocalMeter,
) -> Dist {
    lm.charge(2);
    let term1 = match coverage_lookup_fwd(paths, coverage, c_l, y, f) {
        Some(d) => paths.dist.get(x, c_l) + d,
        None => {
            *gaps += 1;
            Dist::INFINITY
        }
    };
    let term2 = match coverage_lookup_rev(paths, coverage, c_r, x, f) {
        Some(d) => d + paths.dist.get(c_r, y),
        None => {
            *gaps += 1;
            Dist::INFINITY
        }
    };
    term1.min(term2)
}

/// `d(c, y, f)` from the forward coverage of center `c`; `None` when `c`
/// does not cover `f`.
pub fn coverage_lookup_fwd(
    paths: &CanonicalPaths,
    coverage: &CoverageTable,
    c: VertexId,
    y: VertexId,
    f: EdgeId,
) -> Option<Dist> {
    let entry = coverage.fwd[c as usize].entry(f)?;
    let pre = paths.fwd[c as usize].euler_in[y as usize];
    if pre == NO_POS {
        return Some(Dist::INFINITY);
    }
    match pre.checked_sub(entry.pre_lo) {
        Some(off) if (off as usize) < entry.values.len() => Some(entry.values[off as usize]),
        _ => Some(paths.dist.get(c, y)), // outside the subtree: base distance
    }
}

/// `d(x, c, f)` from the reverse coverage of center `c`.
pub fn coverage_lookup_rev(
    paths: &CanonicalPaths,
    coverage: &CoverageTable,
    c: VertexId,
    x: VertexId,
    f: EdgeId,
) -> Option<Dist> {
    let entry = coverage.rev[c as usize].entry(f)?;
    let pre = paths.rev[c as usize].euler_in[x as usize];
    if pre == NO_POS {
        return Some(Dist::INFINITY);
    }
    match pre.checked_sub(entry.pre_lo) {
        Some(off) if (off as usize) < entry.values.len() => Some(entry.values[off as usize]),
        _ => Some(paths.dist.get(x, c)),
    }
}

/// BV per interval: the edge maximizing the candidate value, found with a
/// range-max query over the interval's candidate array laid out in path
/// order; ties break to the smallest path position. Returns the number of
/// coverage gaps encountered (positive means the build must be flagged).
pub fn compute_bottlenecks(
    g: &Graph,
    paths: &CanonicalPaths,
    coverage: &CoverageTable,
    dirs: &Directories,
    rt: &Runtime,
    meter: &mut Meter,
) -> (BottleneckTable, u64) {
    let n = dirs.n;
    let levels = (ceil_log2(n as u64) as usize).max(1);
    let mut table = BottleneckTable::new(n, levels);
    let rows = rt.parallel_for(meter, n, |x, lm| {
        let mut row_bv = vec![NO_EDGE; n * table.slots];
        let mut gaps = 0u64;
        let mut tally = Tally::default();
        for y in 0..n as VertexId {
            for interval in dirs.get(x as VertexId, y) {
                let mut cell = LocalMeter::default();
                let edges = paths.path_edges(g, interval.left, interval.right);
                debug_assert!(!edges.is_empty());
                let cands: Vec<u64> = edges
                    .iter()
                    .map(|&f| {
                        candidate(
                            paths,
                            coverage,
                            x as VertexId,
                            y,
                            interval.left,
                            interval.right,
                            f,
                            &mut gaps,
                            &mut cell,
                        )
                        .raw()
                    })
                    .collect();
                let rmq = RmqTable::new(&cands, Extreme::Max, &mut cell);
                let pos = rmq.query(0, cands.len() - 1, &mut cell);
                row_bv[y as usize * table.slots + interval.slot as usize] = edges[pos];
                tally.add(cell);
            }
        }
        lm.join(tally, (n * table.slots) as u64);
        (row_bv, gaps)
    });
    let mut gaps = 0;
    for (x, (row, g_row)) in rows.into_iter().enumerate() {
        table.bv[x * n * table.slots..(x + 1) * n * table.slots].copy_from_slice(&row);
        gaps += g_row;
    }
    (table, gaps)
}

/// Certified slow path: DBV by one Dijkstra per (x, y, interval) triple on
/// the graph minus the whole interval edge set.
pub fn compute_dbv_reference(
    g: &Graph,
    paths: &CanonicalPaths,
    dirs: &Directories,
    table: &mut BottleneckTable,
    rt: &Runtime,
    meter: &mut Meter,
) {
    let n = dirs.n;
    let slots = table.slots;
    let rows = rt.parallel_for(meter, n, |x, lm| {
        let mut row = vec![Dist::INFINITY; n * slots];
        for y in 0..n as VertexId {
            for interval in dirs.get(x as VertexId, y) {
                let mut removed = paths.path_edges(g, interval.left, interval.right);
                removed.sort_unstable();
                let d = dijkstra_avoiding(g, x as VertexId, &removed, lm)[y as usize];
                row[y as usize * slots + interval.slot as usize] = d;
            }
        }
        row
    });
    for (x, row) in rows.into_iter().enumerate() {
        table.dbv[x * n * slots..(x + 1) * n * slots].copy_from_slice(&row);
    }
}

fn dijkstra_avoiding(g: &Graph, x: VertexId, removed: &[EdgeId], lm: &mut LocalMeter) -> Vec<Dist> {
    let n = g.vertex_count();
    let mut dist = vec![Dist::INFINITY; n];
    let mut settled = vec![false; n];
    dist[x as usize] = Dist::ZERO;
    let mut heap: BinaryHeap<Reverse<(Dist, VertexId)>> = BinaryHeap::new();
    heap.push(Reverse((Dist::ZERO, x)));
    while let Some(Reverse((d, u))) = heap.pop() {
        lm.charge(ceil_log2(heap.len() as u64 + 1).max(1));
        if settled[u as usize] {
            continue;
        }
        settled[u as usize] = true;
        for e in g.out_edges(u) {
            if removed.binary_search(&e).is_ok() {
                continue;
            }
            lm.charge(1);
            let t = g.dst(e);
            let nd = d + Dist::from(g.weight(e));
            if nd < dist[t as usize] {
                dist[t as usize] = nd;
                heap.push(Reverse((nd, t)));
                lm.charge(ceil_log2(heap.len() as u64).max(1));
            }
        }
    }
    dist
}

/// Production path: one SSSP per source on a layered auxiliary graph,
/// computing every interval-removal distance of that source at once.
///
/// Layers are interval identities (boundary-center pairs). Layer `I`
/// contains a copy of every vertex; edges are the graph edges minus the
/// interval's edge set, and a virtual source reaches copy `(z, I)` with
/// weight `d(x, z)` whenever the canonical x-to-z path avoids the
/// interval. Splitting an optimal avoiding path at its last
/// canonically-safe prefix vertex shows the layer distance of `(y, I)`
/// equals the interval-removal distance exactly.
///
/// The layered SSSP runs as synchronous relaxation rounds (labels start
/// at the source-edge values, every round relaxes out of the vertices
/// improved in the previous round), so its span is rounds-of-convergence
/// times a logarithmic merge instead of a sequential heap order.
pub fn compute_dbv_auxiliary(
    g: &Graph,
    paths: &CanonicalPaths,
    dirs: &Directories,
    table: &mut BottleneckTable,
    rt: &Runtime,
    meter: &mut Meter,
) {
    let dbv = compute_dbv_interval(g, paths, dirs, rt, meter);
    table.dbv.copy_from_slice(&dbv);
}

/// Interval-removal distances for every (x, y, slot); the shared DBV
/// payload of every pipeline.
pub fn compute_dbv_interval(
    g: &Graph,
    paths: &CanonicalPaths,
    dirs: &Directories,
    rt: &Runtime,
    meter: &mut Meter,
) -> Vec<Dist> {
    let n = dirs.n;
    let levels = (ceil_log2(n as u64) as usize).max(1);
    let slots = slot_count(levels);
    let rows = rt.parallel_for(meter, n, |x, lm| {
        let xv = x as VertexId;
        // Distinct interval identities used by any directory of source x.
        let mut layer_of: HashMap<(VertexId, VertexId), u32> = HashMap::new();
        let mut layers: Vec<(VertexId, VertexId)> = Vec::new();
        for y in 0..n as VertexId {
            for interval in dirs.get(xv, y) {
                let key = (interval.left, interval.right);
                if let std::collections::hash_map::Entry::Vacant(e) = layer_of.entry(key) {
                    e.insert(layers.len() as u32);
                    layers.push(key);
                }
            }
        }
        lm.charge_parallel((n * slots) as u64);

        let mut label = vec![Dist::INFINITY; layers.len() * n];
        let mut frontier: Vec<u32> = Vec::new();
        let mut removed_by_layer: Vec<Vec<EdgeId>> = Vec::with_capacity(layers.len());
        let tree = &paths.fwd[x];
        let mut blocked = vec![false; n];
        for (li, &(cl, cr)) in layers.iter().enumerate() {
            let mut removed = paths.path_edges(g, cl, cr);
            removed.sort_unstable();
            // Vertices whose canonical path from x uses a removed edge:
            // union of the subtrees below removed edges that are tree
            // edges of T_x.
            for b in blocked.iter_mut() {
                *b = false;
            }
            for &f in &removed {
                let head = g.dst(f);
                if tree.parent_edge[head as usize] == f {
                    for &z in &tree.order[tree.subtree_range(head)] {
                        blocked[z as usize] = true;
                    }
                }
            }
            lm.charge_parallel(n as u64 + removed.len() as u64);
            for z in 0..n {
                if !blocked[z] && paths.dist.get(xv, z as VertexId).is_finite() {
                    let node = (li * n + z) as u32;
                    label[node as usize] = paths.dist.get(xv, z as VertexId);
                    frontier.push(node);
                }
            }
            removed_by_layer.push(removed);
        }

        let mut next_label = label.clone();
        while !frontier.is_empty() {
            let mut tally = Tally::default();
            let mut touched: Vec<u32> = Vec::new();
            for &node in &frontier {
                let mut cell = LocalMeter::default();
                let nu = node as usize;
                let li = nu / n;
                let z = (nu % n) as VertexId;
                let removed = &removed_by_layer[li];
                cell.charge_parallel(g.out_degree(z) as u64);
                for e in g.out_edges(z) {
                    if removed.binary_search(&e).is_ok() {
                        continue;
                    }
                    let t = g.dst(e);
                    let tn = li * n + t as usize;
                    let nd = label[nu] + Dist::from(g.weight(e));
                    if nd < next_label[tn] {
                        if next_label[tn] == label[tn] {
                            touched.push(tn as u32);
                        }
                        next_label[tn] = nd;
                    }
                }
                tally.add(cell);
            }
            lm.join(tally, frontier.len() as u64);
            frontier.clear();
            touched.sort_unstable();
            touched.dedup();
            for tn in touched {
                if next_label[tn as usize] < label[tn as usize] {
                    label[tn as usize] = next_label[tn as usize];
                    frontier.push(tn);
                }
            }
        }

        let mut row = vec![Dist::INFINITY; n * slots];
        for y in 0..n as VertexId {
            for interval in dirs.get(xv, y) {
                let li = layer_of[&(interval.left, interval.right)] as usize;
                row[y as usize * slots + interval.slot as usize] = label[li * n + y as usize];
            }
        }
        row
    });
    let mut dbv = vec![Dist::INFINITY; n * n * slots];
    for (x, row) in rows.into_iter().enumerate() {
        dbv[x * n * slots..(x + 1) * n * slots].copy_from_slice(&row);
    }
    dbv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::center::assign_priorities;
    use crate::coverage::compute_coverage;

    fn rt() -> Runtime {
        Runtime::new(Some(2))
    }

    #[test]
    fn directory_on_explicit_path() {
        // path 0->1->2->3 with priorities (1,2,3,1): boundaries 0,1,2,3
        let g = Graph::from_edges(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1)]).0;
        let pri = vec![1u8, 2, 3, 1];
        let mut meter = Meter::root("t");
        let paths = CanonicalPaths::via_dijkstra(&g, &rt(), &mut meter);
        let centers = crate::apsp::per_source_center_scan(&g, &paths, &pri, &rt(), &mut meter);
        let mut lm = LocalMeter::default();
        let dir = build_interval_directory(0, 3, &centers, &pri, &mut lm);
        assert_eq!(dir.len(), 3);
        assert_eq!((dir[0].left, dir[0].right), (0, 1));
        assert_eq!((dir[1].left, dir[1].right), (1, 2));
        assert_eq!((dir[2].left, dir[2].right), (2, 3));
        // single-edge pair, no interior centers
        let dir01 = build_interval_directory(0, 1, &centers, &pri, &mut lm);
        assert_eq!(dir01.len(), 1);
        assert_eq!((dir01[0].left, dir01[0].right), (0, 1));
        // x == y
        assert!(build_interval_directory(2, 2, &centers, &pri, &mut lm).is_empty());
    }

    #[test]
    fn slots_are_unique_per_directory() {
        let g = crate::toolkit::gen_graph(&crate::toolkit::GraphModel::Gnm, 20, 70, 6, 5).unwrap();
        let assignment = assign_priorities(20, 9, 4.0);
        let mut meter = Meter::root("t");
        let paths = CanonicalPaths::via_dijkstra(&g, &rt(), &mut meter);
        let centers =
            crate::apsp::per_source_center_scan(&g, &paths, &assignment.priorities, &rt(), &mut meter);
        let dirs = build_directories(&centers, &assignment.priorities, &rt(), &mut meter);
        for x in 0..20u32 {
            for y in 0..20u32 {
                let dir = dirs.get(x, y);
                let mut slots: Vec<u8> = dir.iter().map(|i| i.slot).collect();
                slots.sort_unstable();
                slots.dedup();
                assert_eq!(slots.len(), dir.len(), "pair ({x},{y})");
                // intervals tile the canonical path
                if !dir.is_empty() {
                    assert_eq!(dir[0].left, x);
                    assert_eq!(dir.last().unwrap().right, y);
                    for w in dir.windows(2) {
                        assert_eq!(w[0].right, w[1].left);
                    }
                }
            }
        }
    }

    #[test]
    fn bottleneck_on_g1_single_interval() {
        // priorities all 1: single interval [0, 3] on path 0->1->3; both
        // edges give candidate 4, tie to the first edge (0,1).
        let g = Graph::from_edges(4, &[(0, 1, 1), (1, 3, 1), (0, 2, 2), (2, 3, 2)]).0;
        let mut assignment = assign_priorities(4, 3, 8.0);
        assignment.priorities = vec![1, 1, 1, 1];
        let mut meter = Meter::root("t");
        let paths = CanonicalPaths::via_dijkstra(&g, &rt(), &mut meter);
        let centers =
            crate::apsp::per_source_center_scan(&g, &paths, &assignment.priorities, &rt(), &mut meter);
        let dirs = build_directories(&centers, &assignment.priorities, &rt(), &mut meter);
        let cov =
            compute_coverage(&g, &paths.fwd, &paths.rev, &centers, &assignment, &rt(), &mut meter);
        let (table, gaps) = compute_bottlenecks(&g, &paths, &cov, &dirs, &rt(), &mut meter);
        assert_eq!(gaps, 0);
        let dir = dirs.get(0, 3);
        assert_eq!(dir.len(), 1);
        let e01 = g.edge_between(0, 1).unwrap();
        assert_eq!(table.bv[table.idx(0, 3, dir[0].slot)], e01);
    }

    #[test]
    fn dbv_reference_removes_whole_interval() {
        let g = Graph::from_edges(4, &[(0, 1, 1), (1, 3, 1), (0, 2, 2), (2, 3, 2)]).0;
        let mut assignment = assign_priorities(4, 3, 8.0);
        assignment.priorities = vec![1, 1, 1, 1];
        let mut meter = Meter::root("t");
        let paths = CanonicalPaths::via_dijkstra(&g, &rt(), &mut meter);
        let centers =
            crate::apsp::per_source_center_scan(&g, &paths, &assignment.priorities, &rt(), &mut meter);
        let dirs = build_directories(&centers, &assignment.priorities, &rt(), &mut meter);
        let mut table = BottleneckTable::new(4, centers.levels);
        compute_dbv_reference(&g, &paths, &dirs, &mut table, &rt(), &mut meter);
        let slot = dirs.get(0, 3)[0].slot;
        // removing both path edges leaves 0->2->3 of weight 4
        assert_eq!(table.dbv[table.idx(0, 3, slot)], Dist::finite(4));
    }

    #[test]
    fn dbv_auxiliary_matches_reference() {
        for seed in 0..6u64 {
            let g =
                crate::toolkit::gen_graph(&crate::toolkit::GraphModel::Gnm, 18, 60, 6, seed).unwrap();
            let assignment = assign_priorities(18, seed + 100, 4.0);
            let mut meter = Meter::root("t");
            let paths = CanonicalPaths::via_dijkstra(&g, &rt(), &mut meter);
            let centers = crate::apsp::per_source_center_scan(
                &g,
                &paths,
                &assignment.priorities,
                &rt(),
                &mut meter,
            );
            let dirs = build_directories(&centers, &assignment.priorities, &rt(), &mut meter);
            let mut reference = BottleneckTable::new(18, centers.levels);
            compute_dbv_reference(&g, &paths, &dirs, &mut reference, &rt(), &mut meter);
            let mut aux = BottleneckTable::new(18, centers.levels);
            compute_dbv_auxiliary(&g, &paths, &dirs, &mut aux, &rt(), &mut meter);
            assert_eq!(reference.dbv, aux.dbv, "seed {seed}");
        }
    }
}
