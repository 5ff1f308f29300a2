//! Single-source shortest paths: canonical Dijkstra, hop-limited
//! relaxation, the independent-edge-set exclusion kernel, and the
//! brute-force replacement-distance oracle.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::dist::Dist;
use crate::graph::{EdgeId, Graph, VertexId};
use crate::runtime::{ceil_log2, LocalMeter, Tally};
use crate::tree::{finalize_tree, ShortestPathTree, NO_EDGE, NO_VERTEX};

#[derive(Debug, Error)]
pub enum ExclusionError {
    #[error("edge {0} is not a tree edge of the given tree")]
    NotTreeEdge(EdgeId),
    #[error("excluded edges {0} and {1} have overlapping subtrees")]
    Overlap(EdgeId, EdgeId),
}

#[inline]
fn heap_charge(lm: &mut LocalMeter, len: usize) {
    lm.charge(ceil_log2(len.max(1) as u64).max(1));
}

/// Canonical shortest-path weights and hop counts from (or, `reversed`,
/// to) `s`: Dijkstra over lexicographic `(weight, hops)` keys. Minimizing
/// hops among equal-weight paths keeps canonical paths simple even with
/// zero-weight cycles.
pub fn lex_dijkstra(
    g: &Graph,
    s: VertexId,
    reversed: bool,
    lm: &mut LocalMeter,
) -> (Vec<Dist>, Vec<u32>) {
    let n = g.vertex_count();
    let mut dist = vec![Dist::INFINITY; n];
    let mut hops = vec![u32::MAX; n];
    let mut settled = vec![false; n];
    dist[s as usize] = Dist::ZERO;
    hops[s as usize] = 0;

    let mut heap: BinaryHeap<Reverse<(Dist, u32, VertexId)>> = BinaryHeap::new();
    heap.push(Reverse((Dist::ZERO, 0, s)));

    while let Some(Reverse((d, h, u))) = heap.pop() {
        heap_charge(lm, heap.len() + 1);
        if settled[u as usize] {
            continue;
        }
        settled[u as usize] = true;
        let relax = |e: EdgeId, t: VertexId, lm: &mut LocalMeter,
                         heap: &mut BinaryHeap<Reverse<(Dist, u32, VertexId)>>,
                         dist: &mut Vec<Dist>,
                         hops: &mut Vec<u32>| {
            lm.charge(1);
            let nd = d + Dist::from(g.weight(e));
            let nh = h + 1;
            if (nd, nh) < (dist[t as usize], hops[t as usize]) {
                dist[t as usize] = nd;
                hops[t as usize] = nh;
                heap.push(Reverse((nd, nh, t)));
                heap_charge(lm, heap.len());
            }
        };
        if reversed {
            for e in g.in_edges(u) {
                let t = g.src(e);
                relax(e, t, lm, &mut heap, &mut dist, &mut hops);
            }
        } else {
            for e in g.out_edges(u) {
                let t = g.dst(e);
                relax(e, t, lm, &mut heap, &mut dist, &mut hops);
            }
        }
    }
    (dist, hops)
}

/// Canonical parents as a pure function of the `(weight, hops)` labels:
/// the parent of `v` is the smallest `(from-vertex, edge)` among
/// predecessors on weight- and hop-optimal paths. Hops strictly decrease
/// along parents, so the assignment is a tree, and both APSP routes derive
/// identical trees from identical labels.
pub fn canonical_parents(
    g: &Graph,
    source: VertexId,
    reversed: bool,
    dist: &[Dist],
    hops: &[u32],
    lm: &mut LocalMeter,
) -> (Vec<EdgeId>, Vec<VertexId>) {
    let n = g.vertex_count();
    let mut parent_edge = vec![NO_EDGE; n];
    let mut parent_vertex = vec![NO_VERTEX; n];
    let mut tally = Tally::default();
    for v in 0..n as VertexId {
        if v == source || dist[v as usize].is_infinite() {
            continue;
        }
        // independent per-vertex argmin over incoming relaxations
        let mut cell = LocalMeter::default();
        let mut best: (VertexId, EdgeId) = (NO_VERTEX, NO_EDGE);
        let mut consider = |e: EdgeId, u: VertexId| {
            if dist[u as usize] + Dist::from(g.weight(e)) == dist[v as usize]
                && hops[u as usize].wrapping_add(1) == hops[v as usize]
                && (u, e) < best
            {
                best = (u, e);
            }
        };
        if reversed {
            cell.charge_parallel(g.out_degree(v) as u64);
            for e in g.out_edges(v) {
                let u = g.dst(e);
                consider(e, u);
            }
        } else {
            cell.charge_parallel(g.in_edges(v).count() as u64);
            for e in g.in_edges(v) {
                let u = g.src(e);
                consider(e, u);
            }
        }
        debug_assert!(best.0 != NO_VERTEX, "reachable vertex without parent");
        parent_vertex[v as usize] = best.0;
        parent_edge[v as usize] = best.1;
        tally.add(cell);
    }
    lm.join(tally, n as u64);
    (parent_edge, parent_vertex)
}

/// Canonical shortest-path tree from `s` (or to `s` when `reversed`):
/// exact distances, canonical parents, depths and Euler intervals.
/// Unreachable vertices have infinite distance and no parent.
pub fn dijkstra(g: &Graph, s: VertexId, reversed: bool, lm: &mut LocalMeter) -> ShortestPathTree {
    let (dist, hops) = lex_dijkstra(g, s, reversed, lm);
    let (parent_edge, parent_vertex) = canonical_parents(g, s, reversed, &dist, &hops, lm);
    let spt = finalize_tree(s, reversed, dist, parent_edge, parent_vertex, lm);
    debug_assert!(spt
        .depth
        .iter()
        .zip(&hops)
        .all(|(&d, &h)| d == h || (d == crate::tree::NO_POS && h == u32::MAX)));
    spt
}

/// Plain distances from `x` in `G - {skip}`; the ground-truth replacement
/// oracle runs one of these per query.
pub fn dijkstra_skipping(g: &Graph, x: VertexId, skip: EdgeId, lm: &mut LocalMeter) -> Vec<Dist> {
    let n = g.vertex_count();
    let mut dist = vec![Dist::INFINITY; n];
    let mut settled = vec![false; n];
    dist[x as usize] = Dist::ZERO;
    let mut heap: BinaryHeap<Reverse<(Dist, VertexId)>> = BinaryHeap::new();
    heap.push(Reverse((Dist::ZERO, x)));
    while let Some(Reverse((d, u))) = heap.pop() {
        heap_charge(lm, heap.len() + 1);
        if settled[u as usize] {
            continue;
        }
        settled[u as usize] = true;
        for e in g.out_edges(u) {
            if e == skip {
                continue;
            }
            lm.charge(1);
            let t = g.dst(e);
            let nd = d + Dist::from(g.weight(e));
            if nd < dist[t as usize] {
                dist[t as usize] = nd;
                heap.push(Reverse((nd, t)));
                heap_charge(lm, heap.len());
            }
        }
    }
    dist
}

/// Ground truth for every oracle in the crate: the distance from `x` to
/// `y` in `G - {e}` via one Dijkstra, no preprocessing.
pub fn replacement_distance_bruteforce(
    g: &Graph,
    x: VertexId,
    y: VertexId,
    e: EdgeId,
    lm: &mut LocalMeter,
) -> Dist {
    if x == y {
        return Dist::ZERO;
    }
    dijkstra_skipping(g, x, e, lm)[y as usize]
}

/// Minimum weight over paths from `s` using at most `h` edges (optionally
/// restricted to edges kept by `mask`). Runs `h` synchronous relaxation
/// rounds; round r+1 reads only round r's labels, and rounds after the
/// frontier empties perform no relaxations.
pub fn hop_limited_sssp(
    g: &Graph,
    s: VertexId,
    h: u32,
    mask: Option<&EdgeMask>,
    lm: &mut LocalMeter,
) -> Vec<Dist> {
    let n = g.vertex_count();
    let mut cur = vec![Dist::INFINITY; n];
    cur[s as usize] = Dist::ZERO;
    let mut frontier = vec![s];
    let mut next = cur.clone();

    for _round in 0..h {
        if frontier.is_empty() {
            break;
        }
        let mut tally = Tally::default();
        let mut touched: Vec<VertexId> = Vec::new();
        for &u in &frontier {
            let mut blm = LocalMeter::default();
            blm.charge_parallel(g.out_degree(u) as u64);
            for e in g.out_edges(u) {
                if let Some(mask) = mask {
                    if !mask.contains(e) {
                        continue;
                    }
                }
                let t = g.dst(e);
                let nd = cur[u as usize] + Dist::from(g.weight(e));
                if nd < next[t as usize] {
                    if next[t as usize] == cur[t as usize] {
                        touched.push(t);
                    }
                    next[t as usize] = nd;
                }
            }
            tally.add(blm);
        }
        lm.join(tally, frontier.len() as u64);
        frontier.clear();
        touched.sort_unstable();
        touched.dedup();
        for t in touched {
            if next[t as usize] < cur[t as usize] {
                cur[t as usize] = next[t as usize];
                frontier.push(t);
            }
        }
    }
    cur
}

/// Dense bitmask over edge ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeMask {
    words: Vec<u64>,
}

impl EdgeMask {
    pub fn full(m: usize) -> EdgeMask {
        let mut mask = EdgeMask {
            words: vec![!0u64; m.div_ceil(64)],
        };
        // clear the tail so equality and counts stay well-defined
        for e in m..mask.words.len() * 64 {
            mask.remove(e as EdgeId);
        }
        mask
    }

    #[inline]
    pub fn contains(&self, e: EdgeId) -> bool {
        self.words[e as usize / 64] >> (e % 64) & 1 == 1
    }

    #[inline]
    pub fn remove(&mut self, e: EdgeId) {
        self.words[e as usize / 64] &= !(1u64 << (e % 64));
    }
}

/// Replacement distances for an independent set of tree edges, computed in
/// one Dijkstra-class pass.
///
/// For excluded tree edge `e` with child endpoint `c`, `values` holds
/// `d(source, y, e)` (or `d(y, source, e)` for reversed trees) for every
/// `y` in `subtree(c)`, laid out in the tree's preorder starting at
/// `euler_in[c]`. Vertices outside every excluded subtree keep their base
/// distance: their canonical path avoids the excluded edges entirely.
#[derive(Clone, Debug)]
pub struct ExcludedSubtree {
    pub edge: EdgeId,
    pub sub_root: VertexId,
    pub pre_lo: u32,
    pub values: Vec<Dist>,
}

impl ExcludedSubtree {
    pub fn lookup(&self, spt: &ShortestPathTree, y: VertexId) -> Option<Dist> {
        let pre = spt.euler_in[y as usize];
        if pre == crate::tree::NO_POS {
            return None;
        }
        let off = pre.checked_sub(self.pre_lo)? as usize;
        self.values.get(off).copied()
    }
}

/// One exclusion pass. Labels inside an excluded subtree relax only along
/// edges whose other endpoint is in the same subtree; entering edges from
/// any other vertex `z` use the fixed base value `spt.dist[z]`, which is
/// valid in `G - e` because z's tree path avoids the tree edge `e`. The
/// excluded edge itself is never relaxed.
pub fn excluded_sssp(
    g: &Graph,
    spt: &ShortestPathTree,
    excluded: &[EdgeId],
    lm: &mut LocalMeter,
) -> Result<Vec<ExcludedSubtree>, ExclusionError> {
    const NO_MARK: u32 = u32::MAX;
    let n = g.vertex_count();

    let mut subs: Vec<ExcludedSubtree> = Vec::with_capacity(excluded.len());
    for &e in excluded {
        if !spt.is_tree_edge(g, e) {
            return Err(ExclusionError::NotTreeEdge(e));
        }
        let c = spt.child_endpoint(g, e);
        let lo = spt.euler_in[c as usize];
        let hi = spt.euler_out[c as usize];
        subs.push(ExcludedSubtree {
            edge: e,
            sub_root: c,
            pre_lo: lo,
            values: vec![Dist::INFINITY; (hi - lo + 1) as usize],
        });
    }

    // Independence check: preorder ranges must be pairwise disjoint.
    let mut spans: Vec<(u32, u32, usize)> = subs
        .iter()
        .enumerate()
        .map(|(i, s)| (s.pre_lo, s.pre_lo + s.values.len() as u32 - 1, i))
        .collect();
    spans.sort_unstable();
    for w in spans.windows(2) {
        if w[1].0 <= w[0].1 {
            return Err(ExclusionError::Overlap(
                subs[w[0].2].edge,
                subs[w[1].2].edge,
            ));
        }
    }

    let mut mark = vec![NO_MARK; n];
    for (i, sub) in subs.iter().enumerate() {
        for &v in &spt.order[sub.pre_lo as usize..sub.pre_lo as usize + sub.values.len()] {
            mark[v as usize] = i as u32;
        }
    }

    // Initial labels from base distances outside the subtree, then a
    // single heap pass over the union of subtrees.
    let mut label = vec![Dist::INFINITY; n];
    let mut heap: BinaryHeap<Reverse<(Dist, VertexId)>> = BinaryHeap::new();
    let mut settled = vec![false; n];
    for (i, sub) in subs.iter().enumerate() {
        for &y in &spt.order[sub.pre_lo as usize..sub.pre_lo as usize + sub.values.len()] {
            let mut best = Dist::INFINITY;
            let entering = |e: EdgeId, z: VertexId, lm: &mut LocalMeter, best: &mut Dist| {
                lm.charge(1);
                if e == sub.edge || mark[z as usize] == i as u32 {
                    return;
                }
                let base = spt.dist[z as usize];
                *best = (*best).min(base + Dist::from(g.weight(e)));
            };
            if spt.reversed {
                for e in g.out_edges(y) {
                    let z = g.dst(e);
                    entering(e, z, lm, &mut best);
                }
            } else {
                for e in g.in_edges(y) {
                    let z = g.src(e);
                    entering(e, z, lm, &mut best);
                }
            }
            if best.is_finite() {
                label[y as usize] = best;
                heap.push(Reverse((best, y)));
                heap_charge(lm, heap.len());
            }
        }
    }

    while let Some(Reverse((d, u))) = heap.pop() {
        heap_charge(lm, heap.len() + 1);
        if settled[u as usize] || d > label[u as usize] {
            continue;
        }
        settled[u as usize] = true;
        let i = mark[u as usize];
        let relax = |e: EdgeId, t: VertexId, lm: &mut LocalMeter,
                     label: &mut Vec<Dist>,
                     heap: &mut BinaryHeap<Reverse<(Dist, VertexId)>>| {
            lm.charge(1);
            if mark[t as usize] != i {
                return;
            }
            let nd = d + Dist::from(g.weight(e));
            if nd < label[t as usize] {
                label[t as usize] = nd;
                heap.push(Reverse((nd, t)));
                heap_charge(lm, heap.len());
            }
        };
        if spt.reversed {
            for e in g.in_edges(u) {
                let t = g.src(e);
                relax(e, t, lm, &mut label, &mut heap);
            }
        } else {
            for e in g.out_edges(u) {
                let t = g.dst(e);
                relax(e, t, lm, &mut label, &mut heap);
            }
        }
    }

    for sub in subs.iter_mut() {
        for (off, slot) in sub.values.iter_mut().enumerate() {
            let y = spt.order[sub.pre_lo as usize + off];
            *slot = label[y as usize];
        }
    }
    Ok(subs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1() -> Graph {
        Graph::from_edges(4, &[(0, 1, 1), (1, 3, 1), (0, 2, 2), (2, 3, 2)]).0
    }

    fn lm() -> LocalMeter {
        LocalMeter::default()
    }

    #[test]
    fn dijkstra_g1() {
        let g = g1();
        let spt = dijkstra(&g, 0, false, &mut lm());
        let d: Vec<u64> = spt.dist.iter().map(|d| d.raw()).collect();
        assert_eq!(d, vec![0, 1, 2, 2]);
        assert_eq!(spt.parent_edge[3], g.edge_between(1, 3).unwrap());
    }

    #[test]
    fn dijkstra_isolated_source() {
        let g = Graph::from_edges(3, &[(1, 2, 1)]).0;
        let spt = dijkstra(&g, 0, false, &mut lm());
        assert_eq!(spt.dist[0], Dist::ZERO);
        assert!(spt.dist[1].is_infinite());
        assert!(spt.dist[2].is_infinite());
    }

    #[test]
    fn dijkstra_reversed_g1() {
        let g = g1();
        let spt = dijkstra(&g, 3, true, &mut lm());
        let d: Vec<u64> = spt.dist.iter().map(|d| d.raw()).collect();
        assert_eq!(d, vec![2, 1, 2, 0]);
    }

    #[test]
    fn brute_replacement_g1() {
        let g = g1();
        let e13 = g.edge_between(1, 3).unwrap();
        let e23 = g.edge_between(2, 3).unwrap();
        assert_eq!(
            replacement_distance_bruteforce(&g, 0, 3, e13, &mut lm()),
            Dist::finite(4)
        );
        assert_eq!(
            replacement_distance_bruteforce(&g, 0, 3, e23, &mut lm()),
            Dist::finite(2)
        );
        assert_eq!(
            replacement_distance_bruteforce(&g, 2, 2, e13, &mut lm()),
            Dist::ZERO
        );
    }

    #[test]
    fn hop_limited_respects_bound() {
        // path 0-1-2-3 unit weights plus a 0->3 shortcut of weight 10
        let g = Graph::from_edges(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 10)]).0;
        let d2 = hop_limited_sssp(&g, 0, 2, None, &mut lm());
        assert_eq!(d2[3], Dist::finite(10));
        let d3 = hop_limited_sssp(&g, 0, 3, None, &mut lm());
        assert_eq!(d3[3], Dist::finite(3));
    }

    #[test]
    fn hop_limited_full_equals_dijkstra() {
        let g = g1();
        let h = hop_limited_sssp(&g, 0, 4, None, &mut lm());
        let spt = dijkstra(&g, 0, false, &mut lm());
        assert_eq!(h, spt.dist);
    }

    #[test]
    fn excluded_single_edge() {
        let g = g1();
        let spt = dijkstra(&g, 0, false, &mut lm());
        let e13 = g.edge_between(1, 3).unwrap();
        let subs = excluded_sssp(&g, &spt, &[e13], &mut lm()).unwrap();
        assert_eq!(subs.len(), 1);
        assert_eq!(subs[0].lookup(&spt, 3), Some(Dist::finite(4)));
    }

    #[test]
    fn excluded_empty_set() {
        let g = g1();
        let spt = dijkstra(&g, 0, false, &mut lm());
        let subs = excluded_sssp(&g, &spt, &[], &mut lm()).unwrap();
        assert!(subs.is_empty());
    }

    #[test]
    fn excluded_depth_one_layer() {
        let g = g1();
        let spt = dijkstra(&g, 0, false, &mut lm());
        let e01 = g.edge_between(0, 1).unwrap();
        let e02 = g.edge_between(0, 2).unwrap();
        let subs = excluded_sssp(&g, &spt, &[e01, e02], &mut lm()).unwrap();
        let s01 = subs.iter().find(|s| s.edge == e01).unwrap();
        let s02 = subs.iter().find(|s| s.edge == e02).unwrap();
        assert_eq!(s01.lookup(&spt, 1), Some(Dist::INFINITY));
        assert_eq!(s01.lookup(&spt, 3), Some(Dist::finite(4)));
        assert_eq!(s02.lookup(&spt, 2), Some(Dist::INFINITY));
    }

    #[test]
    fn excluded_rejects_overlap() {
        let g = g1();
        let spt = dijkstra(&g, 0, false, &mut lm());
        let e01 = g.edge_between(0, 1).unwrap();
        let e13 = g.edge_between(1, 3).unwrap();
        // subtree(e01) = {1,3} contains subtree(e13) = {3}
        match excluded_sssp(&g, &spt, &[e01, e13], &mut lm()) {
            Err(ExclusionError::Overlap(_, _)) => {}
            other => panic!("expected overlap error, got {other:?}"),
        }
        let e23 = g.edge_between(2, 3).unwrap();
        assert!(matches!(
            excluded_sssp(&g, &spt, &[e23], &mut lm()),
            Err(ExclusionError::NotTreeEdge(_))
        ));
    }
}
