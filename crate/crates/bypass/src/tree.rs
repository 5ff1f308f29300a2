//! Shortest-path trees with canonical parents and Euler-interval ancestor
//! tests.
//!
//! Parent choice is canonical: among relaxations that produce the same
//! distance, the smaller `(distance, from-vertex, edge id)` key wins. This
//! fixes one shortest path per ordered pair, and gives the subpath
//! property the oracle tables rely on: the portion of a canonical path
//! between any two of its vertices is itself the canonical path for that
//! pair.

use crate::dist::Dist;
use crate::graph::{EdgeId, Graph, VertexId};
use crate::runtime::{ceil_log2, LocalMeter};

pub const NO_VERTEX: u32 = u32::MAX;
pub const NO_EDGE: u32 = u32::MAX;
pub const NO_POS: u32 = u32::MAX;

/// A rooted shortest-path tree (outgoing, or incoming when `reversed`).
///
/// `euler_in`/`euler_out` are preorder interval endpoints: `u` is an
/// ancestor of `y` iff `euler_in[u] <= euler_in[y] <= euler_out[u]`.
/// `order[euler_in[v]] = v`, so every subtree is a contiguous slice of
/// `order` — exclusions and coverage tables index values by
/// `euler_in[y] - euler_in[subtree root]`.
#[derive(Clone, Debug)]
pub struct ShortestPathTree {
    pub source: VertexId,
    pub reversed: bool,
    pub dist: Vec<Dist>,
    pub parent_edge: Vec<EdgeId>,
    pub parent_vertex: Vec<VertexId>,
    pub depth: Vec<u32>,
    pub euler_in: Vec<u32>,
    pub euler_out: Vec<u32>,
    pub order: Vec<VertexId>,
    /// Edge leaving the root toward each vertex (first edge of the
    /// canonical root-to-v path; for reversed trees the last edge of the
    /// v-to-root path is the edge leaving v).
    pub root_edge: Vec<EdgeId>,
}

impl ShortestPathTree {
    #[inline]
    pub fn reachable(&self, v: VertexId) -> bool {
        self.dist[v as usize].is_finite()
    }

    /// Ancestor-or-self test through Euler intervals; O(1).
    #[inline]
    pub fn is_ancestor(&self, u: VertexId, y: VertexId) -> bool {
        let iu = self.euler_in[u as usize];
        let iy = self.euler_in[y as usize];
        iu != NO_POS && iy != NO_POS && iu <= iy && iy <= self.euler_out[u as usize]
    }

    /// The vertex on the child side of tree edge `e` (the side whose
    /// subtree hangs below the edge).
    #[inline]
    pub fn child_endpoint(&self, g: &Graph, e: EdgeId) -> VertexId {
        if self.reversed {
            g.src(e)
        } else {
            g.dst(e)
        }
    }

    #[inline]
    pub fn is_tree_edge(&self, g: &Graph, e: EdgeId) -> bool {
        self.parent_edge[self.child_endpoint(g, e) as usize] == e
    }

    /// Subtree of `v` as a range into `order`.
    #[inline]
    pub fn subtree_range(&self, v: VertexId) -> std::ops::Range<usize> {
        let lo = self.euler_in[v as usize] as usize;
        let hi = self.euler_out[v as usize] as usize;
        lo..hi + 1
    }

    /// Walk tree edges from the root to `v` (canonical path for forward
    /// trees, reversed canonical path for incoming trees).
    pub fn path_edges_to(&self, v: VertexId) -> Vec<EdgeId> {
        let mut edges = Vec::new();
        let mut cur = v;
        while self.parent_edge[cur as usize] != NO_EDGE {
            edges.push(self.parent_edge[cur as usize]);
            cur = self.parent_vertex[cur as usize];
        }
        edges.reverse();
        edges
    }
}

/// True iff `e = (u, v)` lies on the canonical path from `spt.source` to
/// `y`: `e` must be the canonical parent edge of `v` and `v` an
/// ancestor-or-self of `y`. O(1).
pub fn is_on_canonical_path(g: &Graph, spt: &ShortestPathTree, y: VertexId, e: EdgeId) -> bool {
    debug_assert!(!spt.reversed);
    let v = g.dst(e);
    spt.parent_edge[v as usize] == e && spt.is_ancestor(v, y)
}

/// Finalize a tree from parent pointers: depths, Euler intervals, preorder
/// array, and root edges. Built with doubling passes (children bucketing,
/// tour successor list, Wyllie list ranking, parent-pointer shortcutting),
/// so the modelled span stays polylogarithmic.
pub fn finalize_tree(
    source: VertexId,
    reversed: bool,
    dist: Vec<Dist>,
    parent_edge: Vec<EdgeId>,
    parent_vertex: Vec<VertexId>,
    lm: &mut LocalMeter,
) -> ShortestPathTree {
    let n = dist.len();
    let mut depth = vec![NO_POS; n];
    let mut euler_in = vec![NO_POS; n];
    let mut euler_out = vec![NO_POS; n];
    let mut order: Vec<VertexId> = Vec::new();
    let mut root_edge = vec![NO_EDGE; n];

    // Children buckets via counting sort over parent ids; child order is
    // ascending vertex id, which fixes the preorder deterministically.
    let mut child_count = vec![0u32; n];
    let mut reach = 0usize;
    for v in 0..n {
        if dist[v].is_finite() {
            reach += 1;
            if parent_vertex[v] != NO_VERTEX {
                child_count[parent_vertex[v] as usize] += 1;
            }
        }
    }
    lm.charge_parallel(n as u64);

    if reach <= 1 {
        // Isolated root (or empty tree): a single preorder slot.
        if dist[source as usize].is_finite() {
            depth[source as usize] = 0;
            euler_in[source as usize] = 0;
            euler_out[source as usize] = 0;
            order.push(source);
        }
        return ShortestPathTree {
            source,
            reversed,
            dist,
            parent_edge,
            parent_vertex,
            depth,
            euler_in,
            euler_out,
            order,
            root_edge,
        };
    }

    let mut child_start = vec![0u32; n + 1];
    for v in 0..n {
        child_start[v + 1] = child_start[v] + child_count[v];
    }
    let mut cursor = child_start.clone();
    let mut children = vec![0u32; child_start[n] as usize];
    for v in 0..n as u32 {
        let p = parent_vertex[v as usize];
        if p != NO_VERTEX && dist[v as usize].is_finite() {
            children[cursor[p as usize] as usize] = v;
            cursor[p as usize] += 1;
        }
    }
    lm.charge_parallel(n as u64);

    // Euler tour arcs: down(v) = 2v, up(v) = 2v+1 for every non-root
    // reachable vertex v. Successor pointers stitch the tour.
    let total_arcs = 2 * (reach - 1);
    let nil = u32::MAX;
    let arc_down = |v: u32| 2 * v;
    let arc_up = |v: u32| 2 * v + 1;
    let first_child = |v: u32| -> Option<u32> {
        let lo = child_start[v as usize];
        let hi = child_start[v as usize + 1];
        (lo < hi).then(|| children[lo as usize])
    };
    let next_sibling = |v: u32| -> Option<u32> {
        let p = parent_vertex[v as usize];
        let lo = child_start[p as usize] as usize;
        let hi = child_start[p as usize + 1] as usize;
        let idx = children[lo..hi].binary_search(&v).expect("child listed");
        (lo + idx + 1 < hi).then(|| children[lo + idx + 1])
    };

    let mut next = vec![nil; 2 * n];
    let mut active: Vec<u32> = Vec::with_capacity(total_arcs);
    for v in 0..n as u32 {
        if !dist[v as usize].is_finite() || parent_vertex[v as usize] == NO_VERTEX {
            continue;
        }
        active.push(arc_down(v));
        active.push(arc_up(v));
        next[arc_down(v) as usize] = match first_child(v) {
            Some(c) => arc_down(c),
            None => arc_up(v),
        };
        next[arc_up(v) as usize] = match next_sibling(v) {
            Some(s) => arc_down(s),
            None => {
                let p = parent_vertex[v as usize];
                if p == source {
                    nil
                } else {
                    arc_up(p)
                }
            }
        };
    }
    lm.charge_parallel(total_arcs as u64);

    // Wyllie list ranking: rank = number of arcs after this one.
    let mut rank = vec![0u64; 2 * n];
    for &a in &active {
        rank[a as usize] = if next[a as usize] == nil { 0 } else { 1 };
    }
    let rounds = ceil_log2(total_arcs as u64) + 1;
    let mut next_buf = next.clone();
    let mut rank_buf = rank.clone();
    for _ in 0..rounds {
        for &a in &active {
            let nx = next[a as usize];
            if nx != nil {
                rank_buf[a as usize] = rank[a as usize] + rank[nx as usize];
                next_buf[a as usize] = next[nx as usize];
            } else {
                rank_buf[a as usize] = rank[a as usize];
                next_buf[a as usize] = nil;
            }
        }
        std::mem::swap(&mut next, &mut next_buf);
        std::mem::swap(&mut rank, &mut rank_buf);
        lm.charge_parallel(total_arcs as u64);
    }

    // Arc positions, then prefix counts of down-arcs for preorder ranks
    // and depths.
    let mut arc_at = vec![nil; total_arcs];
    for &a in &active {
        let pos = (total_arcs as u64 - 1 - rank[a as usize]) as usize;
        arc_at[pos] = a;
    }
    let mut down_prefix = vec![0u32; total_arcs + 1];
    for pos in 0..total_arcs {
        let is_down = arc_at[pos] % 2 == 0;
        down_prefix[pos + 1] = down_prefix[pos] + u32::from(is_down);
    }
    lm.charge_parallel(2 * total_arcs as u64);

    depth[source as usize] = 0;
    euler_in[source as usize] = 0;
    order = vec![NO_VERTEX; reach];
    order[0] = source;
    for pos in 0..total_arcs {
        let a = arc_at[pos];
        let v = (a / 2) as usize;
        if a % 2 == 0 {
            let pre = down_prefix[pos + 1]; // 1-based among non-root
            euler_in[v] = pre;
            order[pre as usize] = v as u32;
            let ups = pos as u32 + 1 - down_prefix[pos + 1];
            depth[v] = down_prefix[pos + 1] - ups;
        } else {
            // up arc: subtree of v closes here; euler_out = preorder of
            // the last vertex entered before this position.
            euler_out[v] = down_prefix[pos + 1];
        }
    }
    euler_out[source as usize] = reach as u32 - 1;
    lm.charge_parallel(total_arcs as u64);

    // Root edges by parent-pointer shortcutting.
    let mut ptr = vec![NO_VERTEX; n];
    for v in 0..n {
        if dist[v].is_finite() && parent_vertex[v] != NO_VERTEX {
            if parent_vertex[v] == source {
                root_edge[v] = parent_edge[v];
            } else {
                ptr[v] = parent_vertex[v];
            }
        }
    }
    let mut ptr_buf = ptr.clone();
    let mut root_buf = root_edge.clone();
    for _ in 0..rounds {
        for v in 0..n {
            if root_edge[v] == NO_EDGE && ptr[v] != NO_VERTEX {
                if root_edge[ptr[v] as usize] != NO_EDGE {
                    root_buf[v] = root_edge[ptr[v] as usize];
                    ptr_buf[v] = NO_VERTEX;
                } else {
                    ptr_buf[v] = ptr[ptr[v] as usize];
                    root_buf[v] = NO_EDGE;
                }
            } else {
                root_buf[v] = root_edge[v];
                ptr_buf[v] = ptr[v];
            }
        }
        std::mem::swap(&mut ptr, &mut ptr_buf);
        std::mem::swap(&mut root_edge, &mut root_buf);
        lm.charge_parallel(n as u64);
    }

    ShortestPathTree {
        source,
        reversed,
        dist,
        parent_edge,
        parent_vertex,
        depth,
        euler_in,
        euler_out,
        order,
        root_edge,
    }
}
