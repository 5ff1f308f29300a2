//! All-pairs shortest paths, canonical path structure, and the
//! center-augmented tables.
//!
//! Two independent APSP routes exist and must agree: per-source Dijkstra
//! (work-efficient for sparse graphs) and a min-plus repeated-squaring
//! kernel over `(weight, hops)` pairs (polylog span, used by the fast
//! pipelines and as a cross-check). Parents are always derived from the
//! labels by [`crate::sssp::canonical_parents`], so both routes produce
//! identical trees.

use crate::dist::Dist;
use crate::graph::{EdgeId, Graph, VertexId};
use crate::runtime::{ceil_log2, LocalMeter, Meter, Runtime};
use crate::sssp::{canonical_parents, lex_dijkstra};
use crate::tree::{finalize_tree, ShortestPathTree, NO_EDGE, NO_VERTEX};

pub const NO_CENTER: u32 = u32::MAX;

/// Row-major n-by-n matrix of distances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<Dist>,
}

impl DistanceMatrix {
    pub fn new(n: usize) -> DistanceMatrix {
        DistanceMatrix {
            n,
            data: vec![Dist::INFINITY; n * n],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, x: VertexId, y: VertexId) -> Dist {
        self.data[x as usize * self.n + y as usize]
    }

    #[inline]
    pub fn set(&mut self, x: VertexId, y: VertexId, d: Dist) {
        self.data[x as usize * self.n + y as usize] = d;
    }

    #[inline]
    pub fn row(&self, x: VertexId) -> &[Dist] {
        &self.data[x as usize * self.n..(x as usize + 1) * self.n]
    }

    pub fn from_rows(rows: Vec<Vec<Dist>>) -> DistanceMatrix {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            debug_assert_eq!(row.len(), n);
            data.extend(row);
        }
        DistanceMatrix { n, data }
    }

    pub fn raw(&self) -> &[Dist] {
        &self.data
    }
}

/// Exact APSP as `n` canonical Dijkstras, one row per source.
pub fn apsp(g: &Graph, rt: &Runtime, meter: &mut Meter) -> DistanceMatrix {
    let n = g.vertex_count();
    let rows = rt.parallel_for(meter, n, |x, lm| {
        let (dist, _) = lex_dijkstra(g, x as VertexId, false, lm);
        dist
    });
    DistanceMatrix::from_rows(rows)
}

/// Min-plus repeated squaring over `(weight, hops)` keys. `ceil(log2 n)`
/// squarings of the adjacency matrix; exact and hop-minimal like the
/// Dijkstra route.
pub fn min_plus_apsp(g: &Graph, rt: &Runtime, meter: &mut Meter) -> (DistanceMatrix, Vec<u32>) {
    let n = g.vertex_count();
    let mut w: Vec<(Dist, u32)> = vec![(Dist::INFINITY, u32::MAX); n * n];
    for v in 0..n {
        w[v * n + v] = (Dist::ZERO, 0);
    }
    for e in 0..g.edge_count() as EdgeId {
        let (s, d) = g.endpoints(e);
        let idx = s as usize * n + d as usize;
        let cand = (Dist::from(g.weight(e)), 1);
        if cand < w[idx] {
            w[idx] = cand;
        }
    }
    meter.charge_parallel(g.edge_count() as u64 + n as u64);

    let rounds = ceil_log2(n as u64).max(1);
    for _ in 0..rounds {
        let rows = rt.parallel_for(meter, n, |x, lm| {
            let mut row: Vec<(Dist, u32)> = w[x * n..(x + 1) * n].to_vec();
            // one min-plus row product: each output cell is an
            // independent n-term reduction
            let mut tally = crate::runtime::Tally::default();
            for y in 0..n {
                let mut cell = LocalMeter::default();
                cell.charge_parallel(n as u64);
                let mut best = row[y];
                for z in 0..n {
                    let (dz, hz) = w[x * n + z];
                    let (dy, hy) = w[z * n + y];
                    if dz.is_infinite() || dy.is_infinite() {
                        continue;
                    }
                    let cand = (dz + dy, hz + hy);
                    if cand < best {
                        best = cand;
                    }
                }
                row[y] = best;
                tally.add(cell);
            }
            lm.join(tally, n as u64);
            row
        });
        let mut next = Vec::with_capacity(n * n);
        for row in rows {
            next.extend(row);
        }
        w = next;
    }

    let mut dist = DistanceMatrix::new(n);
    let mut hops = vec![u32::MAX; n * n];
    for i in 0..n * n {
        dist.data[i] = w[i].0;
        hops[i] = w[i].1;
    }
    (dist, hops)
}

/// The full canonical-path structure shared by every oracle build: the
/// distance matrix, per-source forward trees, derived incoming trees, and
/// the first-edge matrix.
///
/// Incoming trees are not independent reverse Dijkstras: the canonical
/// paths into `c` share suffixes, so they form an in-tree whose parent
/// pointer at `x` is the first edge of the canonical x-to-c path. Building
/// them from the forward structure keeps forward and reverse views of
/// every canonical path identical, which the coverage tables require.
pub struct CanonicalPaths {
    pub dist: DistanceMatrix,
    pub hops: Vec<u32>,
    pub fwd: Vec<ShortestPathTree>,
    pub rev: Vec<ShortestPathTree>,
    /// first_edge[x*n + y]: first edge of the canonical x-to-y path.
    pub first_edge: Vec<EdgeId>,
}

impl CanonicalPaths {
    /// Dijkstra route (used by the work-efficient pipeline).
    pub fn via_dijkstra(g: &Graph, rt: &Runtime, meter: &mut Meter) -> CanonicalPaths {
        let n = g.vertex_count();
        let labels = meter.scoped("sssp", |m| {
            rt.parallel_for(m, n, |x, lm| lex_dijkstra(g, x as VertexId, false, lm))
        });
        Self::from_labels(g, labels, rt, meter)
    }

    /// Min-plus route (polylog span; used by the fast pipelines).
    pub fn via_min_plus(g: &Graph, rt: &Runtime, meter: &mut Meter) -> CanonicalPaths {
        let n = g.vertex_count();
        let (dist, hops) = meter.scoped("apsp", |m| min_plus_apsp(g, rt, m));
        let labels = (0..n)
            .map(|x| {
                (
                    dist.row(x as VertexId).to_vec(),
                    hops[x * n..(x + 1) * n].to_vec(),
                )
            })
            .collect();
        Self::from_labels(g, labels, rt, meter)
    }

    fn from_labels(
        g: &Graph,
        labels: Vec<(Vec<Dist>, Vec<u32>)>,
        rt: &Runtime,
        meter: &mut Meter,
    ) -> CanonicalPaths {
        let n = g.vertex_count();
        let fwd: Vec<ShortestPathTree> = meter.scoped("trees", |m| {
            rt.parallel_for(m, n, |x, lm| {
                let (dist, hops) = &labels[x];
                let (pe, pv) = canonical_parents(g, x as VertexId, false, dist, hops, lm);
                finalize_tree(x as VertexId, false, dist.clone(), pe, pv, lm)
            })
        });

        let mut dist = DistanceMatrix::new(n);
        let mut hops = vec![u32::MAX; n * n];
        let mut first_edge = vec![NO_EDGE; n * n];
        for x in 0..n {
            for y in 0..n {
                dist.data[x * n + y] = labels[x].0[y];
                hops[x * n + y] = labels[x].1[y];
                first_edge[x * n + y] = fwd[x].root_edge[y];
            }
        }

        let rev: Vec<ShortestPathTree> = meter.scoped("reverse-trees", |m| {
            rt.parallel_for(m, n, |c, lm| {
                let mut pe = vec![NO_EDGE; n];
                let mut pv = vec![NO_VERTEX; n];
                let mut d = vec![Dist::INFINITY; n];
                for x in 0..n {
                    d[x] = dist.data[x * n + c];
                    if x != c {
                        let e = first_edge[x * n + c];
                        if e != NO_EDGE {
                            pe[x] = e;
                            pv[x] = g.dst(e);
                        }
                    }
                }
                lm.charge_parallel(n as u64);
                finalize_tree(c as VertexId, true, d, pe, pv, lm)
            })
        });

        CanonicalPaths {
            dist,
            hops,
            fwd,
            rev,
            first_edge,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.dist.n()
    }

    #[inline]
    pub fn first_edge(&self, x: VertexId, y: VertexId) -> EdgeId {
        self.first_edge[x as usize * self.n() + y as usize]
    }

    /// Edges of the canonical x-to-y path in path order.
    pub fn path_edges(&self, g: &Graph, x: VertexId, y: VertexId) -> Vec<EdgeId> {
        let mut edges = Vec::new();
        if x == y || self.dist.get(x, y).is_infinite() {
            return edges;
        }
        let mut cur = x;
        while cur != y {
            let e = self.first_edge(cur, y);
            debug_assert!(e != NO_EDGE);
            edges.push(e);
            cur = g.dst(e);
        }
        edges
    }
}

/// Per-pair center structure: for priorities `1..=levels`,
/// `from_src[x,y,i]` is the first vertex of priority >= i on the canonical
/// x-to-y path scanning from x, `from_dst` the first scanning backward
/// from y, and `peak` the maximum priority on the path (0 if unreachable).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CenterTables {
    pub n: usize,
    pub levels: usize,
    pub from_src: Vec<u32>,
    pub from_dst: Vec<u32>,
    pub peak: Vec<u8>,
}

impl CenterTables {
    fn new(n: usize, levels: usize) -> CenterTables {
        CenterTables {
            n,
            levels,
            from_src: vec![NO_CENTER; n * n * levels],
            from_dst: vec![NO_CENTER; n * n * levels],
            peak: vec![0u8; n * n],
        }
    }

    #[inline]
    fn slot(&self, x: VertexId, y: VertexId, priority: u8) -> usize {
        (x as usize * self.n + y as usize) * self.levels + priority as usize - 1
    }

    /// First vertex of priority >= `priority` scanning from x.
    #[inline]
    pub fn first_from_src(&self, x: VertexId, y: VertexId, priority: u8) -> Option<VertexId> {
        let v = self.from_src[self.slot(x, y, priority)];
        (v != NO_CENTER).then_some(v)
    }

    /// First vertex of priority >= `priority` scanning backward from y.
    #[inline]
    pub fn first_from_dst(&self, x: VertexId, y: VertexId, priority: u8) -> Option<VertexId> {
        let v = self.from_dst[self.slot(x, y, priority)];
        (v != NO_CENTER).then_some(v)
    }

    #[inline]
    pub fn peak_priority(&self, x: VertexId, y: VertexId) -> u8 {
        self.peak[x as usize * self.n + y as usize]
    }
}

pub fn priority_levels(n: usize) -> usize {
    (ceil_log2(n as u64) as usize).max(1)
}

/// Route 1: derive the center tables by carrying `levels` slots down each
/// forward tree in preorder.
pub fn per_source_center_scan(
    g: &Graph,
    paths: &CanonicalPaths,
    priorities: &[u8],
    rt: &Runtime,
    meter: &mut Meter,
) -> CenterTables {
    let n = g.vertex_count();
    let levels = priority_levels(n);
    let rows = rt.parallel_for(meter, n, |x, lm| {
        let spt = &paths.fwd[x];
        let mut from_src = vec![NO_CENTER; n * levels];
        let mut from_dst = vec![NO_CENTER; n * levels];
        let mut peak = vec![0u8; n];
        for &v in &spt.order {
            lm.charge(levels as u64);
            let vu = v as usize;
            let p = priorities[vu];
            if vu == x {
                for i in 1..=levels as u8 {
                    if p >= i {
                        from_src[vu * levels + i as usize - 1] = v;
                        from_dst[vu * levels + i as usize - 1] = v;
                    }
                }
                peak[vu] = p;
                continue;
            }
            let z = spt.parent_vertex[vu] as usize;
            for i in 1..=levels as u8 {
                let s = i as usize - 1;
                from_src[vu * levels + s] = if from_src[z * levels + s] != NO_CENTER {
                    from_src[z * levels + s]
                } else if p >= i {
                    v
                } else {
                    NO_CENTER
                };
                from_dst[vu * levels + s] = if p >= i {
                    v
                } else {
                    from_dst[z * levels + s]
                };
            }
            peak[vu] = peak[z].max(p);
        }
        (from_src, from_dst, peak)
    });

    let mut tables = CenterTables::new(n, levels);
    for (x, (fs, fd, pk)) in rows.into_iter().enumerate() {
        tables.from_src[x * n * levels..(x + 1) * n * levels].copy_from_slice(&fs);
        tables.from_dst[x * n * levels..(x + 1) * n * levels].copy_from_slice(&fd);
        tables.peak[x * n..(x + 1) * n].copy_from_slice(&pk);
    }
    tables
}

/// Route 2: hop-doubling combination along canonical path decompositions.
/// When the x-to-y path splits at its canonical midpoint z, the combined
/// slot takes the x-to-z value if present, else the z-to-y value; ties
/// never leave the canonical path because z does not.
pub fn center_tables_doubling(
    g: &Graph,
    paths: &CanonicalPaths,
    priorities: &[u8],
    rt: &Runtime,
    meter: &mut Meter,
) -> CenterTables {
    let n = g.vertex_count();
    let levels = priority_levels(n);
    let mut tables = CenterTables::new(n, levels);

    // Base: prefixes and suffixes of one hop.
    let base = rt.parallel_for(meter, n, |x, lm| {
        let mut fs = vec![NO_CENTER; n * levels];
        let mut fd = vec![NO_CENTER; n * levels];
        let mut pk = vec![0u8; n];
        let mut fmid = vec![NO_VERTEX; n];
        let mut bmid = vec![NO_VERTEX; n];
        lm.charge_parallel((n * levels) as u64);
        for y in 0..n {
            if paths.dist.get(x as VertexId, y as VertexId).is_infinite() {
                continue;
            }
            let (px, py) = (priorities[x], priorities[y]);
            if x == y {
                for i in 1..=levels as u8 {
                    if px >= i {
                        fs[y * levels + i as usize - 1] = x as u32;
                        fd[y * levels + i as usize - 1] = x as u32;
                    }
                }
                pk[y] = px;
                fmid[y] = x as u32;
                bmid[y] = x as u32;
                continue;
            }
            let succ = g.dst(paths.first_edge(x as VertexId, y as VertexId));
            let pred = paths.fwd[x].parent_vertex[y];
            let (ps, pp) = (priorities[succ as usize], priorities[pred as usize]);
            for i in 1..=levels as u8 {
                let s = i as usize - 1;
                fs[y * levels + s] = if px >= i {
                    x as u32
                } else if ps >= i {
                    succ
                } else {
                    NO_CENTER
                };
                fd[y * levels + s] = if py >= i {
                    y as u32
                } else if pp >= i {
                    pred
                } else {
                    NO_CENTER
                };
            }
            pk[y] = px.max(ps);
            fmid[y] = succ;
            bmid[y] = pred;
        }
        (fs, fd, pk, fmid, bmid)
    });

    let mut fs: Vec<u32> = vec![NO_CENTER; n * n * levels];
    let mut fd: Vec<u32> = vec![NO_CENTER; n * n * levels];
    let mut pk: Vec<u8> = vec![0; n * n];
    let mut fmid: Vec<u32> = vec![NO_VERTEX; n * n];
    let mut bmid: Vec<u32> = vec![NO_VERTEX; n * n];
    for (x, (bfs, bfd, bpk, bfm, bbm)) in base.into_iter().enumerate() {
        fs[x * n * levels..(x + 1) * n * levels].copy_from_slice(&bfs);
        fd[x * n * levels..(x + 1) * n * levels].copy_from_slice(&bfd);
        pk[x * n..(x + 1) * n].copy_from_slice(&bpk);
        fmid[x * n..(x + 1) * n].copy_from_slice(&bfm);
        bmid[x * n..(x + 1) * n].copy_from_slice(&bbm);
    }

    let rounds = ceil_log2(n as u64).max(1);
    for _ in 0..rounds {
        let combined = rt.parallel_for(meter, n, |x, lm| {
            let mut nfs = fs[x * n * levels..(x + 1) * n * levels].to_vec();
            let mut nfd = fd[x * n * levels..(x + 1) * n * levels].to_vec();
            let mut npk = pk[x * n..(x + 1) * n].to_vec();
            let mut nfm = fmid[x * n..(x + 1) * n].to_vec();
            let mut nbm = bmid[x * n..(x + 1) * n].to_vec();
            lm.charge_parallel((n * (levels + 1)) as u64);
            for y in 0..n {
                let m = fmid[x * n + y];
                if m != NO_VERTEX && m as usize != y {
                    let mu = m as usize;
                    for s in 0..levels {
                        if nfs[y * levels + s] == NO_CENTER {
                            nfs[y * levels + s] = fs[mu * n * levels + y * levels + s];
                        }
                    }
                    npk[y] = npk[y].max(pk[mu * n + y]);
                    nfm[y] = fmid[mu * n + y];
                }
                let b = bmid[x * n + y];
                if b != NO_VERTEX && b as usize != x {
                    let bu = b as usize;
                    for s in 0..levels {
                        if nfd[y * levels + s] == NO_CENTER {
                            nfd[y * levels + s] = fd[x * n * levels + bu * levels + s];
                        }
                    }
                    nbm[y] = bmid[x * n + bu];
                }
            }
            (nfs, nfd, npk, nfm, nbm)
        });
        for (x, (nfs, nfd, npk, nfm, nbm)) in combined.into_iter().enumerate() {
            fs[x * n * levels..(x + 1) * n * levels].copy_from_slice(&nfs);
            fd[x * n * levels..(x + 1) * n * levels].copy_from_slice(&nfd);
            pk[x * n..(x + 1) * n].copy_from_slice(&npk);
            fmid[x * n..(x + 1) * n].copy_from_slice(&nfm);
            bmid[x * n..(x + 1) * n].copy_from_slice(&nbm);
        }
    }

    tables.from_src = fs;
    tables.from_dst = fd;
    tables.peak = pk;
    tables
}

/// Center-augmented APSP: distances via the min-plus kernel plus the
/// combined center tables. Self-contained form of the fast route.
pub fn apsp_augmented(
    g: &Graph,
    priorities: &[u8],
    rt: &Runtime,
    meter: &mut Meter,
) -> (DistanceMatrix, CenterTables) {
    let paths = CanonicalPaths::via_min_plus(g, rt, meter);
    let tables = center_tables_doubling(g, &paths, priorities, rt, meter);
    (paths.dist, tables)
}
