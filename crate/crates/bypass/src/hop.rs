//! Hop-limited distance sensitivity oracles: the preprocessing-free 2-hop
//! base, the sampled-subgraph family, and the vertex-sampling extension
//! that stretches a hop bound by 3/2.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dist::Dist;
use crate::graph::{EdgeId, Graph, VertexId};
use crate::runtime::{LocalMeter, Meter, Runtime, Tally};
use crate::sssp::{hop_limited_sssp, EdgeMask};

#[derive(Debug, Error)]
pub enum HopError {
    #[error("hop bound {h} outside [2, {n}]")]
    BadHopBound { h: u32, n: usize },
    #[error("edge {0} present in every sampled subgraph after {1} rebuilds")]
    NoAbsence(EdgeId, u32),
    #[error("extension sample exceeded its size bound after {0} rebuilds")]
    SampleTooLarge(u32),
}

/// A stage that answers `query(x, y, e) <= d_h(x, y, e)` (w.h.p.) while
/// never going below the true replacement distance: every returned finite
/// value is the length of a real x-to-y path avoiding `e`.
pub trait HopDso: Sync {
    fn hop_bound(&self) -> u32;
    fn query(&self, g: &Graph, x: VertexId, y: VertexId, e: EdgeId, lm: &mut LocalMeter) -> Dist;
}

/// `d_2(x, y, e)`: the direct edge plus all two-hop detours, skipping `e`.
/// No preprocessing; O(out-degree) work per query.
pub fn two_hop_query(g: &Graph, x: VertexId, y: VertexId, e: EdgeId, lm: &mut LocalMeter) -> Dist {
    if x == y {
        return Dist::ZERO;
    }
    let mut best = Dist::INFINITY;
    let mut tally = Tally::default();
    let mut count = 0u64;
    if let Some(direct) = g.edge_between(x, y) {
        let mut c = LocalMeter::default();
        c.charge(1);
        if direct != e {
            best = Dist::from(g.weight(direct));
        }
        tally.add(c);
        count += 1;
    }
    for first in g.out_edges(x) {
        let mut c = LocalMeter::default();
        c.charge(1);
        count += 1;
        let s = g.dst(first);
        if first != e && s != y {
            if let Some(second) = g.edge_between(s, y) {
                if second != e {
                    let cand = Dist::from(g.weight(first)) + Dist::from(g.weight(second));
                    if cand < best {
                        best = cand;
                    }
                }
            }
        }
        tally.add(c);
    }
    lm.join(tally, count);
    best
}

/// The 2-hop base stage.
pub struct TwoHopDso;

impl HopDso for TwoHopDso {
    fn hop_bound(&self) -> u32 {
        2
    }

    fn query(&self, g: &Graph, x: VertexId, y: VertexId, e: EdgeId, lm: &mut LocalMeter) -> Dist {
        two_hop_query(g, x, y, e, lm)
    }
}

/// `ceil(3h/2)`, the hop bound one extension step reaches.
pub fn extended_hop(h: u32) -> u32 {
    (3 * h).div_ceil(2)
}

/// Number of extension steps from `h0` until the hop bound reaches `n`.
pub fn extension_steps(h0: u32, n: usize) -> u32 {
    let mut h = h0;
    let mut steps = 0;
    while (h as usize) < n {
        h = extended_hop(h);
        steps += 1;
    }
    steps
}

/// Sampled-subgraph family: `ceil(beta * 15 * h * log2 n)` subgraphs, each
/// keeping every edge independently with probability 1 - 1/h. The h-hop
/// APSP of every subgraph plus, per edge, the list of subgraphs missing
/// it, give `d_h(x,y,e) = min over i with e absent of d_i(x,y)` w.h.p.
pub struct SampledGraphFamily {
    pub h: u32,
    pub subgraphs: usize,
    pub masks: Vec<EdgeMask>,
    /// dist[i][x*n + y]: h-hop distance inside subgraph i.
    pub dist: Vec<Vec<Dist>>,
    /// For every edge, the subgraph indices that exclude it.
    pub absent: Vec<Vec<u32>>,
    pub rebuilds: u32,
}

pub fn build_sampled_family(
    g: &Graph,
    h: u32,
    beta: f64,
    seed: u64,
    rt: &Runtime,
    meter: &mut Meter,
) -> Result<SampledGraphFamily, HopError> {
    let n = g.vertex_count();
    let m = g.edge_count();
    if h < 2 || h as usize > n {
        return Err(HopError::BadHopBound { h, n });
    }
    let log_n = (n.max(2) as f64).log2();
    let subgraphs = ((beta * 15.0 * h as f64 * log_n).ceil() as usize).max(1);

    const MAX_REBUILDS: u32 = 8;
    let mut rebuilds = 0;
    let (masks, absent) = loop {
        let sub_seed = seed.wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(rebuilds as u64));
        let mut masks = Vec::with_capacity(subgraphs);
        let mut absent: Vec<Vec<u32>> = vec![Vec::new(); m];
        for i in 0..subgraphs {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed ^ (i as u64).rotate_left(17));
            let mut mask = EdgeMask::full(m);
            for e in 0..m as EdgeId {
                if rng.gen::<f64>() < 1.0 / h as f64 {
                    mask.remove(e);
                    absent[e as usize].push(i as u32);
                }
            }
            masks.push(mask);
        }
        meter.charge((subgraphs * m) as u64);
        match absent.iter().position(|l| l.is_empty()) {
            None => break (masks, absent),
            Some(e) => {
                rebuilds += 1;
                if rebuilds > MAX_REBUILDS {
                    return Err(HopError::NoAbsence(e as EdgeId, rebuilds));
                }
            }
        }
    };

    // h-hop SSSP per (subgraph, source), parallel over the flat index.
    let rows = meter.scoped("family-sssp", |m2| {
        rt.parallel_for(m2, subgraphs * n, |idx, lm| {
            let i = idx / n;
            let s = (idx % n) as VertexId;
            hop_limited_sssp(g, s, h, Some(&masks[i]), lm)
        })
    });
    let mut dist: Vec<Vec<Dist>> = Vec::with_capacity(subgraphs);
    let mut it = rows.into_iter();
    for _ in 0..subgraphs {
        let mut flat = Vec::with_capacity(n * n);
        for _ in 0..n {
            flat.extend(it.next().unwrap());
        }
        dist.push(flat);
    }

    Ok(SampledGraphFamily {
        h,
        subgraphs,
        masks,
        dist,
        absent,
        rebuilds,
    })
}

impl SampledGraphFamily {
    pub fn vertex_count(&self) -> usize {
        if self.dist.is_empty() {
            0
        } else {
            (self.dist[0].len() as f64).sqrt() as usize
        }
    }
}

impl HopDso for SampledGraphFamily {
    fn hop_bound(&self) -> u32 {
        self.h
    }

    fn query(&self, _g: &Graph, x: VertexId, y: VertexId, e: EdgeId, lm: &mut LocalMeter) -> Dist {
        if x == y {
            return Dist::ZERO;
        }
        let n = self.vertex_count();
        let list = &self.absent[e as usize];
        debug_assert!(!list.is_empty(), "build guarantees non-empty absence lists");
        let mut best = Dist::INFINITY;
        let mut tally = Tally::default();
        for &i in list {
            let mut c = LocalMeter::default();
            c.charge(1);
            let d = self.dist[i as usize][x as usize * n + y as usize];
            if d < best {
                best = d;
            }
            tally.add(c);
        }
        lm.join(tally, list.len() as u64);
        best
    }
}

/// Vertices sampled with probability `min(1, alpha * ln n / h)`; any
/// h/2-hop path segment contains one w.h.p., which is what the extension
/// step needs.
pub fn sample_extension_set(
    n: usize,
    h: u32,
    alpha: f64,
    seed: u64,
) -> Result<(Vec<VertexId>, u32), HopError> {
    let ln_n = (n.max(2) as f64).ln();
    let p = (alpha * ln_n / h as f64).min(1.0);
    let bound = (3.0 * alpha * n as f64 * ln_n / h as f64).ceil() as usize;
    const MAX_REBUILDS: u32 = 8;
    let mut rebuilds = 0;
    loop {
        let sub_seed = seed.wrapping_add(0x6a09e667f3bcc909u64.wrapping_mul(rebuilds as u64));
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
        let mut sample = Vec::new();
        for v in 0..n as VertexId {
            if rng.gen::<f64>() < p {
                sample.push(v);
            }
        }
        if sample.len() <= bound.max(1) {
            return Ok((sample, rebuilds));
        }
        rebuilds += 1;
        if rebuilds > MAX_REBUILDS {
            return Err(HopError::SampleTooLarge(rebuilds));
        }
    }
}

/// Extension stage: answers at hop bound `ceil(3h/2)` by splitting every
/// query at a sampled midpoint. The sample is always augmented with the
/// query endpoints, which covers replacement paths shorter than h/2.
pub struct ExtendedDso<'a> {
    pub base: &'a dyn HopDso,
    pub sample: Vec<VertexId>,
    hop: u32,
}

pub fn extend_high_query<'a>(
    base: &'a dyn HopDso,
    g: &Graph,
    alpha: f64,
    seed: u64,
) -> Result<ExtendedDso<'a>, HopError> {
    let (sample, _) = sample_extension_set(g.vertex_count(), base.hop_bound(), alpha, seed)?;
    let hop = extended_hop(base.hop_bound());
    Ok(ExtendedDso { base, sample, hop })
}

impl HopDso for ExtendedDso<'_> {
    fn hop_bound(&self) -> u32 {
        self.hop
    }

    fn query(&self, g: &Graph, x: VertexId, y: VertexId, e: EdgeId, lm: &mut LocalMeter) -> Dist {
        if x == y {
            return Dist::ZERO;
        }
        let mut best = Dist::INFINITY;
        let mut tally = Tally::default();
        let consider = |s: VertexId, tally: &mut Tally, best: &mut Dist| {
            let mut c = LocalMeter::default();
            let a = self.base.query(g, x, s, e, &mut c);
            let b = self.base.query(g, s, y, e, &mut c);
            c.charge(1);
            let cand = a + b;
            if cand < *best {
                *best = cand;
            }
            tally.add(c);
        };
        for &s in &self.sample {
            consider(s, &mut tally, &mut best);
        }
        consider(x, &mut tally, &mut best);
        consider(y, &mut tally, &mut best);
        lm.join(tally, self.sample.len() as u64 + 2);
        best
    }
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
    fn two_hop_examples() {
        let g = g1();
        let e13 = g.edge_between(1, 3).unwrap();
        // detour through vertex 2: 2 + 2
        assert_eq!(two_hop_query(&g, 0, 3, e13, &mut lm()), Dist::finite(4));
        // no two-hop path from 1 to 2 at all
        let e01 = g.edge_between(0, 1).unwrap();
        assert_eq!(two_hop_query(&g, 1, 2, e01, &mut lm()), Dist::INFINITY);
        assert_eq!(two_hop_query(&g, 2, 2, e01, &mut lm()), Dist::ZERO);
    }

    #[test]
    fn extended_hop_rounding() {
        assert_eq!(extended_hop(2), 3);
        assert_eq!(extended_hop(3), 5);
        assert_eq!(extended_hop(4), 6);
        assert_eq!(extended_hop(5), 8);
        assert_eq!(extension_steps(2, 32), 7); // 2,3,5,8,12,18,27,41
    }

    #[test]
    fn family_masks_reproducible() {
        let g = g1();
        let rt = Runtime::new(Some(2));
        let mut m1 = Meter::root("a");
        let f1 = build_sampled_family(&g, 2, 1.0, 77, &rt, &mut m1).unwrap();
        let mut m2 = Meter::root("b");
        let f2 = build_sampled_family(&g, 2, 1.0, 77, &rt, &mut m2).unwrap();
        assert_eq!(f1.masks, f2.masks);
        for e in 0..g.edge_count() {
            assert!(!f1.absent[e].is_empty());
        }
    }

    #[test]
    fn extension_sample_respects_size_bound() {
        for seed in 0..20u64 {
            for (n, h, alpha) in [(64usize, 4u32, 6.0f64), (200, 8, 6.0), (500, 2, 3.0)] {
                let (sample, _) = sample_extension_set(n, h, alpha, seed).unwrap();
                let bound = (3.0 * alpha * n as f64 * (n as f64).ln() / h as f64).ceil() as usize;
                assert!(sample.len() <= bound.max(1));
            }
        }
    }

    #[test]
    fn family_rejects_bad_hop_bound() {
        let g = g1();
        let rt = Runtime::new(Some(2));
        let mut m = Meter::root("t");
        assert!(matches!(
            build_sampled_family(&g, 1, 1.0, 1, &rt, &mut m),
            Err(HopError::BadHopBound { .. })
        ));
        assert!(matches!(
            build_sampled_family(&g, 9, 1.0, 1, &rt, &mut m),
            Err(HopError::BadHopBound { .. })
        ));
    }

    #[test]
    fn family_query_matches_two_hop_on_g1() {
        // h = 2 family answers equal d_2 on the accepted build
        let g = g1();
        let rt = Runtime::new(Some(2));
        let mut m = Meter::root("t");
        let fam = build_sampled_family(&g, 2, 1.0, 3, &rt, &mut m).unwrap();
        for x in 0..4u32 {
            for y in 0..4u32 {
                for e in 0..g.edge_count() as EdgeId {
                    let got = fam.query(&g, x, y, e, &mut lm());
                    let want = two_hop_query(&g, x, y, e, &mut lm());
                    assert_eq!(got, want, "triple ({x},{y},{e})");
                }
            }
        }
    }

    #[test]
    fn family_query_charges_one_lookup_per_absent_subgraph() {
        let g = g1();
        let rt = Runtime::new(Some(2));
        let mut m = Meter::root("t");
        let fam = build_sampled_family(&g, 2, 1.0, 3, &rt, &mut m).unwrap();
        for e in 0..g.edge_count() as EdgeId {
            let list_len = fam.absent[e as usize].len() as u64;
            let mut qlm = lm();
            fam.query(&g, 0, 3, e, &mut qlm);
            assert_eq!(qlm.work, list_len, "one charge per stored distance read");
        }
    }

    #[test]
    fn extension_with_midpoint() {
        // path of 3 unit edges; extending the 2-hop base answers the
        // 3-hop distance through any sampled midpoint (endpoints are
        // always included as midpoints too).
        let g = Graph::from_edges(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1)]).0;
        let base = TwoHopDso;
        let ext = ExtendedDso {
            base: &base,
            sample: vec![1],
            hop: 3,
        };
        // remove an edge not on the path: still 3
        let (g2, _) = Graph::from_edges(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 10)]);
        let shortcut = g2.edge_between(0, 3).unwrap();
        assert_eq!(ext.query(&g2, 0, 3, shortcut, &mut lm()), Dist::finite(3));
        assert_eq!(ext.query(&g, 2, 2, 0, &mut lm()), Dist::ZERO);
    }

    #[test]
    fn full_sample_is_exact_at_extended_bound() {
        let g = g1();
        let base = TwoHopDso;
        let ext = ExtendedDso {
            base: &base,
            sample: (0..4).collect(),
            hop: 3,
        };
        // with S = V the extension is deterministically the min over all
        // midpoints of 2-hop halves
        for x in 0..4u32 {
            for y in 0..4u32 {
                for e in 0..g.edge_count() as EdgeId {
                    let got = ext.query(&g, x, y, e, &mut lm());
                    let mut want = Dist::INFINITY;
                    for s in 0..4u32 {
                        let a = two_hop_query(&g, x, s, e, &mut lm());
                        let b = two_hop_query(&g, s, y, e, &mut lm());
                        want = want.min(a + b);
                    }
                    if x == y {
                        want = Dist::ZERO;
                    }
                    assert_eq!(got, want);
                }
            }
        }
    }
}
