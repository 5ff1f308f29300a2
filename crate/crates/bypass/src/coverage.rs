//! Per-center replacement-distance tables.
//!
//! A center `c` of priority `k` covers a tree edge `e` of its outgoing
//! (or incoming) shortest-path tree when `e` sits within `cover_depth(k)`
//! hops of `c` and no strictly-higher-priority vertex lies on the tree
//! path between `c` and `e`. For every covered edge the table stores the
//! replacement distance to each vertex of the subtree hanging below the
//! edge; vertices outside that subtree keep their base distance, because
//! their canonical path avoids the edge.

use crate::apsp::CenterTables;
use crate::center::CenterAssignment;
use crate::dist::Dist;
use crate::graph::{EdgeId, Graph, VertexId};
use crate::hop::HopDso;
use crate::runtime::{LocalMeter, Meter, Runtime, Tally};
use crate::sssp::excluded_sssp;
use crate::tree::{ShortestPathTree, NO_VERTEX};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageEntry {
    pub edge: EdgeId,
    /// Preorder position (in the center's tree) of the subtree root.
    pub pre_lo: u32,
    /// Replacement distances for the subtree, preorder-aligned.
    pub values: Vec<Dist>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CenterCoverage {
    /// Sorted by edge id.
    pub entries: Vec<CoverageEntry>,
}

impl CenterCoverage {
    pub fn entry(&self, e: EdgeId) -> Option<&CoverageEntry> {
        self.entries
            .binary_search_by_key(&e, |en| en.edge)
            .ok()
            .map(|i| &self.entries[i])
    }
}

/// Forward table: `d(c, y, e)` for `e` covered in `T_c`. Reverse table:
/// `d(x, c, e)` for `e` covered in c's incoming tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageTable {
    pub fwd: Vec<CenterCoverage>,
    pub rev: Vec<CenterCoverage>,
}

impl CoverageTable {
    pub fn stored_words(&self) -> u64 {
        let side = |s: &[CenterCoverage]| -> u64 {
            s.iter()
                .map(|c| {
                    c.entries
                        .iter()
                        .map(|e| 2 + e.values.len() as u64)
                        .sum::<u64>()
                })
                .sum()
        };
        side(&self.fwd) + side(&self.rev)
    }
}

/// Edges covered by the tree's root, grouped by depth layer (index 0 =
/// depth 1). Same-depth tree edges have disjoint subtrees, so each layer
/// is one independent exclusion set.
///
/// The blocking test reads the center tables: the tree path between the
/// root and a tree edge is a canonical path, so a strictly higher
/// priority sits on it iff the pair's peak priority exceeds the root's
/// (the root's own priority never trips the strict test). Each edge's
/// test is O(1) and independent.
pub fn covered_edge_layers(
    tree: &ShortestPathTree,
    centers: &CenterTables,
    assignment: &CenterAssignment,
    lm: &mut LocalMeter,
) -> Vec<Vec<EdgeId>> {
    let root = tree.source;
    let k = assignment.priorities[root as usize];
    let depth_cut = assignment.cover_depth(k);

    let mut layers: Vec<Vec<EdgeId>> = Vec::new();
    for &v in &tree.order {
        if v == root {
            continue;
        }
        let vu = v as usize;
        let parent = tree.parent_vertex[vu];
        debug_assert!(parent != NO_VERTEX);
        let depth = tree.depth[vu];
        if depth > depth_cut {
            continue;
        }
        let blocking_peak = if tree.reversed {
            centers.peak_priority(parent, root)
        } else {
            centers.peak_priority(root, parent)
        };
        if blocking_peak > k {
            continue; // a strictly higher-priority center sits between
        }
        let layer = depth as usize - 1;
        if layers.len() <= layer {
            layers.resize_with(layer + 1, Vec::new);
        }
        layers[layer].push(tree.parent_edge[vu]);
    }
    lm.charge_parallel(tree.order.len() as u64);
    layers
}

/// Build both coverage sides with one exclusion pass per non-empty depth
/// layer of every center. Layers write disjoint subtrees, so they run as
/// independent branches of one parallel region.
pub fn compute_coverage(
    g: &Graph,
    trees_fwd: &[ShortestPathTree],
    trees_rev: &[ShortestPathTree],
    centers: &CenterTables,
    assignment: &CenterAssignment,
    rt: &Runtime,
    meter: &mut Meter,
) -> CoverageTable {
    let build_side = |trees: &[ShortestPathTree], meter: &mut Meter| -> Vec<CenterCoverage> {
        rt.parallel_for(meter, trees.len(), |c, lm| {
            let tree = &trees[c];
            let layers = covered_edge_layers(tree, centers, assignment, lm);
            let mut entries = Vec::new();
            let mut tally = Tally::default();
            let mut count = 0u64;
            for layer in layers.iter().filter(|l| !l.is_empty()) {
                let mut pass = LocalMeter::default();
                let subs = excluded_sssp(g, tree, layer, &mut pass)
                    .expect("same-depth tree edges are independent");
                for sub in subs {
                    entries.push(CoverageEntry {
                        edge: sub.edge,
                        pre_lo: sub.pre_lo,
                        values: sub.values,
                    });
                }
                tally.add(pass);
                count += 1;
            }
            lm.join(tally, count);
            entries.sort_unstable_by_key(|e| e.edge);
            lm.charge_parallel(entries.len().max(1) as u64);
            CenterCoverage { entries }
        })
    };
    let fwd = meter.scoped("coverage-fwd", |m| build_side(trees_fwd, m));
    let rev = meter.scoped("coverage-rev", |m| build_side(trees_rev, m));
    CoverageTable { fwd, rev }
}

/// Build both coverage sides by querying a hop-limited oracle for every
/// covered `(center, edge, subtree vertex)` slot instead of running
/// exclusions. All slots of one center are independent queries.
pub fn coverage_via_queries(
    g: &Graph,
    trees_fwd: &[ShortestPathTree],
    trees_rev: &[ShortestPathTree],
    centers: &CenterTables,
    assignment: &CenterAssignment,
    dso: &dyn HopDso,
    rt: &Runtime,
    meter: &mut Meter,
) -> CoverageTable {
    let build_side = |trees: &[ShortestPathTree], forward: bool, meter: &mut Meter| {
        rt.parallel_for(meter, trees.len(), |c, lm| {
            let tree = &trees[c];
            let layers = covered_edge_layers(tree, centers, assignment, lm);
            let mut entries = Vec::new();
            let mut tally = Tally::default();
            let mut slots = 0u64;
            for layer in layers.iter() {
                for &e in layer {
                    let sub_root = tree.child_endpoint(g, e);
                    let range = tree.subtree_range(sub_root);
                    let pre_lo = range.start as u32;
                    let mut values = Vec::with_capacity(range.len());
                    for &y in &tree.order[range] {
                        let mut qlm = LocalMeter::default();
                        let d = if forward {
                            dso.query(g, c as VertexId, y, e, &mut qlm)
                        } else {
                            dso.query(g, y, c as VertexId, e, &mut qlm)
                        };
                        values.push(d);
                        tally.add(qlm);
                        slots += 1;
                    }
                    entries.push(CoverageEntry {
                        edge: e,
                        pre_lo,
                        values,
                    });
                }
            }
            lm.join(tally, slots);
            entries.sort_unstable_by_key(|e| e.edge);
            lm.charge_parallel(entries.len().max(1) as u64);
            CenterCoverage { entries }
        })
    };
    let fwd = meter.scoped("coverage-fwd", |m| build_side(trees_fwd, true, m));
    let rev = meter.scoped("coverage-rev", |m| build_side(trees_rev, false, m));
    CoverageTable { fwd, rev }
}
