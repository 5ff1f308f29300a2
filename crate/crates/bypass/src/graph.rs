//! Directed weighted graph in compressed adjacency form.

use std::io::BufRead;

use thiserror::Error;

pub type VertexId = u32;
pub type EdgeId = u32;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: malformed input: {what}")]
    Malformed { line: usize, what: String },
    #[error("line {line}: negative weight {weight}")]
    NegativeWeight { line: usize, weight: i64 },
    #[error("line {line}: vertex id {vertex} out of range (n = {n})")]
    VertexOutOfRange { line: usize, vertex: u64, n: u32 },
    #[error("line {line}: self-loop at vertex {vertex}")]
    SelfLoop { line: usize, vertex: u32 },
    #[error("expected {expected} edge lines, found {found}")]
    EdgeCountMismatch { expected: usize, found: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Immutable directed graph with non-negative integer edge weights.
///
/// Edges are deduplicated (minimum weight wins) and stored sorted by
/// `(src, dst)`; the sorted position is the edge id. Forward and reverse
/// adjacency are index ranges over that order, so both views describe the
/// same edge multiset.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    src: Vec<VertexId>,
    dst: Vec<VertexId>,
    weight: Vec<u32>,
    out_start: Vec<u32>,
    in_start: Vec<u32>,
    in_edges: Vec<EdgeId>,
}

impl Graph {
    /// Build from an edge list. Duplicate ordered pairs collapse to the
    /// minimum weight; the number of collapsed duplicates is returned.
    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId, u32)]) -> (Graph, usize) {
        let mut sorted: Vec<(VertexId, VertexId, u32)> = edges.to_vec();
        sorted.sort_unstable();
        let mut dedup: Vec<(VertexId, VertexId, u32)> = Vec::with_capacity(sorted.len());
        let mut duplicates = 0;
        for &(s, d, w) in &sorted {
            match dedup.last() {
                Some(&(ps, pd, _)) if ps == s && pd == d => duplicates += 1,
                _ => dedup.push((s, d, w)),
            }
        }

        let m = dedup.len();
        let mut src = Vec::with_capacity(m);
        let mut dst = Vec::with_capacity(m);
        let mut weight = Vec::with_capacity(m);
        let mut out_start = vec![0u32; n + 1];
        for &(s, d, w) in &dedup {
            src.push(s);
            dst.push(d);
            weight.push(w);
            out_start[s as usize + 1] += 1;
        }
        for i in 0..n {
            out_start[i + 1] += out_start[i];
        }

        let mut in_start = vec![0u32; n + 1];
        for &d in &dst {
            in_start[d as usize + 1] += 1;
        }
        for i in 0..n {
            in_start[i + 1] += in_start[i];
        }
        let mut cursor = in_start.clone();
        let mut in_edges = vec![0 as EdgeId; m];
        for e in 0..m {
            let d = dst[e] as usize;
            in_edges[cursor[d] as usize] = e as EdgeId;
            cursor[d] += 1;
        }

        (
            Graph {
                n,
                src,
                dst,
                weight,
                out_start,
                in_start,
                in_edges,
            },
            duplicates,
        )
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.src.len()
    }

    #[inline]
    pub fn src(&self, e: EdgeId) -> VertexId {
        self.src[e as usize]
    }

    #[inline]
    pub fn dst(&self, e: EdgeId) -> VertexId {
        self.dst[e as usize]
    }

    #[inline]
    pub fn weight(&self, e: EdgeId) -> u32 {
        self.weight[e as usize]
    }

    #[inline]
    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        (self.src(e), self.dst(e))
    }

    /// Out-edge ids of `v`, ascending by destination.
    #[inline]
    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        let lo = self.out_start[v as usize] as usize;
        let hi = self.out_start[v as usize + 1] as usize;
        (lo as EdgeId)..(hi as EdgeId)
    }

    #[inline]
    pub fn out_degree(&self, v: VertexId) -> usize {
        (self.out_start[v as usize + 1] - self.out_start[v as usize]) as usize
    }

    /// In-edge ids of `v`.
    #[inline]
    pub fn in_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        let lo = self.in_start[v as usize] as usize;
        let hi = self.in_start[v as usize + 1] as usize;
        self.in_edges[lo..hi].iter().copied()
    }

    /// Edge id for the ordered pair `(u, v)`, if present. At most one edge
    /// per pair exists, so a binary search over the out range suffices.
    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        let lo = self.out_start[u as usize] as usize;
        let hi = self.out_start[u as usize + 1] as usize;
        let slice = &self.dst[lo..hi];
        slice
            .binary_search(&v)
            .ok()
            .map(|idx| (lo + idx) as EdgeId)
    }

    /// FNV-1a over `(n, m, src, dst, weight)`; used as the oracle file
    /// fingerprint.
    pub fn weight_hash(&self) -> u64 {
        let mut h = 0xcbf29ce484222325u64;
        let mut eat = |v: u64| {
            for b in v.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(self.n as u64);
        eat(self.src.len() as u64);
        for e in 0..self.src.len() {
            eat(self.src[e] as u64);
            eat(self.dst[e] as u64);
            eat(self.weight[e] as u64);
        }
        h
    }
}

/// Result of parsing a graph file: the graph plus a duplicate-collapse
/// warning count.
#[derive(Debug)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub duplicate_warnings: usize,
}

/// Parse the text graph format: a header line `<n> <m>` followed by `m`
/// lines `<src> <dst> <weight>`. Lines starting with `#` are ignored.
pub fn load_graph<R: BufRead>(reader: R) -> Result<LoadedGraph, GraphError> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges: Vec<(VertexId, VertexId, u32)> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        if header.is_none() {
            let n = parse_u64(fields.next(), line_no, "vertex count")?;
            let m = parse_u64(fields.next(), line_no, "edge count")?;
            if fields.next().is_some() {
                return Err(GraphError::Malformed {
                    line: line_no,
                    what: "trailing fields after header".into(),
                });
            }
            header = Some((n as usize, m as usize));
            continue;
        }

        let (n, _) = header.unwrap();
        let s = parse_u64(fields.next(), line_no, "source vertex")?;
        let d = parse_u64(fields.next(), line_no, "destination vertex")?;
        let w_text = fields.next().ok_or_else(|| GraphError::Malformed {
            line: line_no,
            what: "missing weight field".into(),
        })?;
        if fields.next().is_some() {
            return Err(GraphError::Malformed {
                line: line_no,
                what: "trailing fields after edge".into(),
            });
        }
        let w: i64 = w_text.parse().map_err(|_| GraphError::Malformed {
            line: line_no,
            what: format!("bad weight '{w_text}'"),
        })?;
        if w < 0 {
            return Err(GraphError::NegativeWeight {
                line: line_no,
                weight: w,
            });
        }
        if w > u32::MAX as i64 {
            return Err(GraphError::Malformed {
                line: line_no,
                what: format!("weight {w} exceeds 2^32 - 1"),
            });
        }
        for v in [s, d] {
            if v >= n as u64 {
                return Err(GraphError::VertexOutOfRange {
                    line: line_no,
                    vertex: v,
                    n: n as u32,
                });
            }
        }
        if s == d {
            return Err(GraphError::SelfLoop {
                line: line_no,
                vertex: s as u32,
            });
        }
        edges.push((s as VertexId, d as VertexId, w as u32));
    }

    let (n, m) = header.ok_or(GraphError::Malformed {
        line: 0,
        what: "empty input".into(),
    })?;
    if edges.len() != m {
        return Err(GraphError::EdgeCountMismatch {
            expected: m,
            found: edges.len(),
        });
    }
    let (graph, duplicate_warnings) = Graph::from_edges(n, &edges);
    Ok(LoadedGraph {
        graph,
        duplicate_warnings,
    })
}

/// Write a graph back out in the text format `load_graph` accepts.
pub fn write_graph<W: std::io::Write>(g: &Graph, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{} {}", g.vertex_count(), g.edge_count())?;
    for e in 0..g.edge_count() as EdgeId {
        writeln!(w, "{} {} {}", g.src(e), g.dst(e), g.weight(e))?;
    }
    Ok(())
}

fn parse_u64(field: Option<&str>, line: usize, what: &str) -> Result<u64, GraphError> {
    let text = field.ok_or_else(|| GraphError::Malformed {
        line,
        what: format!("missing {what}"),
    })?;
    text.parse().map_err(|_| GraphError::Malformed {
        line,
        what: format!("bad {what} '{text}'"),
    })
}
