//! Graph generators, the verification harness, and the benchmark runner.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dist::Dist;
use crate::graph::{Graph, VertexId};
use crate::oracle::PipelineId;
use crate::pipeline::{build, PipelineConfig, PipelineError};
use crate::runtime::{LocalMeter, Runtime};
use crate::sssp::dijkstra_skipping;

#[derive(Debug, Error)]
pub enum ToolkitError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphModel {
    /// m uniform distinct ordered pairs, uniform weights in [1, wmax].
    Gnm,
    /// Layered DAG; edges only between consecutive layers. Stresses
    /// hop-limited code.
    Layered,
    /// A long unit-weight path 0 -> 1 -> ... -> n-1 plus random chords
    /// whose weight scales with the hop span. Stresses interval and
    /// bottleneck code.
    PathChords,
}

impl GraphModel {
    pub fn parse(s: &str) -> Option<GraphModel> {
        match s {
            "gnm" => Some(GraphModel::Gnm),
            "layered" => Some(GraphModel::Layered),
            "path-chords" => Some(GraphModel::PathChords),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GraphModel::Gnm => "gnm",
            GraphModel::Layered => "layered",
            GraphModel::PathChords => "path-chords",
        }
    }
}

/// Deterministic graph generation for a fixed seed.
pub fn gen_graph(
    model: &GraphModel,
    n: usize,
    m: usize,
    wmax: u32,
    seed: u64,
) -> Result<Graph, ToolkitError> {
    if n == 0 {
        return Err(ToolkitError::BadParams("n must be positive".into()));
    }
    if wmax == 0 {
        return Err(ToolkitError::BadParams("wmax must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(VertexId, VertexId, u32)> = Vec::with_capacity(m);
    match model {
        GraphModel::Gnm => {
            let total = n as u64 * (n as u64 - 1);
            if m as u64 > total {
                return Err(ToolkitError::BadParams(format!(
                    "m = {m} exceeds n(n-1) = {total}"
                )));
            }
            // partial Fisher-Yates over implicit ordered-pair indices
            let mut moved: HashMap<u64, u64> = HashMap::new();
            for i in 0..m as u64 {
                let j = rng.gen_range(i..total);
                let pick = *moved.get(&j).unwrap_or(&j);
                let displaced = *moved.get(&i).unwrap_or(&i);
                moved.insert(j, displaced);
                let src = (pick / (n as u64 - 1)) as VertexId;
                let off = pick % (n as u64 - 1);
                let dst = if off >= src as u64 { off + 1 } else { off } as VertexId;
                let w = rng.gen_range(1..=wmax);
                edges.push((src, dst, w));
            }
        }
        GraphModel::Layered => {
            let layers = (n / 3).max(2).min(n);
            let layer_of = |v: usize| v * layers / n;
            let mut capacity = 0u64;
            let mut sizes = vec![0u64; layers];
            for v in 0..n {
                sizes[layer_of(v)] += 1;
            }
            for l in 0..layers - 1 {
                capacity += sizes[l] * sizes[l + 1];
            }
            if m as u64 > capacity {
                return Err(ToolkitError::BadParams(format!(
                    "m = {m} exceeds layered capacity {capacity}"
                )));
            }
            let mut seen = std::collections::HashSet::new();
            let mut attempts = 0u64;
            let limit = 2000 * (m as u64 + 1) + 10_000;
            while edges.len() < m {
                attempts += 1;
                if attempts > limit {
                    return Err(ToolkitError::BadParams(
                        "layered edge budget unsatisfiable".into(),
                    ));
                }
                let u = rng.gen_range(0..n);
                let lu = layer_of(u);
                if lu + 1 >= layers {
                    continue;
                }
                let v = rng.gen_range(0..n);
                if layer_of(v) != lu + 1 {
                    continue;
                }
                if !seen.insert((u as u32, v as u32)) {
                    continue;
                }
                let w = rng.gen_range(1..=wmax);
                edges.push((u as VertexId, v as VertexId, w));
            }
        }
        GraphModel::PathChords => {
            if m < n - 1 {
                return Err(ToolkitError::BadParams(format!(
                    "path-chords needs m >= n-1 = {}",
                    n - 1
                )));
            }
            for v in 0..n - 1 {
                edges.push((v as VertexId, v as VertexId + 1, 1));
            }
            let chords = m - (n - 1);
            let mut seen: std::collections::HashSet<(u32, u32)> =
                edges.iter().map(|&(a, b, _)| (a, b)).collect();
            let mut placed = 0;
            let mut attempts = 0u64;
            let limit = 1000 * (chords as u64 + 1);
            while placed < chords {
                attempts += 1;
                if attempts > limit {
                    return Err(ToolkitError::BadParams(
                        "chord budget unsatisfiable".into(),
                    ));
                }
                let u = rng.gen_range(0..n) as u32;
                let v = rng.gen_range(0..n) as u32;
                if u == v || !seen.insert((u, v)) {
                    continue;
                }
                let span = u.abs_diff(v).max(1);
                let w = span * rng.gen_range(1..=wmax);
                edges.push((u, v, w));
                placed += 1;
            }
        }
    }
    Ok(Graph::from_edges(n, &edges).0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyScope {
    AllTriples,
    Sampled(u64),
}

#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub trial: u32,
    pub seed: u64,
    pub build_accepted: bool,
    pub build_attempts: u32,
    pub queries: u64,
    pub mismatches: u64,
    /// Any query strictly below the brute-force answer (soundness
    /// violations; must always be zero).
    pub undershoots: u64,
    pub max_lookups: u32,
    pub first_mismatch: Option<(u32, u32, u32, u32)>,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub pipeline: PipelineId,
    pub h: u32,
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub scope: VerifyScope,
    pub trials: Vec<TrialRecord>,
    pub required: u32,
}

impl VerifyReport {
    pub fn accepted_trials(&self) -> u32 {
        self.trials
            .iter()
            .filter(|t| t.build_accepted && t.mismatches == 0)
            .count() as u32
    }

    pub fn passed(&self) -> bool {
        self.accepted_trials() >= self.required
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "trial,seed,build_accepted,build_attempts,queries,mismatches,undershoots,max_lookups,first_x,first_y,first_u,first_v\n",
        );
        for t in &self.trials {
            let (fx, fy, fu, fv) = match t.first_mismatch {
                Some((x, y, u, v)) => (
                    x.to_string(),
                    y.to_string(),
                    u.to_string(),
                    v.to_string(),
                ),
                None => Default::default(),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                t.trial,
                t.seed,
                t.build_accepted,
                t.build_attempts,
                t.queries,
                t.mismatches,
                t.undershoots,
                t.max_lookups,
                fx,
                fy,
                fu,
                fv
            );
        }
        out
    }
}

/// Precomputed brute-force replacement distances: rows indexed by (x, e).
pub struct BruteTensor {
    m: usize,
    rows: Vec<Vec<Dist>>,
}

impl BruteTensor {
    pub fn new(g: &Graph) -> BruteTensor {
        let n = g.vertex_count();
        let m = g.edge_count();
        let mut lm = LocalMeter::default();
        let mut rows = Vec::with_capacity(n * m);
        for x in 0..n as VertexId {
            for e in 0..m as u32 {
                rows.push(dijkstra_skipping(g, x, e, &mut lm));
            }
        }
        BruteTensor { m, rows }
    }

    #[inline]
    pub fn get(&self, x: VertexId, y: VertexId, e: u32) -> Dist {
        if x == y {
            return Dist::ZERO;
        }
        self.rows[x as usize * self.m + e as usize][y as usize]
    }
}

/// Build + compare trials against the brute-force oracle. Build failures
/// are recorded, not fatal. A trial is accepted only if its build was
/// accepted and the comparison found zero mismatches.
pub fn verify(
    g: &Graph,
    cfg: &PipelineConfig,
    trials: u32,
    scope: VerifyScope,
    rt: &Runtime,
) -> Result<VerifyReport, ToolkitError> {
    let n = g.vertex_count();
    let m = g.edge_count();
    if matches!(scope, VerifyScope::AllTriples) && n > 64 {
        return Err(ToolkitError::BadParams(
            "all-triples scope requires n <= 64".into(),
        ));
    }
    let brute = BruteTensor::new(g);
    let mut records = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let seed = crate::pipeline::derive_seed(cfg.seed, 0x7517 + trial as u64);
        let trial_cfg = PipelineConfig { seed, ..*cfg };
        let outcome = build(g, &trial_cfg, rt)?;
        let mut rec = TrialRecord {
            trial,
            seed,
            build_accepted: outcome.report.accepted,
            build_attempts: outcome.report.attempts,
            queries: 0,
            mismatches: 0,
            undershoots: 0,
            max_lookups: 0,
            first_mismatch: None,
        };
        let check = |x: u32, y: u32, e: u32, rec: &mut TrialRecord| {
            let (got, lookups) = outcome.tables.query_counted(x, y, e).expect("valid ids");
            let want = brute.get(x, y, e);
            rec.queries += 1;
            rec.max_lookups = rec.max_lookups.max(lookups);
            if got != want {
                rec.mismatches += 1;
                if got < want {
                    rec.undershoots += 1;
                }
                if rec.first_mismatch.is_none() {
                    rec.first_mismatch =
                        Some((x, y, g.src(e), g.dst(e)));
                }
            }
        };
        match scope {
            VerifyScope::AllTriples => {
                for x in 0..n as u32 {
                    for y in 0..n as u32 {
                        for e in 0..m as u32 {
                            check(x, y, e, &mut rec);
                        }
                    }
                }
            }
            VerifyScope::Sampled(k) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
                for _ in 0..k {
                    if m == 0 {
                        break;
                    }
                    let x = rng.gen_range(0..n) as u32;
                    let y = rng.gen_range(0..n) as u32;
                    let e = rng.gen_range(0..m) as u32;
                    check(x, y, e, &mut rec);
                }
            }
        }
        records.push(rec);
    }
    let required = ((trials as f64) * 0.95).ceil() as u32;
    Ok(VerifyReport {
        pipeline: cfg.pipeline,
        h: cfg.h,
        gamma: cfg.gamma,
        alpha: cfg.alpha,
        beta: cfg.beta,
        scope,
        trials: records,
        required,
    })
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub pipeline: PipelineId,
    pub h: u32,
    pub n: usize,
    pub m: usize,
    pub work: u64,
    pub span: u64,
    pub oracle_words: u64,
    pub wall_ms: u128,
    pub accepted: bool,
}

pub fn bench_csv_header() -> &'static str {
    "pipeline,h,n,m,work,span,oracle_words,wall_ms,accepted\n"
}

pub fn bench_row_csv(r: &BenchRow) -> String {
    let p = match r.pipeline {
        PipelineId::A => "a",
        PipelineId::B => "b",
        PipelineId::C => "c",
    };
    format!(
        "{},{},{},{},{},{},{},{},{}\n",
        p, r.h, r.n, r.m, r.work, r.span, r.oracle_words, r.wall_ms, r.accepted
    )
}

/// One metered build per (pipeline, h) grid cell on a fixed graph.
pub fn bench(
    g: &Graph,
    grid: &[(PipelineId, u32)],
    seed: u64,
    gamma: f64,
    alpha: f64,
    beta: f64,
    rt: &Runtime,
) -> Result<Vec<BenchRow>, ToolkitError> {
    let mut rows = Vec::with_capacity(grid.len());
    for &(pipeline, h) in grid {
        let cfg = PipelineConfig {
            pipeline,
            h,
            seed,
            gamma,
            alpha,
            beta,
        };
        let start = Instant::now();
        let outcome = build(g, &cfg, rt)?;
        let wall_ms = start.elapsed().as_millis();
        rows.push(BenchRow {
            pipeline,
            h,
            n: g.vertex_count(),
            m: g.edge_count(),
            work: outcome.report.build_meter.work(),
            span: outcome.report.build_meter.span(),
            oracle_words: outcome.tables.stored_words(),
            wall_ms,
            accepted: outcome.report.accepted,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gnm_deterministic_and_valid() {
        let a = gen_graph(&GraphModel::Gnm, 4, 4, 2, 9).unwrap();
        let b = gen_graph(&GraphModel::Gnm, 4, 4, 2, 9).unwrap();
        assert_eq!(a.weight_hash(), b.weight_hash());
        assert_eq!(a.edge_count(), 4);
        let g = gen_graph(&GraphModel::Gnm, 16, 60, 10, 3).unwrap();
        assert_eq!(g.edge_count(), 60);
        for e in 0..60u32 {
            let (s, d) = g.endpoints(e);
            assert_ne!(s, d);
            assert!(g.weight(e) >= 1 && g.weight(e) <= 10);
        }
        assert!(gen_graph(&GraphModel::Gnm, 4, 13, 2, 1).is_err());
    }

    #[test]
    fn path_chords_zero_chords_is_the_path() {
        let g = gen_graph(&GraphModel::PathChords, 8, 7, 5, 1).unwrap();
        assert_eq!(g.edge_count(), 7);
        for e in 0..7u32 {
            assert_eq!(g.endpoints(e), (e, e + 1));
            assert_eq!(g.weight(e), 1);
        }
    }

    #[test]
    fn layered_is_a_dag_between_layers() {
        let g = gen_graph(&GraphModel::Layered, 20, 30, 4, 8).unwrap();
        assert_eq!(g.edge_count(), 30);
        for e in 0..30u32 {
            let (s, d) = g.endpoints(e);
            assert!(s < d, "layered edges go forward");
        }
    }

    #[test]
    fn verify_trivial_graph_all_accepted() {
        let g = Graph::from_edges(4, &[(0, 1, 1), (1, 3, 1), (0, 2, 2), (2, 3, 2)]).0;
        let rt = Runtime::new(Some(2));
        let cfg = PipelineConfig::new(PipelineId::A, 21);
        let report = verify(&g, &cfg, 5, VerifyScope::AllTriples, &rt).unwrap();
        assert_eq!(report.accepted_trials(), 5);
        assert!(report.passed());
        for t in &report.trials {
            assert_eq!(t.undershoots, 0);
            assert!(t.max_lookups <= 12);
        }
    }

    #[test]
    fn verify_zero_trials_passes() {
        let g = Graph::from_edges(2, &[(0, 1, 1)]).0;
        let rt = Runtime::new(Some(2));
        let cfg = PipelineConfig::new(PipelineId::A, 1);
        let report = verify(&g, &cfg, 0, VerifyScope::AllTriples, &rt).unwrap();
        assert!(report.passed());
        assert_eq!(report.required, 0);
    }

    #[test]
    fn negative_control_produces_mismatches() {
        // starve the coverage depth: queries fall back to interval
        // removal and overshoot, and the harness must see it
        let g = gen_graph(&GraphModel::PathChords, 24, 36, 4, 5).unwrap();
        let rt = Runtime::new(Some(2));
        let cfg = PipelineConfig::new(PipelineId::A, 3).with_multipliers(0.01, 6.0, 1.0);
        let report = verify(&g, &cfg, 2, VerifyScope::AllTriples, &rt).unwrap();
        assert!(!report.passed(), "crippled constants must be detected");
        let total: u64 = report.trials.iter().map(|t| t.mismatches).sum();
        assert!(total > 0);
        assert!(report.trials.iter().any(|t| t.first_mismatch.is_some()));
        // soundness holds even in rejected trials
        assert!(report.trials.iter().all(|t| t.undershoots == 0));
    }

    #[test]
    fn bench_empty_grid_is_header_only() {
        let g = Graph::from_edges(2, &[(0, 1, 1)]).0;
        let rt = Runtime::new(Some(2));
        let rows = bench(&g, &[], 1, 4.0, 6.0, 1.0, &rt).unwrap();
        assert!(rows.is_empty());
        let mut csv = String::from(bench_csv_header());
        for r in &rows {
            csv.push_str(&bench_row_csv(r));
        }
        assert_eq!(csv.lines().count(), 1);
    }
}
