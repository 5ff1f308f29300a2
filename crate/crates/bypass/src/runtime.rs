//! Fork-join execution with work/span accounting.
//!
//! Every algorithm phase charges abstract operation counts to a meter:
//! one unit per edge relaxation, min-plus term, or table write, and
//! `ceil(log2(len))` per heap operation. A `parallel_for` adds the sum of
//! its body works to the phase work and the maximum body span plus a
//! `ceil(log2(count))` fan-out/fan-in charge to the phase span. Counters
//! are merged with commutative sum/max, so reports are identical for any
//! physical thread count.

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeterError {
    #[error("phase '{0}' is still open")]
    OpenPhase(String),
}

#[inline]
pub fn ceil_log2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros() as u64
    }
}

/// Per-task counter handed to `parallel_for` bodies. Sequential charges
/// advance work and span together; nested parallel regions are modelled
/// through [`LocalMeter::tally`].
#[derive(Clone, Copy, Debug, Default)]
pub struct LocalMeter {
    pub work: u64,
    pub span: u64,
}

impl LocalMeter {
    #[inline]
    pub fn charge(&mut self, units: u64) {
        self.work += units;
        self.span += units;
    }

    /// Charge `count` independent unit operations (a data-parallel map or
    /// reduction): full work, logarithmic span.
    #[inline]
    pub fn charge_parallel(&mut self, count: u64) {
        if count == 0 {
            return;
        }
        self.work += count;
        self.span += 1 + ceil_log2(count);
    }

    /// Account a completed parallel region of `count` logical tasks whose
    /// merged counters are in `tally`.
    #[inline]
    pub fn join(&mut self, tally: Tally, count: u64) {
        if count == 0 {
            return;
        }
        self.work += tally.work;
        self.span += tally.max_span + ceil_log2(count);
    }

    /// Model-parallel loop executed sequentially: per-iteration charges
    /// contribute summed work but only max span.
    #[inline]
    pub fn tally<T>(
        &mut self,
        count: u64,
        mut each: impl FnMut(u64, &mut LocalMeter) -> T,
        mut fold: impl FnMut(T),
    ) {
        let mut t = Tally::default();
        for i in 0..count {
            let mut lm = LocalMeter::default();
            fold(each(i, &mut lm));
            t.add(lm);
        }
        self.join(t, count);
    }
}

/// Commutative merge of body meters: total work, maximum span.
#[derive(Clone, Copy, Debug, Default)]
pub struct Tally {
    pub work: u64,
    pub max_span: u64,
}

impl Tally {
    #[inline]
    pub fn add(&mut self, lm: LocalMeter) {
        self.work += lm.work;
        self.max_span = self.max_span.max(lm.span);
    }

    #[inline]
    pub fn merge(mut self, other: Tally) -> Tally {
        self.work += other.work;
        self.max_span = self.max_span.max(other.max_span);
        self
    }
}

/// Named phase counters, nestable. Sequential children add both work and
/// span to the parent when they close.
#[derive(Debug)]
pub struct Meter {
    name: String,
    work: u64,
    span: u64,
    children: Vec<Meter>,
    open: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeterRow {
    pub phase: String,
    pub work: u64,
    pub span: u64,
    pub depth: usize,
}

impl Meter {
    pub fn root(name: &str) -> Meter {
        Meter {
            name: name.to_string(),
            work: 0,
            span: 0,
            children: Vec::new(),
            open: true,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn work(&self) -> u64 {
        self.work
    }

    pub fn span(&self) -> u64 {
        self.span
    }

    #[inline]
    pub fn charge(&mut self, units: u64) {
        self.work += units;
        self.span += units;
    }

    /// See [`LocalMeter::charge_parallel`].
    #[inline]
    pub fn charge_parallel(&mut self, count: u64) {
        if count == 0 {
            return;
        }
        self.work += count;
        self.span += 1 + ceil_log2(count);
    }

    #[inline]
    pub fn absorb(&mut self, lm: LocalMeter) {
        self.work += lm.work;
        self.span += lm.span;
    }

    #[inline]
    pub fn join(&mut self, tally: Tally, count: u64) {
        if count == 0 {
            return;
        }
        self.work += tally.work;
        self.span += tally.max_span + ceil_log2(count);
    }

    /// Run a named sequential sub-phase; its counters fold into this phase
    /// when the closure returns.
    pub fn scoped<T>(&mut self, name: &str, f: impl FnOnce(&mut Meter) -> T) -> T {
        let mut child = Meter::root(name);
        let out = f(&mut child);
        child.open = false;
        self.work += child.work;
        self.span += child.span;
        self.children.push(child);
        out
    }

    /// Open a child phase that must be closed with [`Meter::close_child`]
    /// before reporting.
    pub fn open_child(&mut self, name: &str) -> usize {
        self.children.push(Meter::root(name));
        self.children.len() - 1
    }

    pub fn child_mut(&mut self, idx: usize) -> &mut Meter {
        &mut self.children[idx]
    }

    pub fn close_child(&mut self, idx: usize) {
        let child = &mut self.children[idx];
        child.open = false;
        let (w, s) = (child.work, child.span);
        self.work += w;
        self.span += s;
    }

    pub fn close(&mut self) {
        self.open = false;
    }

    /// Hierarchical rows, parent before child. Errors if any phase is
    /// still open.
    pub fn report(&self) -> Result<Vec<MeterRow>, MeterError> {
        let mut rows = Vec::new();
        self.collect(0, &mut rows)?;
        Ok(rows)
    }

    fn collect(&self, depth: usize, rows: &mut Vec<MeterRow>) -> Result<(), MeterError> {
        if self.open {
            return Err(MeterError::OpenPhase(self.name.clone()));
        }
        rows.push(MeterRow {
            phase: self.name.clone(),
            work: self.work,
            span: self.span,
            depth,
        });
        for child in &self.children {
            child.collect(depth + 1, rows)?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String, MeterError> {
        let rows = self.report()?;
        let mut out = String::from("phase,work,span,depth\n");
        for row in rows {
            let _ = writeln!(out, "{},{},{},{}", row.phase, row.work, row.span, row.depth);
        }
        Ok(out)
    }
}

/// Owns the thread pool. All data-parallel loops in the crate go through
/// [`Runtime::parallel_for`]; bodies write disjoint outputs and receive a
/// private [`LocalMeter`], so results and counters are independent of the
/// worker count.
pub struct Runtime {
    pool: rayon::ThreadPool,
    threads: usize,
}

impl Runtime {
    pub fn new(threads: Option<usize>) -> Runtime {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = threads {
            builder = builder.num_threads(t);
        }
        let pool = builder.build().expect("thread pool");
        let threads = pool.current_num_threads();
        Runtime { pool, threads }
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    /// Execute `body` for each index, collecting results in index order.
    /// Charges: work += sum of body works, span += max body span +
    /// `ceil(log2(count))`.
    pub fn parallel_for<T, F>(&self, meter: &mut Meter, count: usize, body: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize, &mut LocalMeter) -> T + Sync,
    {
        if count == 0 {
            return Vec::new();
        }
        let (results, tally) = self.pool.install(|| {
            let pairs: Vec<(T, LocalMeter)> = (0..count)
                .into_par_iter()
                .with_min_len(batch_hint(count))
                .map(|i| {
                    let mut lm = LocalMeter::default();
                    let out = body(i, &mut lm);
                    (out, lm)
                })
                .collect();
            let mut tally = Tally::default();
            let mut results = Vec::with_capacity(count);
            for (out, lm) in pairs {
                tally.add(lm);
                results.push(out);
            }
            (results, tally)
        });
        meter.join(tally, count as u64);
        results
    }
}

fn batch_hint(count: usize) -> usize {
    (count / 64).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(0), 0);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
    }

    #[test]
    fn empty_loop_is_noop() {
        let rt = Runtime::new(Some(2));
        let mut m = Meter::root("t");
        let out: Vec<()> = rt.parallel_for(&mut m, 0, |_, lm| lm.charge(5));
        assert!(out.is_empty());
        assert_eq!(m.work(), 0);
        assert_eq!(m.span(), 0);
    }

    #[test]
    fn parallel_for_composition() {
        // four bodies of 10 work / 10 span: work 40, span 10 + log2(4).
        let rt = Runtime::new(Some(2));
        let mut m = Meter::root("t");
        rt.parallel_for(&mut m, 4, |_, lm| lm.charge(10));
        assert_eq!(m.work(), 40);
        assert_eq!(m.span(), 10 + 2);
    }

    #[test]
    fn nested_parallel_composition() {
        // outer count 2 over inner count 3 of unit bodies:
        // inner: work 3, span 1 + ceil_log2(3) = 3
        // outer: work 6, span 3 + ceil_log2(2) = 4
        let rt = Runtime::new(Some(2));
        let mut m = Meter::root("t");
        rt.parallel_for(&mut m, 2, |_, lm| {
            lm.tally(3, |_, inner| inner.charge(1), |_: ()| {});
        });
        assert_eq!(m.work(), 6);
        assert_eq!(m.span(), 4);
    }

    #[test]
    fn report_requires_closed_phases() {
        let mut m = Meter::root("root");
        let idx = m.open_child("inner");
        m.child_mut(idx).charge(3);
        assert!(matches!(m.report(), Err(MeterError::OpenPhase(_))));
        m.close_child(idx);
        m.close();
        let rows = m.report().unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].phase, "root");
        assert_eq!(rows[0].depth, 0);
        assert_eq!(rows[1].depth, 1);
    }

    #[test]
    fn empty_root_reports_zero_row() {
        let mut m = Meter::root("root");
        m.close();
        let rows = m.report().unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].work, rows[0].span), (0, 0));
        assert_eq!(m.to_csv().unwrap(), "phase,work,span,depth\nroot,0,0,0\n");
    }

    #[test]
    #[should_panic(expected = "body failure")]
    fn body_panics_abort_the_phase() {
        let rt = Runtime::new(Some(2));
        let mut m = Meter::root("t");
        rt.parallel_for(&mut m, 8, |i, _| {
            if i == 5 {
                panic!("body failure");
            }
        });
    }

    #[test]
    fn counters_independent_of_thread_count() {
        let run = |threads| {
            let rt = Runtime::new(Some(threads));
            let mut m = Meter::root("t");
            let vals = rt.parallel_for(&mut m, 1000, |i, lm| {
                lm.charge((i % 7 + 1) as u64);
                i * i
            });
            (vals, m.work(), m.span())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
    }

    #[test]
    fn span_never_exceeds_work() {
        let rt = Runtime::new(Some(3));
        let mut m = Meter::root("t");
        rt.parallel_for(&mut m, 17, |i, lm| lm.charge(i as u64 + 1));
        // span <= work can be violated only by coordination charges on
        // zero-work bodies; with real charges the invariant holds.
        assert!(m.span() <= m.work());
    }
}
