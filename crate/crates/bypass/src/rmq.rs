//! Sparse-table range queries: O(len log len) build, O(1) position
//! queries, ties to the smallest position.

use crate::runtime::{ceil_log2, LocalMeter};

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Min,
    Max,
}

/// Position-returning RMQ over a static `u64` array.
pub struct RmqTable {
    len: usize,
    levels: usize,
    mode: Extreme,
    keys: Vec<u64>,
    /// table[level * len + i] = extreme position in [i, i + 2^level)
    table: Vec<u32>,
}

impl RmqTable {
    pub fn new(keys: &[u64], mode: Extreme, lm: &mut LocalMeter) -> RmqTable {
        let len = keys.len();
        let levels = if len <= 1 {
            1
        } else {
            ceil_log2(len as u64) as usize + 1
        };
        let mut table = vec![0u32; levels * len];
        for i in 0..len {
            table[i] = i as u32;
        }
        for lvl in 1..levels {
            let half = 1usize << (lvl - 1);
            for i in 0..len {
                let a = table[(lvl - 1) * len + i];
                let j = (i + half).min(len.saturating_sub(1));
                let b = table[(lvl - 1) * len + j];
                table[lvl * len + i] = Self::pick(keys, mode, a, b);
                lm.charge(1);
            }
        }
        RmqTable {
            len,
            levels,
            mode,
            keys: keys.to_vec(),
            table,
        }
    }

    #[inline]
    fn pick(keys: &[u64], mode: Extreme, a: u32, b: u32) -> u32 {
        let (ka, kb) = (keys[a as usize], keys[b as usize]);
        let better = match mode {
            Extreme::Min => kb < ka,
            Extreme::Max => kb > ka,
        };
        if better || (ka == kb && b < a) {
            b
        } else {
            a
        }
    }

    /// Position of the extreme value in the inclusive range `[l, r]`.
    pub fn query(&self, l: usize, r: usize, lm: &mut LocalMeter) -> usize {
        debug_assert!(l <= r && r < self.len);
        lm.charge(3);
        if l == r {
            return l;
        }
        let span = r - l + 1;
        let lvl = (63 - (span as u64).leading_zeros() as usize).min(self.levels - 1);
        let a = self.table[lvl * self.len + l];
        let b = self.table[lvl * self.len + (r + 1 - (1 << lvl))];
        Self::pick(&self.keys, self.mode, a, b) as usize
    }
}
